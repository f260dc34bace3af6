#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "vrm/particle_cloud.hpp"
#include "vrm/vec2.hpp"

namespace vrm {

inline constexpr int kSegments = 8;

// Annulus geometry: members of N_i satisfy r*h <= |x_j - x_i| <= R*h.
struct NeighborhoodParams {
  double h = 1.0;
  double r = 0.5;
  double R = 2.0;
  double frame_angle = 0.0;

  double inner() const { return r * h; }
  double outer() const { return R * h; }
};

struct Neighbor {
  ParticleId index = 0;
  Vec2 offset;  // x_j - x_i
  double dist2 = 0.0;
  int segment = 0;
};

// Members are sorted by particle index. The center is never a member.
struct NeighborhoodView {
  ParticleId center = 0;
  std::vector<Neighbor> members;

  std::array<int, kSegments> segment_counts() const;
};

// Segment k covers polar angles [k*45deg, (k+1)*45deg) measured from the
// frame's +x axis. Throws std::invalid_argument for a zero offset.
int segment_id(Vec2 offset, double frame_angle = 0.0);

// Uniform hash grid with cell size R*h. Holds its own copy of the positions
// so that freshly inserted points are visible to later queries.
class SpatialIndex {
 public:
  SpatialIndex(std::span<const Vec2> positions, const NeighborhoodParams& params);

  const NeighborhoodParams& params() const { return params_; }
  std::size_t size() const { return points_.size(); }
  std::span<const Vec2> points() const { return points_; }

  // Registers point `id`; ids must be appended in order (id == size()).
  void insert(ParticleId id, Vec2 pos);

  NeighborhoodView neighborhood(ParticleId i) const;
  void neighborhood(ParticleId i, NeighborhoodView& out) const;

 private:
  using CellKey = std::uint64_t;
  CellKey key_of(Vec2 p) const;
  static CellKey pack(std::int64_t cx, std::int64_t cy);

  NeighborhoodParams params_;
  double inv_cell_;
  std::vector<Vec2> points_;
  std::unordered_map<CellKey, std::vector<ParticleId>> cells_;
};

// Inserts an empty particle at radius 1.5h on the center line of every empty
// segment of N_i. Both the cloud and the index receive the new particles.
// Returns the inserted positions in segment order.
std::vector<Vec2> ensure_coverage(SpatialIndex& index, ParticleCloud& cloud, ParticleId i);

// Keeps the closest member of every nonempty segment (ties: lower index).
// Output is ordered by segment.
NeighborhoodView small_neighborhood(const NeighborhoodView& view);

}  // namespace vrm
