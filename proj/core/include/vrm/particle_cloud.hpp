#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "vrm/vec2.hpp"

namespace vrm {

using ParticleId = std::uint32_t;

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Point vortices: positions x_i and circulations Gamma_i. Indices are stable;
// particles are only ever appended.
class ParticleCloud {
 public:
  ParticleCloud() = default;
  // Throws std::invalid_argument on length mismatch or non-finite entries.
  ParticleCloud(std::vector<Vec2> positions, std::vector<double> circulations);

  std::size_t size() const { return positions_.size(); }
  bool empty() const { return positions_.empty(); }

  std::span<const Vec2> positions() const { return positions_; }
  std::span<const double> circulations() const { return circulations_; }
  std::span<Vec2> positions() { return positions_; }
  std::span<double> circulations() { return circulations_; }

  Vec2 position(ParticleId i) const { return positions_[i]; }
  double circulation(ParticleId i) const { return circulations_[i]; }

  // Adds a particle with zero circulation; the vorticity field is unchanged.
  ParticleId append_empty(Vec2 pos);

  // Replaces all state at once; sizes must match the current particle count.
  void assign(std::span<const Vec2> positions, std::span<const double> circulations);

  // Sum of |Gamma_i|.
  double circulation_l1() const;

  friend bool operator==(const ParticleCloud&, const ParticleCloud&) = default;

 private:
  std::vector<Vec2> positions_;
  std::vector<double> circulations_;
};

ParticleCloud init_point_vortex(double gamma);

// CSV with header `x,y,gamma`, 17 significant digits per value.
void write_snapshot(const ParticleCloud& cloud, const std::filesystem::path& path);
// Accepts an empty (header-only) snapshot; simulations reject N = 0 later.
ParticleCloud read_snapshot(const std::filesystem::path& path);

}  // namespace vrm
