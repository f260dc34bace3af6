#include "vrm/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace vrm {

namespace {
constexpr double kSegmentWidth = std::numbers::pi / 4.0;
constexpr double kInsertionRadius = 1.5;
}  // namespace

std::array<int, kSegments> NeighborhoodView::segment_counts() const {
  std::array<int, kSegments> counts{};
  for (const auto& m : members) ++counts[m.segment];
  return counts;
}

int segment_id(Vec2 offset, double frame_angle) {
  if (offset.x == 0.0 && offset.y == 0.0) {
    throw std::invalid_argument("segment_id: zero offset");
  }
  double theta = std::atan2(offset.y, offset.x) - frame_angle;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  theta = std::fmod(theta, two_pi);
  if (theta < 0.0) theta += two_pi;
  const int k = static_cast<int>(std::floor(theta / kSegmentWidth));
  return std::clamp(k, 0, kSegments - 1);
}

SpatialIndex::SpatialIndex(std::span<const Vec2> positions, const NeighborhoodParams& params)
    : params_(params), inv_cell_(1.0 / params.outer()) {
  if (!(params.h > 0.0) || !(params.r > 0.0) || !(params.R > params.r)) {
    throw std::invalid_argument("SpatialIndex: require h > 0 and 0 < r < R");
  }
  points_.reserve(positions.size() + positions.size() / 4);
  cells_.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    insert(static_cast<ParticleId>(i), positions[i]);
  }
}

SpatialIndex::CellKey SpatialIndex::pack(std::int64_t cx, std::int64_t cy) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
         static_cast<std::uint32_t>(cy);
}

SpatialIndex::CellKey SpatialIndex::key_of(Vec2 p) const {
  return pack(static_cast<std::int64_t>(std::floor(p.x * inv_cell_)),
              static_cast<std::int64_t>(std::floor(p.y * inv_cell_)));
}

void SpatialIndex::insert(ParticleId id, Vec2 pos) {
  if (id != points_.size()) throw std::logic_error("SpatialIndex::insert: ids must be appended");
  points_.push_back(pos);
  cells_[key_of(pos)].push_back(id);
}

NeighborhoodView SpatialIndex::neighborhood(ParticleId i) const {
  NeighborhoodView view;
  neighborhood(i, view);
  return view;
}

void SpatialIndex::neighborhood(ParticleId i, NeighborhoodView& out) const {
  out.center = i;
  out.members.clear();
  const Vec2 xi = points_[i];
  const double lo2 = params_.inner() * params_.inner();
  const double hi2 = params_.outer() * params_.outer();
  const auto cx = static_cast<std::int64_t>(std::floor(xi.x * inv_cell_));
  const auto cy = static_cast<std::int64_t>(std::floor(xi.y * inv_cell_));
  for (std::int64_t dx = -1; dx <= 1; ++dx) {
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      const auto it = cells_.find(pack(cx + dx, cy + dy));
      if (it == cells_.end()) continue;
      for (ParticleId j : it->second) {
        if (j == i) continue;
        const Vec2 off = points_[j] - xi;
        const double d2 = norm2(off);
        if (d2 < lo2 || d2 > hi2) continue;
        out.members.push_back({j, off, d2, segment_id(off, params_.frame_angle)});
      }
    }
  }
  std::sort(out.members.begin(), out.members.end(),
            [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
}

std::vector<Vec2> ensure_coverage(SpatialIndex& index, ParticleCloud& cloud, ParticleId i) {
  if (index.size() != cloud.size()) {
    throw std::logic_error("ensure_coverage: index and cloud out of sync");
  }
  const auto counts = index.neighborhood(i).segment_counts();
  const NeighborhoodParams& p = index.params();
  const Vec2 center = cloud.position(i);
  std::vector<Vec2> inserted;
  for (int k = 0; k < kSegments; ++k) {
    if (counts[k] != 0) continue;
    const double angle = p.frame_angle + (k + 0.5) * kSegmentWidth;
    const Vec2 pos = center + kInsertionRadius * p.h * Vec2{std::cos(angle), std::sin(angle)};
    const ParticleId id = cloud.append_empty(pos);
    index.insert(id, pos);
    inserted.push_back(pos);
  }
  return inserted;
}

NeighborhoodView small_neighborhood(const NeighborhoodView& view) {
  std::array<const Neighbor*, kSegments> best{};
  for (const auto& m : view.members) {
    const Neighbor*& slot = best[m.segment];
    if (slot == nullptr || m.dist2 < slot->dist2 ||
        (m.dist2 == slot->dist2 && m.index < slot->index)) {
      slot = &m;
    }
  }
  NeighborhoodView out;
  out.center = view.center;
  for (const Neighbor* m : best) {
    if (m != nullptr) out.members.push_back(*m);
  }
  return out;
}

}  // namespace vrm
