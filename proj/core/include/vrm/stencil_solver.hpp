#pragma once

#include <array>
#include <span>
#include <vector>

#include "vrm/particle_cloud.hpp"
#include "vrm/spatial_index.hpp"

namespace vrm {

struct MultiIndex {
  int ax;
  int ay;
};

// Graded lexicographic order of the moment rows:
// (1,0) (0,1) | (2,0) (1,1) (0,2) | (3,0) (2,1) (1,2) (0,3) | (4,0) ... (0,4)
inline constexpr std::array<MultiIndex, 14> kMultiIndices{{
    {1, 0}, {0, 1},
    {2, 0}, {1, 1}, {0, 2},
    {3, 0}, {2, 1}, {1, 2}, {0, 3},
    {4, 0}, {3, 1}, {2, 2}, {1, 3}, {0, 4},
}};
inline constexpr int kMaxMomentRows = 14;

// Number of rows for multi-indices 1 <= |alpha| <= max_degree.
constexpr int moment_rows(int max_degree) {
  return max_degree * (max_degree + 3) / 2;
}

// V f' = b in coordinates normalised by h. Column j holds (r_ij/h)^alpha.
struct MomentSystem {
  int rows = 0;
  std::size_t cols = 0;
  std::vector<double> matrix;  // column-major, rows x cols
  std::array<double, kMaxMomentRows> rhs{};

  double at(int row, std::size_t col) const { return matrix[col * rows + row]; }
  std::span<const double> column(std::size_t col) const {
    return {matrix.data() + col * rows, static_cast<std::size_t>(rows)};
  }
};

// Moment system for consistency order n (degrees 1..n+1: 5 or 9 rows).
MomentSystem assemble(const NeighborhoodView& view, double h, int order);
// Same for raw offsets and an arbitrary maximal degree in [1, 4].
MomentSystem assemble_offsets(std::span<const Vec2> offsets, double h, int max_degree);

struct NonnegativeSolution {
  bool feasible = false;
  std::vector<double> fractions;  // normalised f', one per column
  double phase1_objective = 0.0;  // certificate when infeasible
  int iterations = 0;
};

inline constexpr double kFeasibilityTol = 1e-10;
inline constexpr double kClampTol = 1e-12;

// Phase-I simplex with Bland's rule. Supports 5, 9 and 14 rows.
NonnegativeSolution solve_nonnegative(const MomentSystem& sys);

// Off-diagonal entries are stored for strictly positive fractions only.
struct Stencil {
  ParticleId center = 0;
  std::vector<ParticleId> neighbors;
  std::vector<double> weights;  // f_ij in 1/length^2
  double diagonal = 0.0;        // f_ii = -sum_j f_ij
};

enum class StencilPath { small, full, failed };

struct StencilOptions {
  int order = 1;
  bool try_small = true;
};

struct StencilOutcome {
  Stencil stencil;
  StencilPath path = StencilPath::failed;
  bool small_failed = false;
};

// Tries the small neighbourhood first and retries with the full one.
StencilOutcome compute_stencil(const SpatialIndex& index, ParticleId i,
                               const StencilOptions& options);

Stencil make_stencil(const NeighborhoodView& view, std::span<const double> normalized, double h);

struct StencilCheck {
  double min_weight = 0.0;
  double max_moment_residual = 0.0;  // normalised units
  double weight_sum = 0.0;
  bool diagonal_exact = false;
};

StencilCheck check_stencil(const Stencil& stencil, std::span<const Vec2> positions, double h,
                           int order);

}  // namespace vrm
