#include "vrm/stencil_solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vrm/fixed_lu.hpp"

namespace vrm {

namespace {

constexpr double kReducedCostTol = 1e-12;
constexpr double kPivotTol = 1e-11;

void fill_column(double* col, Vec2 offset, double inv_h, int rows) {
  const double ux = offset.x * inv_h;
  const double uy = offset.y * inv_h;
  std::array<double, 5> px{1.0, ux, ux * ux, ux * ux * ux, ux * ux * ux * ux};
  std::array<double, 5> py{1.0, uy, uy * uy, uy * uy * uy, uy * uy * uy * uy};
  for (int a = 0; a < rows; ++a) {
    const MultiIndex& mi = kMultiIndices[a];
    col[a] = px[mi.ax] * py[mi.ay];
  }
}

MomentSystem make_system(std::size_t cols, int max_degree) {
  if (max_degree < 1 || max_degree > 4) {
    throw std::invalid_argument("moment system degree must lie in [1, 4]");
  }
  MomentSystem sys;
  sys.rows = moment_rows(max_degree);
  sys.cols = cols;
  sys.matrix.assign(cols * sys.rows, 0.0);
  if (max_degree >= 2) {
    sys.rhs[2] = 2.0;  // (2,0)
    sys.rhs[4] = 2.0;  // (0,2)
  }
  return sys;
}

// Variables 0..M-1 are the artificials (identity columns), M..M+n-1 the
// fractions. Artificials therefore win Bland ties when leaving the basis.
template <int M>
NonnegativeSolution phase_one(const MomentSystem& sys) {
  using Lu = FixedLu<M>;
  const std::size_t n = sys.cols;
  const int max_iterations = 50 * static_cast<int>(n + M) + 100;

  typename Lu::Vector b;
  for (int i = 0; i < M; ++i) b[i] = sys.rhs[i];

  std::array<std::size_t, M> basis;
  for (int i = 0; i < M; ++i) basis[i] = i;

  thread_local std::vector<char> in_basis;
  in_basis.assign(n + M, 0);
  for (int i = 0; i < M; ++i) in_basis[i] = 1;

  auto column = [&](std::size_t var, int row) -> double {
    if (var < static_cast<std::size_t>(M)) return var == static_cast<std::size_t>(row) ? 1.0 : 0.0;
    return sys.matrix[(var - M) * M + row];
  };

  NonnegativeSolution out;
  Lu lu;
  typename Lu::Matrix B;
  typename Lu::Vector xb{};
  bool feasible = false;
  double objective = 0.0;

  for (int iter = 0; iter < max_iterations; ++iter) {
    out.iterations = iter;
    for (int r = 0; r < M; ++r) {
      for (int k = 0; k < M; ++k) B[r * M + k] = column(basis[k], r);
    }
    if (!lu.factor(B)) break;
    xb = lu.solve(b);

    objective = 0.0;
    typename Lu::Vector cb{};
    for (int k = 0; k < M; ++k) {
      if (basis[k] < static_cast<std::size_t>(M)) {
        objective += xb[k];
        cb[k] = 1.0;
      }
    }
    if (objective <= kFeasibilityTol) {
      feasible = true;
      break;
    }

    const auto y = lu.solve_transposed(cb);
    std::size_t entering = std::numeric_limits<std::size_t>::max();
    for (std::size_t j = 0; j < n; ++j) {
      if (in_basis[j + M]) continue;
      const double* a = sys.matrix.data() + j * M;
      double d = 0.0;
      for (int r = 0; r < M; ++r) d -= y[r] * a[r];
      if (d < -kReducedCostTol) {
        entering = j + M;
        break;
      }
    }
    if (entering == std::numeric_limits<std::size_t>::max()) break;  // optimal, objective > tol

    typename Lu::Vector a;
    for (int r = 0; r < M; ++r) a[r] = column(entering, r);
    const auto d = lu.solve(a);

    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < M; ++k) {
      if (d[k] <= kPivotTol) continue;
      const double ratio = std::max(xb[k], 0.0) / d[k];
      if (ratio < best || (ratio == best && basis[k] < basis[leave])) {
        best = ratio;
        leave = k;
      }
    }
    if (leave < 0) break;  // cannot happen for a bounded phase-I problem

    in_basis[basis[leave]] = 0;
    in_basis[entering] = 1;
    basis[leave] = entering;
  }

  out.phase1_objective = objective;
  out.fractions.assign(n, 0.0);
  if (!feasible) return out;

  for (int k = 0; k < M; ++k) {
    if (basis[k] < static_cast<std::size_t>(M)) continue;
    double v = xb[k];
    if (v < 0.0) {
      if (v < -kClampTol) return out;
      v = 0.0;
    }
    out.fractions[basis[k] - M] = v;
  }
  for (int r = 0; r < M; ++r) {
    double s = -b[r];
    for (std::size_t j = 0; j < n; ++j) s += sys.matrix[j * M + r] * out.fractions[j];
    if (std::abs(s) > kFeasibilityTol) return out;
  }
  out.feasible = true;
  return out;
}

}  // namespace

MomentSystem assemble_offsets(std::span<const Vec2> offsets, double h, int max_degree) {
  MomentSystem sys = make_system(offsets.size(), max_degree);
  const double inv_h = 1.0 / h;
  for (std::size_t j = 0; j < offsets.size(); ++j) {
    fill_column(sys.matrix.data() + j * sys.rows, offsets[j], inv_h, sys.rows);
  }
  return sys;
}

MomentSystem assemble(const NeighborhoodView& view, double h, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("order must be 1 or 2");
  MomentSystem sys = make_system(view.members.size(), order + 1);
  const double inv_h = 1.0 / h;
  for (std::size_t j = 0; j < view.members.size(); ++j) {
    fill_column(sys.matrix.data() + j * sys.rows, view.members[j].offset, inv_h, sys.rows);
  }
  return sys;
}

NonnegativeSolution solve_nonnegative(const MomentSystem& sys) {
  switch (sys.rows) {
    case 5:
      return phase_one<5>(sys);
    case 9:
      return phase_one<9>(sys);
    case 14:
      return phase_one<14>(sys);
    default:
      throw std::invalid_argument("solve_nonnegative: unsupported row count " +
                                  std::to_string(sys.rows));
  }
}

Stencil make_stencil(const NeighborhoodView& view, std::span<const double> normalized, double h) {
  Stencil s;
  s.center = view.center;
  const double inv_h2 = 1.0 / (h * h);
  double sum = 0.0;
  for (std::size_t j = 0; j < view.members.size(); ++j) {
    if (normalized[j] > 0.0) {
      const double f = normalized[j] * inv_h2;
      s.neighbors.push_back(view.members[j].index);
      s.weights.push_back(f);
      sum += f;
    }
  }
  s.diagonal = -sum;
  return s;
}

StencilOutcome compute_stencil(const SpatialIndex& index, ParticleId i,
                               const StencilOptions& options) {
  const double h = index.params().h;
  const NeighborhoodView full = index.neighborhood(i);
  StencilOutcome out;
  if (options.try_small) {
    const NeighborhoodView small = small_neighborhood(full);
    if (!small.members.empty()) {
      const auto sol = solve_nonnegative(assemble(small, h, options.order));
      if (sol.feasible) {
        out.stencil = make_stencil(small, sol.fractions, h);
        out.path = StencilPath::small;
        return out;
      }
    }
    out.small_failed = true;
  }
  if (!full.members.empty()) {
    const auto sol = solve_nonnegative(assemble(full, h, options.order));
    if (sol.feasible) {
      out.stencil = make_stencil(full, sol.fractions, h);
      out.path = StencilPath::full;
      return out;
    }
  }
  out.stencil.center = i;
  out.path = StencilPath::failed;
  return out;
}

StencilCheck check_stencil(const Stencil& stencil, std::span<const Vec2> positions, double h,
                           int order) {
  StencilCheck c;
  const int rows = moment_rows(order + 1);
  std::array<double, kMaxMomentRows> moments{};
  const Vec2 xi = positions[stencil.center];
  double sum = 0.0;
  c.min_weight = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < stencil.neighbors.size(); ++k) {
    const double f = stencil.weights[k];
    c.min_weight = std::min(c.min_weight, f);
    sum += f;
    std::array<double, kMaxMomentRows> col{};
    fill_column(col.data(), positions[stencil.neighbors[k]] - xi, 1.0 / h, rows);
    for (int a = 0; a < rows; ++a) moments[a] += f * h * h * col[a];
  }
  for (int a = 0; a < rows; ++a) {
    const double target = (a == 2 || a == 4) ? 2.0 : 0.0;
    c.max_moment_residual = std::max(c.max_moment_residual, std::abs(moments[a] - target));
  }
  c.weight_sum = sum;
  c.diagonal_exact = stencil.diagonal == -sum;
  return c;
}

}  // namespace vrm
