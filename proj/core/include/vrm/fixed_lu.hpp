#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <utility>

namespace vrm {

inline constexpr double kSingularPivot = 1e-13;

// LU factorisation with partial pivoting for a statically sized M x M
// matrix (row-major). All loops have compile-time trip counts.
template <int M>
class FixedLu {
 public:
  using Matrix = std::array<double, M * M>;
  using Vector = std::array<double, M>;

  // Returns false when a pivot falls below `pivot_tol` in magnitude.
  bool factor(const Matrix& a, double pivot_tol = kSingularPivot) {
    lu_ = a;
    for (int i = 0; i < M; ++i) perm_[i] = i;
    for (int k = 0; k < M; ++k) {
      int p = k;
      double best = std::abs(lu_[k * M + k]);
      for (int i = k + 1; i < M; ++i) {
        const double v = std::abs(lu_[i * M + k]);
        if (v > best) {
          best = v;
          p = i;
        }
      }
      if (!(best >= pivot_tol)) return false;
      if (p != k) {
        for (int j = 0; j < M; ++j) std::swap(lu_[k * M + j], lu_[p * M + j]);
        std::swap(perm_[k], perm_[p]);
      }
      const double inv = 1.0 / lu_[k * M + k];
      for (int i = k + 1; i < M; ++i) {
        const double l = lu_[i * M + k] * inv;
        lu_[i * M + k] = l;
        for (int j = k + 1; j < M; ++j) lu_[i * M + j] -= l * lu_[k * M + j];
      }
    }
    return true;
  }

  // Solves A x = b.
  Vector solve(const Vector& b) const {
    Vector x;
    for (int i = 0; i < M; ++i) x[i] = b[perm_[i]];
    for (int i = 1; i < M; ++i) {
      double s = x[i];
      for (int j = 0; j < i; ++j) s -= lu_[i * M + j] * x[j];
      x[i] = s;
    }
    for (int i = M - 1; i >= 0; --i) {
      double s = x[i];
      for (int j = i + 1; j < M; ++j) s -= lu_[i * M + j] * x[j];
      x[i] = s / lu_[i * M + i];
    }
    return x;
  }

  // Solves A^T y = c.
  Vector solve_transposed(const Vector& c) const {
    Vector z = c;
    for (int i = 0; i < M; ++i) {
      double s = z[i];
      for (int j = 0; j < i; ++j) s -= lu_[j * M + i] * z[j];
      z[i] = s / lu_[i * M + i];
    }
    for (int i = M - 2; i >= 0; --i) {
      double s = z[i];
      for (int j = i + 1; j < M; ++j) s -= lu_[j * M + i] * z[j];
      z[i] = s;
    }
    Vector y;
    for (int i = 0; i < M; ++i) y[perm_[i]] = z[i];
    return y;
  }

 private:
  Matrix lu_{};
  std::array<int, M> perm_{};
};

// One-shot solve; std::nullopt when the matrix is singular to pivot tolerance.
template <int M>
std::optional<std::array<double, M>> lu_solve(const std::array<double, M * M>& a,
                                              const std::array<double, M>& rhs) {
  FixedLu<M> lu;
  if (!lu.factor(a)) return std::nullopt;
  return lu.solve(rhs);
}

}  // namespace vrm
