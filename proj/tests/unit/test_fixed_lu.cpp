#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "vrm/fixed_lu.hpp"

using namespace vrm;

TEST_CASE("identity returns the right-hand side") {
  std::array<double, 25> a{};
  for (int i = 0; i < 5; ++i) a[i * 5 + i] = 1.0;
  const std::array<double, 5> b{1.5, -2.0, 0.0, 3.25, 1e-8};
  const auto x = lu_solve<5>(a, b);
  REQUIRE(x);
  CHECK(*x == b);
}

TEST_CASE("permutation matrix permutes the right-hand side") {
  // Row i has its one in column p[i], so x[p[i]] = b[i].
  const std::array<int, 5> p{3, 0, 4, 1, 2};
  std::array<double, 25> a{};
  for (int i = 0; i < 5; ++i) a[i * 5 + p[i]] = 1.0;
  const std::array<double, 5> b{1, 2, 3, 4, 5};
  const auto x = lu_solve<5>(a, b);
  REQUIRE(x);
  for (int i = 0; i < 5; ++i) CHECK((*x)[p[i]] == b[i]);
}

TEST_CASE("singular matrix is reported") {
  std::array<double, 9> a{1, 2, 3, 2, 4, 6, 0, 1, 1};
  CHECK_FALSE(lu_solve<3>(a, {1, 2, 3}));
}

template <int M>
void compare_with_oracle(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, M * M> a;
    for (auto& v : a) v = u(rng);
    // Diagonal shift keeps the instances well conditioned.
    for (int i = 0; i < M; ++i) a[i * M + i] += (trial % 2 == 0 ? 1.0 : -1.0) * M;
    std::array<double, M> b;
    for (auto& v : b) v = u(rng);

    FixedLu<M> lu;
    REQUIRE(lu.factor(a));
    const auto x = lu.solve(b);
    const auto y = lu.solve_transposed(b);

    std::vector<double> av(a.begin(), a.end());
    std::vector<double> at(M * M);
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) at[i * M + j] = a[j * M + i];
    }
    const auto xo = testing::gauss_jordan(av, {b.begin(), b.end()});
    const auto yo = testing::gauss_jordan(at, {b.begin(), b.end()});
    REQUIRE(xo);
    REQUIRE(yo);
    for (int i = 0; i < M; ++i) {
      CHECK(x[i] == doctest::Approx((*xo)[i]).epsilon(1e-12));
      CHECK(y[i] == doctest::Approx((*yo)[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("random well-conditioned systems match Gauss-Jordan") {
  compare_with_oracle<5>(1);
  compare_with_oracle<9>(2);
  compare_with_oracle<14>(3);
}
