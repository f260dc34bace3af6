#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "vrm/diagnostics.hpp"

using namespace vrm;

namespace {

constexpr double kPi = std::numbers::pi;

// Lamb-Oseen vorticity sampled on a square lattice with exact cell weights
// Gamma_i = omega(x_i) * spacing^2.
ParticleCloud sampled_vortex(double t, double spacing, double half_width, double gamma, double nu) {
  std::vector<Vec2> x;
  std::vector<double> g;
  const int n = static_cast<int>(std::round(half_width / spacing));
  for (int i = -n; i <= n; ++i) {
    for (int j = -n; j <= n; ++j) {
      const Vec2 p{i * spacing, j * spacing};
      x.push_back(p);
      g.push_back(lamb_oseen_omega(t, p, gamma, nu) * spacing * spacing);
    }
  }
  return ParticleCloud(x, g);
}

// Relative L2 distance between the smoothed particle field and the exact field
// at time t_ref, on a midpoint grid. Written independently of the library.
double oracle_error(const ParticleCloud& cloud, double eps, double t_ref, double gamma, double nu,
                    double half_width, double spacing) {
  const int n = static_cast<int>(std::round(2 * half_width / spacing));
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) pts.push_back({-half_width + (i + 0.5) * spacing, -half_width + (j + 0.5) * spacing});
  }
  const auto uh = testing::naive_velocity(cloud.positions(), cloud.circulations(), pts, eps);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double r2 = norm2(pts[k]);
    const double mag = gamma / (2 * kPi * r2) * (1 - std::exp(-r2 / (4 * nu * t_ref)));
    const Vec2 u{-pts[k].y * mag, pts[k].x * mag};
    num += norm2(u - uh[k]);
    den += norm2(u);
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("invariants of simple clouds") {
  const auto single = invariants(init_point_vortex(2 * kPi));
  CHECK(single.i0 == 2 * kPi);
  CHECK(single.i1 == Vec2{0, 0});
  CHECK(single.i2 == 0.0);

  const ParticleCloud pair({{1, 0}, {-1, 0}}, {1.0, 1.0});
  const auto inv = invariants(pair);
  CHECK(inv.i0 == 2.0);
  CHECK(inv.i1 == Vec2{0, 0});
  CHECK(inv.i2 == 2.0);
}

TEST_CASE("invariants are linear in the circulations") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  std::vector<Vec2> x(100);
  std::vector<double> a(100);
  std::vector<double> b(100);
  std::vector<double> s(100);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = {nd(rng), nd(rng)};
    a[i] = nd(rng);
    b[i] = nd(rng);
    s[i] = a[i] + b[i];
  }
  const auto ia = invariants(ParticleCloud(x, a));
  const auto ib = invariants(ParticleCloud(x, b));
  const auto is = invariants(ParticleCloud(x, s));
  CHECK(is.i0 == doctest::Approx(ia.i0 + ib.i0).epsilon(1e-13));
  CHECK(is.i1.x == doctest::Approx(ia.i1.x + ib.i1.x).epsilon(1e-13));
  CHECK(is.i1.y == doctest::Approx(ia.i1.y + ib.i1.y).epsilon(1e-13));
  CHECK(is.i2 == doctest::Approx(ia.i2 + ib.i2).epsilon(1e-13));

  ParticleCloud padded(x, a);
  padded.append_empty({3, 3});
  const auto ip = invariants(padded);
  CHECK(ip.i0 == ia.i0);
  CHECK(ip.i1 == ia.i1);
  CHECK(ip.i2 == ia.i2);
}

TEST_CASE("energy") {
  CHECK(energy(init_point_vortex(2 * kPi), 0.1) == 0.0);

  const ParticleCloud pair({{0.3, 0.1}, {-0.3, 0.1}}, {1.0, 1.0});
  const ParticleCloud mirrored({{-0.3, 0.1}, {0.3, 0.1}}, {1.0, 1.0});
  const double e = energy(pair, 0.2);
  CHECK(std::isfinite(e));
  CHECK(energy(mirrored, 0.2) == doctest::Approx(e).epsilon(1e-15));

  std::mt19937_64 rng(6);
  std::normal_distribution<double> nd;
  std::vector<Vec2> x(200);
  std::vector<double> g(200);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = {nd(rng), nd(rng)};
    g[i] = nd(rng);
  }
  const ParticleCloud cloud(x, g);
  CHECK(energy(cloud, 0.1) == doctest::Approx(testing::naive_energy(x, g, 0.1)).epsilon(1e-13));
  CHECK(energy(cloud, 0.1, 1) == energy(cloud, 0.1, 4));
}

TEST_CASE("Lamb-Oseen closed form") {
  const double g = 2 * kPi;
  const double nu = 0.02;
  CHECK(lamb_oseen_omega(1.0, {0, 0}, g, nu) == doctest::Approx(25.0).epsilon(1e-15));
  const Vec2 u = lamb_oseen_velocity(1.0, {0.6, 0.8}, g, nu);
  CHECK(norm(u) == doctest::Approx(1 - std::exp(-12.5)).epsilon(1e-14));
  CHECK(norm(u) == doctest::Approx(0.99999627).epsilon(1e-8));
  CHECK(dot(u, Vec2{0.6, 0.8}) == doctest::Approx(0.0).scale(1.0));
  CHECK(u.y > 0);  // counter-clockwise for positive circulation
  CHECK_THROWS_AS(lamb_oseen_omega(0.0, {0, 0}, g, nu), std::domain_error);
  CHECK_THROWS_AS(lamb_oseen_velocity(-1.0, {1, 0}, g, nu), std::domain_error);
}

TEST_CASE("vorticity integrates to the enclosed circulation") {
  const double g = 2 * kPi;
  const double nu = 0.02;
  const double t = 1.0;
  const double radius = 1.5;
  const int nr = 2000;
  const int na = 64;
  double sum = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double r = (i + 0.5) * radius / nr;
    for (int k = 0; k < na; ++k) {
      const double a = (k + 0.5) * 2 * kPi / na;
      sum += lamb_oseen_omega(t, {r * std::cos(a), r * std::sin(a)}, g, nu) * r;
    }
  }
  sum *= (radius / nr) * (2 * kPi / na);
  CHECK(sum == doctest::Approx(g * (1 - std::exp(-radius * radius / (4 * nu * t)))).epsilon(1e-6));
}

TEST_CASE("velocity error of degenerate clouds") {
  SimulationConfig c;
  c.h = 0.16;
  const ParticleCloud empty({{0, 0}, {0.1, 0}}, {0.0, 0.0});
  CHECK(velocity_error_l2(empty, 1.0, c) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS(velocity_error_l2(empty, 0.0, c));
}

TEST_CASE("velocity error on a sampled vortex") {
  const double g = 2 * kPi;
  const double nu = 0.02;
  const double t = 1.0;
  const ParticleCloud cloud = sampled_vortex(t, 0.03, 1.5, g, nu);
  SimulationConfig c;
  c.gamma = g;
  c.nu = nu;
  c.h = 0.03;
  const ErrorGrid grid{1.5, 0.03};

  SUBCASE("agrees with an independent evaluation") {
    const double e = velocity_error_l2(cloud, t, c, grid);
    CHECK(e == doctest::Approx(oracle_error(cloud, c.eps(), t, g, nu, 1.5, 0.03)).epsilon(1e-10));
  }
  SUBCASE("smoothing acts like a time shift") {
    // Gaussian blobs on an exactly sampled Gaussian reproduce the exact field at
    // t + eps^2 / (4 nu) up to sampling and truncation error.
    const double shifted = oracle_error(cloud, c.eps(), t + c.eps() * c.eps() / (4 * nu), g, nu, 1.5, 0.03);
    const double e = velocity_error_l2(cloud, t, c, grid);
    CHECK(shifted < 0.1 * e);
  }
  SUBCASE("error scales with the square of the smoothing radius") {
    SimulationConfig half = c;
    half.eps_factor = c.eps_factor / 2;
    const double ratio = velocity_error_l2(cloud, t, c, grid) / velocity_error_l2(cloud, t, half, grid);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
  }
  SUBCASE("empty particles do not change the error") {
    ParticleCloud padded = cloud;
    padded.append_empty({0.011, 0.017});
    CHECK(velocity_error_l2(padded, t, c, grid) == velocity_error_l2(cloud, t, c, grid));
  }
}

TEST_CASE("quadrature resolution is adequate at the default spacing") {
  const double g = 2 * kPi;
  const double nu = 0.02;
  const ParticleCloud cloud = sampled_vortex(1.0, 0.08, 1.5, g, nu);
  SimulationConfig c;
  c.h = 0.16;
  const double coarse = velocity_error_l2(cloud, 1.0, c);
  const double fine = velocity_error_l2(cloud, 1.0, c, ErrorGrid{1.5, 0.005});
  CHECK(std::abs(coarse - fine) <= 0.01 * coarse);
}
