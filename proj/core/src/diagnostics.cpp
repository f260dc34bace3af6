#include "vrm/diagnostics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "vrm/velocity.hpp"

namespace vrm {

Invariants invariants(const ParticleCloud& cloud) {
  CompensatedSum i0;
  CompensatedSum i1x;
  CompensatedSum i1y;
  CompensatedSum i2;
  const auto pos = cloud.positions();
  const auto gam = cloud.circulations();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    i0.add(gam[i]);
    i1x.add(gam[i] * pos[i].x);
    i1y.add(gam[i] * pos[i].y);
    i2.add(gam[i] * norm2(pos[i]));
  }
  return {i0.value(), {i1x.value(), i1y.value()}, i2.value()};
}

double energy(std::span<const Vec2> positions, std::span<const double> gamma,
              std::span<const Vec2> velocities) {
  CompensatedSum e;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    e.add(gamma[i] * (positions[i].y * velocities[i].x - positions[i].x * velocities[i].y));
  }
  return e.value();
}

double energy(const ParticleCloud& cloud, double eps, int threads) {
  const auto u = velocity_direct(cloud.positions(), cloud.circulations(), cloud.positions(), eps,
                                 threads);
  return energy(cloud.positions(), cloud.circulations(), u);
}

double lamb_oseen_omega(double t, Vec2 x, double gamma, double nu) {
  if (!(t > 0.0)) throw std::domain_error("lamb_oseen_omega: t must be positive");
  const double s = 4.0 * nu * t;
  return gamma / (std::numbers::pi * s) * std::exp(-norm2(x) / s);
}

Vec2 lamb_oseen_velocity(double t, Vec2 x, double gamma, double nu) {
  if (!(t > 0.0)) throw std::domain_error("lamb_oseen_velocity: t must be positive");
  const double r2 = norm2(x);
  if (r2 == 0.0) return {0.0, 0.0};
  // u = Gamma / (2 pi |x|) (1 - exp(-|x|^2 / 4 nu t)) phi_hat, phi_hat = (-y, x) / |x|
  const double s = -std::expm1(-r2 / (4.0 * nu * t)) * gamma / (2.0 * std::numbers::pi * r2);
  return {-s * x.y, s * x.x};
}

double velocity_error_l2(const ParticleCloud& cloud, double t, const SimulationConfig& config,
                         const ErrorGrid& grid) {
  const auto cells = static_cast<std::size_t>(std::llround(2.0 * grid.half_width / grid.spacing));
  std::vector<Vec2> points;
  points.reserve(cells * cells);
  for (std::size_t iy = 0; iy < cells; ++iy) {
    for (std::size_t ix = 0; ix < cells; ++ix) {
      points.push_back({-grid.half_width + (static_cast<double>(ix) + 0.5) * grid.spacing,
                        -grid.half_width + (static_cast<double>(iy) + 0.5) * grid.spacing});
    }
  }
  const auto uh = velocity_direct(cloud.positions(), cloud.circulations(), points, config.eps(),
                                  resolve_threads(config.threads));
  CompensatedSum err;
  CompensatedSum ref;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Vec2 u = lamb_oseen_velocity(t, points[k], config.gamma, config.nu);
    err.add(norm2(u - uh[k]));
    ref.add(norm2(u));
  }
  return std::sqrt(err.value() / ref.value());
}

}  // namespace vrm
