#include "vrm/velocity.hpp"

#include <cmath>
#include <numbers>

namespace vrm {

namespace {
constexpr double kInvTwoPi = 0.5 / std::numbers::pi;
}

Vec2 kernel(Vec2 x) {
  const double r2 = norm2(x);
  if (r2 == 0.0) return {0.0, 0.0};
  const double s = kInvTwoPi / r2;
  return {s * x.y, -s * x.x};
}

Vec2 kernel_smoothed(Vec2 x, double eps) {
  const double r2 = norm2(x);
  const double e2 = eps * eps;
  if (r2 < 1e-24 * e2) return {0.0, 0.0};
  // Beyond |x| = sqrt(40) eps the Gaussian factor rounds to exactly one.
  const double q = r2 / e2;
  const double s = (q > 40.0 ? 1.0 : -std::expm1(-q)) * kInvTwoPi / r2;
  return {-s * x.y, s * x.x};
}

std::vector<Vec2> velocity_direct(std::span<const Vec2> sources, std::span<const double> gamma,
                                  std::span<const Vec2> targets, double eps, int threads) {
  std::vector<Vec2> out(targets.size());
  const auto nt = static_cast<std::ptrdiff_t>(targets.size());
  const std::size_t ns = sources.size();
#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::ptrdiff_t t = 0; t < nt; ++t) {
    const Vec2 x = targets[t];
    double ux = 0.0;
    double uy = 0.0;
    for (std::size_t j = 0; j < ns; ++j) {
      if (gamma[j] == 0.0) continue;
      const Vec2 k = kernel_smoothed(x - sources[j], eps);
      ux += k.x * gamma[j];
      uy += k.y * gamma[j];
    }
    out[t] = {ux, uy};
  }
  return out;
}

std::vector<Vec2> induced_velocity(const ParticleCloud& cloud, std::span<const Vec2> targets,
                                   const SimulationConfig& config) {
  const int threads = resolve_threads(config.threads);
  if (config.velocity == VelocityBackend::direct) {
    return velocity_direct(cloud.positions(), cloud.circulations(), targets, config.eps(), threads);
  }
  TreecodeParams params;
  params.theta = config.theta;
  params.order = config.order_p;
  return velocity_treecode(cloud.positions(), cloud.circulations(), targets, config.eps(), params,
                           threads);
}

}  // namespace vrm
