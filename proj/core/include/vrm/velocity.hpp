#pragma once

#include <span>
#include <vector>

#include "vrm/config.hpp"
#include "vrm/particle_cloud.hpp"
#include "vrm/vec2.hpp"

namespace vrm {

// Singular Biot-Savart kernel, K(x) = (y, -x) / (2 pi |x|^2), K(0) = 0.
// With this sign the velocity at x_i is sum_j K(x_j - x_i) Gamma_j.
Vec2 kernel(Vec2 x);

// Gaussian-smoothed kernel, K_eps(x) = (-y, x) / (2 pi |x|^2) (1 - exp(-|x/eps|^2)).
// The velocity at x is sum_j K_eps(x - x_j) Gamma_j. Returns (0,0) for
// |x| < 1e-12 eps.
Vec2 kernel_smoothed(Vec2 x, double eps);

// Exact pairwise summation; the oracle for every other backend.
std::vector<Vec2> velocity_direct(std::span<const Vec2> sources, std::span<const double> gamma,
                                  std::span<const Vec2> targets, double eps, int threads = 1);

struct TreecodeParams {
  double theta = 0.5;
  int order = 16;
  std::size_t leaf_size = 32;
  // Cells closer than this multiple of eps are never approximated; beyond
  // it the Gaussian factor equals one in double precision.
  double near_field_factor = 6.0;
};

// Barnes-Hut style quadtree with p-term complex multipole expansions of the
// singular far field. A cell is accepted when rho <= theta * d and it lies
// entirely outside the smoothing near field.
std::vector<Vec2> velocity_treecode(std::span<const Vec2> sources, std::span<const double> gamma,
                                    std::span<const Vec2> targets, double eps,
                                    const TreecodeParams& params, int threads = 1);

// Velocity induced by the cloud at `targets` using the configured backend.
std::vector<Vec2> induced_velocity(const ParticleCloud& cloud, std::span<const Vec2> targets,
                                   const SimulationConfig& config);

}  // namespace vrm
