#pragma once

#include <cstddef>
#include <limits>
#include <span>

#include "vrm/config.hpp"
#include "vrm/particle_cloud.hpp"
#include "vrm/vec2.hpp"

namespace vrm {

// Moments of vorticity: I0 = sum Gamma_i, I1 = sum Gamma_i x_i,
// I2 = sum Gamma_i |x_i|^2 (about the origin).
struct Invariants {
  double i0 = 0.0;
  Vec2 i1;
  double i2 = 0.0;
};

Invariants invariants(const ParticleCloud& cloud);

// E = sum Gamma_i (y_i u_i - x_i v_i) from velocities at the particle positions.
double energy(std::span<const Vec2> positions, std::span<const double> gamma,
              std::span<const Vec2> velocities);
// Same, with smoothed-kernel velocities from direct summation.
double energy(const ParticleCloud& cloud, double eps, int threads = 1);

// Closed-form Lamb-Oseen vortex started from Gamma * delta(x) at t = 0.
// Both throw std::domain_error for t <= 0.
double lamb_oseen_omega(double t, Vec2 x, double gamma, double nu);
Vec2 lamb_oseen_velocity(double t, Vec2 x, double gamma, double nu);

// Midpoint-rule quadrature grid over [-half_width, half_width]^2.
struct ErrorGrid {
  double half_width = 1.5;
  double spacing = 0.01;
};

// ||u - u_h||_L2(A) / ||u||_L2(A), u_h from the smoothed kernel by direct summation.
double velocity_error_l2(const ParticleCloud& cloud, double t, const SimulationConfig& config,
                         const ErrorGrid& grid = {});

struct WallTimes {
  double stencil = 0.0;
  double velocity = 0.0;
  double total = 0.0;
};

struct DiagnosticsRecord {
  std::size_t step = 0;
  double t = 0.0;
  double dt = 0.0;
  std::size_t n_particles = 0;
  Invariants inv;
  double energy = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_diffused = 0;
  std::size_t n_excluded = 0;
  std::size_t n_inserted = 0;
  std::size_t n_small_fallback = 0;
  std::size_t n_fallback_excluded = 0;
  WallTimes wall;
};

}  // namespace vrm
