#pragma once

#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vrm {

enum class VelocityBackend { direct, treecode };

std::string_view to_string(VelocityBackend backend);
VelocityBackend parse_velocity_backend(std::string_view text);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// All scalar parameters of a run. Defaults reproduce the Lamb-Oseen setup
// at Re = 50: n = 1, Gamma = 2*pi, nu = 1/50, C_diff = 1, r = 1/2, R = 2,
// eps = 3h, safety factors 1/8, t_end = 1.
struct SimulationConfig {
  double h = 0.08;
  double r = 0.5;
  double R = 2.0;
  int order = 1;
  double nu = 1.0 / 50.0;
  double gamma = 2.0 * std::numbers::pi;
  double c_diff = 1.0;
  double eps_factor = 3.0;
  double dt_safety = 0.125;
  double cfl_safety = 0.125;
  double t_end = 1.0;

  VelocityBackend velocity = VelocityBackend::treecode;
  double theta = 0.5;
  int order_p = 16;

  // Angle of the reference frame in which the eight 45 degree segments are
  // laid out. Zero means axis aligned.
  double frame_angle = 0.0;

  // 0 selects all available cores.
  int threads = 0;
  int snapshot_every = 0;
  // Kinetic energy is O(N^2); compute it every k steps (and always on the
  // final step). 0 means final step only.
  int energy_every = 0;
  // Wall-clock columns of the diagnostics CSV are zero unless enabled, so
  // that identical runs produce identical files.
  bool record_timings = false;

  double eps() const { return eps_factor * h; }

  // Throws ConfigError describing the first violated constraint.
  void validate() const;
};

int resolve_threads(int requested);

}  // namespace vrm
