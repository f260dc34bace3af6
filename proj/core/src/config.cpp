#include "vrm/config.hpp"

#include <cmath>

#include <omp.h>

namespace vrm {

std::string_view to_string(VelocityBackend backend) {
  switch (backend) {
    case VelocityBackend::direct:
      return "direct";
    case VelocityBackend::treecode:
      return "treecode";
  }
  return "unknown";
}

VelocityBackend parse_velocity_backend(std::string_view text) {
  if (text == "direct") return VelocityBackend::direct;
  if (text == "treecode") return VelocityBackend::treecode;
  throw ConfigError("unknown velocity backend '" + std::string(text) + "'");
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void SimulationConfig::validate() const {
  require(std::isfinite(h) && h > 0.0, "h must be positive");
  require(std::isfinite(r) && r > 0.0, "r must be positive");
  require(std::isfinite(R) && R > r, "R must exceed r");
  require(order == 1 || order == 2, "order must be 1 or 2");
  require(std::isfinite(nu) && nu >= 0.0, "nu must be non-negative");
  require(std::isfinite(gamma), "gamma must be finite");
  require(std::isfinite(c_diff) && c_diff >= 0.0, "c_diff must be non-negative");
  require(std::isfinite(eps_factor) && eps_factor > 0.0, "eps_factor must be positive");
  require(dt_safety > 0.0 && dt_safety <= 1.0, "dt_safety must lie in (0, 1]");
  require(cfl_safety > 0.0 && cfl_safety <= 1.0, "cfl_safety must lie in (0, 1]");
  require(std::isfinite(t_end) && t_end >= 0.0, "t_end must be non-negative");
  require(theta > 0.0 && theta < 1.0, "theta must lie in (0, 1)");
  require(order_p >= 4 && order_p <= 64, "order_p must lie in [4, 64]");
  require(std::isfinite(frame_angle), "frame_angle must be finite");
  require(threads >= 0, "threads must be non-negative");
  require(snapshot_every >= 0, "snapshot_every must be non-negative");
  require(energy_every >= 0, "energy_every must be non-negative");
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  return omp_get_max_threads();
}

}  // namespace vrm
