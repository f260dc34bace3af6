#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vrm/config.hpp"
#include "vrm/diagnostics.hpp"
#include "vrm/diffusion.hpp"
#include "vrm/particle_cloud.hpp"

namespace vrm {

enum class Mode { heat, navier_stokes };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

enum class StepLimit { viscous, cfl, t_end };

std::string_view to_string(StepLimit limit);

struct StepPlan {
  double dt = 0.0;
  double dt_visc = 0.0;
  double dt_cfl = 0.0;
  StepLimit limited_by = StepLimit::viscous;
};

// dt = min(dt_safety (rh)^2/(4 nu), cfl_safety min_i h/|u_i|, t_end - t).
// Heat mode has no CFL term and additionally honours the a-posteriori bound
// of `op` when given. NS mode passes the velocities at the step start.
StepPlan plan_step(const SimulationConfig& config, Mode mode, const DiffusionOperator* op,
                   std::span<const Vec2> velocities, double t);

struct StepContext {
  std::size_t step = 0;
  double t = 0.0;
};

// Forward Euler on the heat equation: Gamma <- Gamma + dt * nu F^T Gamma.
// Positions do not move, so stencils may be carried over between steps in
// `cache`. The returned record describes the state after the step.
DiagnosticsRecord euler_heat_step(ParticleCloud& cloud, const SimulationConfig& config,
                                  const StepContext& ctx, StencilCache* cache = nullptr);

// Classical RK4 on the coupled convection-diffusion system. Insertion and the
// excluded set are fixed at the step start; stencils are rebuilt per stage.
DiagnosticsRecord rk4_ns_step(ParticleCloud& cloud, const SimulationConfig& config,
                              const StepContext& ctx);

using StepObserver = std::function<void(const DiagnosticsRecord&, const ParticleCloud&)>;

struct RunResult {
  ParticleCloud cloud;
  std::vector<DiagnosticsRecord> records;  // records[0] is the initial state
};

// Starts from `initial` (a point vortex of strength config.gamma when absent)
// and integrates to config.t_end. The observer sees every record, including
// the initial one.
RunResult run(const SimulationConfig& config, Mode mode, const StepObserver& observer = {},
              std::optional<ParticleCloud> initial = std::nullopt);

// Velocities at the particle positions with the configured backend.
std::vector<Vec2> particle_velocities(const ParticleCloud& cloud, const SimulationConfig& config);

}  // namespace vrm
