#include "vrm/integrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "vrm/spatial_index.hpp"
#include "vrm/velocity.hpp"

namespace vrm {

std::string_view to_string(Mode mode) {
  return mode == Mode::heat ? "heat" : "ns";
}

Mode parse_mode(std::string_view text) {
  if (text == "heat") return Mode::heat;
  if (text == "ns") return Mode::navier_stokes;
  throw ConfigError("unknown mode '" + std::string(text) + "'");
}

std::string_view to_string(StepLimit limit) {
  switch (limit) {
    case StepLimit::viscous:
      return "viscous";
    case StepLimit::cfl:
      return "cfl";
    case StepLimit::t_end:
      return "t_end";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

NeighborhoodParams neighborhood_params(const SimulationConfig& c) {
  return {c.h, c.r, c.R, c.frame_angle};
}

DiffusionSettings diffusion_settings(const SimulationConfig& c) {
  DiffusionSettings s;
  s.order = c.order;
  s.nu = c.nu;
  s.c_diff = c.c_diff;
  s.threads = resolve_threads(c.threads);
  return s;
}

void fill_state(DiagnosticsRecord& rec, const ParticleCloud& cloud, const StepContext& ctx,
                double dt) {
  rec.step = ctx.step + 1;
  rec.dt = dt;
  rec.n_particles = cloud.size();
  rec.inv = invariants(cloud);
}

// Insertion pass shared by both integrators. New particles join the excluded set.
struct Prepared {
  ExclusionSet exclusion;
  std::size_t inserted = 0;
};

Prepared prepare(SpatialIndex& index, ParticleCloud& cloud, const SimulationConfig& config) {
  Prepared p;
  p.exclusion = select_excluded(cloud.circulations(), config.h, config.order, config.c_diff);
  const std::size_t before = cloud.size();
  p.inserted = insert_coverage(index, cloud, p.exclusion.diffused);
  for (std::size_t j = before; j < cloud.size(); ++j) {
    p.exclusion.excluded.push_back(static_cast<ParticleId>(j));
  }
  return p;
}

}  // namespace

StepPlan plan_step(const SimulationConfig& config, Mode mode, const DiffusionOperator* op,
                   std::span<const Vec2> velocities, double t) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  StepPlan plan;
  plan.dt_visc = config.dt_safety * stable_dt_apriori(config.r, config.h, config.nu);
  if (mode == Mode::heat && op != nullptr) {
    plan.dt_visc = std::min(plan.dt_visc, stable_dt_aposteriori(*op, config.nu));
  }
  plan.dt_cfl = inf;
  if (mode == Mode::navier_stokes) {
    double umax = 0.0;
    for (const Vec2& u : velocities) umax = std::max(umax, norm(u));
    if (umax > 0.0) plan.dt_cfl = config.cfl_safety * config.h / umax;
  }
  plan.dt = plan.dt_visc;
  plan.limited_by = StepLimit::viscous;
  if (plan.dt_cfl < plan.dt) {
    plan.dt = plan.dt_cfl;
    plan.limited_by = StepLimit::cfl;
  }
  const double remaining = config.t_end - t;
  if (remaining <= plan.dt) {
    plan.dt = remaining;
    plan.limited_by = StepLimit::t_end;
  }
  return plan;
}

DiagnosticsRecord euler_heat_step(ParticleCloud& cloud, const SimulationConfig& config,
                                  const StepContext& ctx, StencilCache* cache) {
  const auto start = Clock::now();
  DiagnosticsRecord rec;

  if (!(config.nu > 0.0)) {
    const StepPlan plan = plan_step(config, Mode::heat, nullptr, {}, ctx.t);
    fill_state(rec, cloud, ctx, plan.dt);
    rec.t = plan.limited_by == StepLimit::t_end ? config.t_end : ctx.t + plan.dt;
    rec.n_excluded = cloud.size();
    rec.wall.total = seconds_since(start);
    return rec;
  }

  SpatialIndex index(cloud.positions(), neighborhood_params(config));
  const Prepared prep = prepare(index, cloud, config);
  if (cache != nullptr) cache->invalidate_around(index, static_cast<ParticleId>(cloud.size() - prep.inserted));
  const DiffusionOperator op =
      build_operator(index, cloud.circulations(), prep.exclusion, diffusion_settings(config), cache);
  rec.wall.stencil = seconds_since(start);

  const StepPlan plan = plan_step(config, Mode::heat, &op, {}, ctx.t);
  const auto rates = apply(op, cloud.circulations(), resolve_threads(config.threads));
  auto gamma = cloud.circulations();
  for (std::size_t j = 0; j < gamma.size(); ++j) gamma[j] += plan.dt * rates[j];

  fill_state(rec, cloud, ctx, plan.dt);
  rec.t = plan.limited_by == StepLimit::t_end ? config.t_end : ctx.t + plan.dt;
  rec.n_diffused = op.counters.n_diffused;
  rec.n_excluded = op.counters.n_excluded;
  rec.n_inserted = prep.inserted;
  rec.n_small_fallback = op.counters.n_small_fallback;
  rec.n_fallback_excluded = op.counters.n_fallback_excluded;
  rec.wall.total = seconds_since(start);
  return rec;
}

DiagnosticsRecord rk4_ns_step(ParticleCloud& cloud, const SimulationConfig& config,
                              const StepContext& ctx) {
  const auto start = Clock::now();
  DiagnosticsRecord rec;
  const bool viscous = config.nu > 0.0;
  const int threads = resolve_threads(config.threads);
  const DiffusionSettings settings = diffusion_settings(config);
  const NeighborhoodParams nparams = neighborhood_params(config);

  Prepared prep;
  std::optional<SpatialIndex> index;
  if (viscous) {
    index.emplace(cloud.positions(), nparams);
    prep = prepare(*index, cloud, config);
  } else {
    prep.exclusion.excluded.resize(cloud.size());
    for (std::size_t j = 0; j < cloud.size(); ++j) prep.exclusion.excluded[j] = static_cast<ParticleId>(j);
  }
  rec.wall.stencil += seconds_since(start);

  const std::size_t n = cloud.size();
  const std::vector<Vec2> x0(cloud.positions().begin(), cloud.positions().end());
  const std::vector<double> g0(cloud.circulations().begin(), cloud.circulations().end());

  ParticleCloud stage(x0, g0);
  std::array<std::vector<Vec2>, 4> vel;
  std::array<std::vector<double>, 4> rate;

  auto evaluate = [&](int k, bool reuse_index) {
    auto t0 = Clock::now();
    if (viscous) {
      if (!reuse_index) index.emplace(stage.positions(), nparams);
      const DiffusionOperator op =
          build_operator(*index, stage.circulations(), prep.exclusion, settings);
      rate[k] = apply(op, stage.circulations(), threads);
      if (k == 0) {
        rec.n_diffused = op.counters.n_diffused;
        rec.n_excluded = op.counters.n_excluded;
      }
      rec.n_small_fallback += op.counters.n_small_fallback;
      rec.n_fallback_excluded += op.counters.n_fallback_excluded;
    } else {
      rate[k].assign(n, 0.0);
    }
    rec.wall.stencil += seconds_since(t0);
    t0 = Clock::now();
    vel[k] = particle_velocities(stage, config);
    rec.wall.velocity += seconds_since(t0);
  };

  evaluate(0, true);
  const StepPlan plan = plan_step(config, Mode::navier_stokes, nullptr, vel[0], ctx.t);
  const double dt = plan.dt;

  std::vector<Vec2> xs(n);
  std::vector<double> gs(n);
  const std::array<double, 3> c{0.5 * dt, 0.5 * dt, dt};
  for (int k = 1; k < 4; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      xs[j] = x0[j] + c[k - 1] * vel[k - 1][j];
      gs[j] = g0[j] + c[k - 1] * rate[k - 1][j];
    }
    stage.assign(xs, gs);
    evaluate(k, false);
  }

  for (std::size_t j = 0; j < n; ++j) {
    const Vec2 dx = vel[0][j] + 2.0 * vel[1][j] + 2.0 * vel[2][j] + vel[3][j];
    const double dg = rate[0][j] + 2.0 * rate[1][j] + 2.0 * rate[2][j] + rate[3][j];
    xs[j] = x0[j] + (dt / 6.0) * dx;
    gs[j] = g0[j] + (dt / 6.0) * dg;
  }
  cloud.assign(xs, gs);

  fill_state(rec, cloud, ctx, dt);
  rec.t = plan.limited_by == StepLimit::t_end ? config.t_end : ctx.t + dt;
  rec.n_inserted = prep.inserted;
  rec.wall.total = seconds_since(start);
  return rec;
}

std::vector<Vec2> particle_velocities(const ParticleCloud& cloud, const SimulationConfig& config) {
  return induced_velocity(cloud, cloud.positions(), config);
}

RunResult run(const SimulationConfig& config, Mode mode, const StepObserver& observer,
              std::optional<ParticleCloud> initial) {
  config.validate();
  RunResult result;
  result.cloud = initial ? std::move(*initial) : init_point_vortex(config.gamma);
  if (result.cloud.empty()) throw std::invalid_argument("cannot simulate an empty cloud");

  auto record_energy = [&](DiagnosticsRecord& rec, bool final_step) {
    const bool due = config.energy_every > 0 && rec.step % static_cast<std::size_t>(config.energy_every) == 0;
    if (!due && !final_step) return;
    const auto u = particle_velocities(result.cloud, config);
    rec.energy = energy(result.cloud.positions(), result.cloud.circulations(), u);
  };

  DiagnosticsRecord rec0;
  rec0.n_particles = result.cloud.size();
  rec0.inv = invariants(result.cloud);
  const bool done_at_start = config.t_end <= 0.0;
  record_energy(rec0, done_at_start);
  result.records.push_back(rec0);
  if (observer) observer(rec0, result.cloud);

  double t = 0.0;
  std::size_t step = 0;
  const double stop_tol = 1e-9 * config.t_end;
  StencilCache cache;
  while (config.t_end - t > stop_tol) {
    const StepContext ctx{step, t};
    DiagnosticsRecord rec = mode == Mode::heat ? euler_heat_step(result.cloud, config, ctx, &cache)
                                               : rk4_ns_step(result.cloud, config, ctx);
    t = rec.t;
    ++step;
    record_energy(rec, !(config.t_end - t > stop_tol));
    result.records.push_back(rec);
    if (observer) observer(rec, result.cloud);
  }
  return result;
}

}  // namespace vrm
