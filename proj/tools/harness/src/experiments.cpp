#include "vrm/harness/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "vrm/diffusion.hpp"
#include "vrm/harness/output.hpp"
#include "vrm/spatial_index.hpp"
#include "vrm/velocity.hpp"

namespace vrm::harness {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

json to_json(const SimulationConfig& c) {
  return {{"h", c.h},
          {"r", c.r},
          {"R", c.R},
          {"order", c.order},
          {"nu", c.nu},
          {"gamma", c.gamma},
          {"c_diff", c.c_diff},
          {"eps_factor", c.eps_factor},
          {"dt_safety", c.dt_safety},
          {"cfl_safety", c.cfl_safety},
          {"t_end", c.t_end},
          {"velocity", std::string(to_string(c.velocity))},
          {"theta", c.theta},
          {"order_p", c.order_p},
          {"frame_angle_deg", c.frame_angle * 180.0 / std::numbers::pi},
          {"threads", resolve_threads(c.threads)},
          {"snapshot_every", c.snapshot_every},
          {"energy_every", c.energy_every},
          {"record_timings", c.record_timings}};
}

json to_json(const Invariants& inv) {
  return {{"I0", inv.i0}, {"I1x", inv.i1.x}, {"I1y", inv.i1.y}, {"I2", inv.i2}};
}

json to_json(const RunSummary& s) {
  json j = {{"mode", std::string(to_string(s.mode))},
            {"h", s.h},
            {"t_final", s.t_final},
            {"steps", s.steps},
            {"n_final", s.n_final},
            {"initial_invariants", to_json(s.initial)},
            {"final_invariants", to_json(s.final)},
            {"i0_max_rel_drift", s.i0_max_rel_drift},
            {"i1_max_drift", s.i1_max_drift},
            {"i2_error", s.i2_error},
            {"i2_rel_error", s.i2_rel_error},
            {"energy_final", s.energy_final},
            {"total_inserted", s.total_inserted},
            {"total_small_fallback", s.total_small_fallback},
            {"total_fallback_excluded", s.total_fallback_excluded},
            {"wall_stencil_s", s.wall_stencil},
            {"wall_velocity_s", s.wall_velocity},
            {"wall_total_s", s.wall_total}};
  j["e_u"] = s.e_u ? json(*s.e_u) : json(nullptr);
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::string h_label(double h) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "h_%g", h);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <class F>
BenchTiming time_phase(std::string phase, int repeats, F&& f) {
  std::vector<double> samples;
  for (int k = 0; k < repeats; ++k) {
    const auto start = Clock::now();
    f();
    samples.push_back(std::chrono::duration<double>(Clock::now() - start).count());
  }
  BenchTiming t;
  t.phase = std::move(phase);
  t.repeats = repeats;
  t.median = median(samples);
  t.min = *std::min_element(samples.begin(), samples.end());
  t.max = *std::max_element(samples.begin(), samples.end());
  return t;
}

}  // namespace

RunSummary run_to_directory(const SimulationConfig& config, Mode mode, const fs::path& out_dir,
                            const RunOptions& options, ParticleCloud* final_cloud,
                            RunArtifacts* artifacts) {
  config.validate();
  fs::create_directories(out_dir);
  RunArtifacts art;
  art.diagnostics = out_dir / "diagnostics.csv";
  art.final_snapshot = out_dir / "final.csv";
  art.summary = out_dir / "summary.json";
  art.manifest = out_dir / "manifest.json";

  RunSummary s;
  s.mode = mode;
  s.h = config.h;
  DiagnosticsWriter writer(art.diagnostics, config.record_timings);

  const auto start = Clock::now();
  auto observer = [&](const DiagnosticsRecord& rec, const ParticleCloud& cloud) {
    writer.write(rec);
    if (rec.step == 0) s.initial = rec.inv;
    const double i0_ref = std::abs(s.initial.i0);
    if (i0_ref > 0.0) {
      s.i0_max_rel_drift = std::max(s.i0_max_rel_drift, std::abs(rec.inv.i0 - s.initial.i0) / i0_ref);
    }
    s.i1_max_drift = std::max(s.i1_max_drift, norm(rec.inv.i1 - s.initial.i1));
    s.total_inserted += rec.n_inserted;
    s.total_small_fallback += rec.n_small_fallback;
    s.total_fallback_excluded += rec.n_fallback_excluded;
    s.wall_stencil += rec.wall.stencil;
    s.wall_velocity += rec.wall.velocity;
    if (config.snapshot_every > 0 && rec.step > 0 &&
        rec.step % static_cast<std::size_t>(config.snapshot_every) == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshot_%06zu.csv", rec.step);
      write_snapshot(cloud, out_dir / name);
      art.snapshots.push_back(out_dir / name);
    }
  };
  RunResult result = run(config, mode, observer);
  writer.close();
  s.wall_total = std::chrono::duration<double>(Clock::now() - start).count();

  const DiagnosticsRecord& last = result.records.back();
  s.t_final = last.t;
  s.steps = last.step;
  s.n_final = last.n_particles;
  s.final = last.inv;
  s.energy_final = last.energy;
  s.i2_error = std::abs(s.final.i2 - s.initial.i2 - 4.0 * config.nu * s.initial.i0 * s.t_final);
  const double i2_scale = std::abs(4.0 * config.nu * s.initial.i0 * s.t_final);
  s.i2_rel_error = i2_scale > 0.0 ? s.i2_error / i2_scale : s.i2_error;
  write_snapshot(result.cloud, art.final_snapshot);

  if (options.compute_error && s.t_final > 0.0 && config.nu > 0.0) {
    s.e_u = velocity_error_l2(result.cloud, s.t_final, config);
  }

  if (options.stencil_dump) {
    ParticleCloud copy = result.cloud;
    SpatialIndex index(copy.positions(), {config.h, config.r, config.R, config.frame_angle});
    auto exclusion = select_excluded(copy.circulations(), config.h, config.order, config.c_diff);
    const std::size_t before = copy.size();
    insert_coverage(index, copy, exclusion.diffused);
    for (std::size_t j = before; j < copy.size(); ++j) exclusion.excluded.push_back(static_cast<ParticleId>(j));
    DiffusionSettings settings{config.order, config.nu, config.c_diff, true, resolve_threads(config.threads)};
    const DiffusionOperator op = build_operator(index, copy.circulations(), exclusion, settings);
    dump_stencils(*options.stencil_dump, op.rows);
  }

  json summary = to_json(s);
  summary["config"] = to_json(config);
  write_json(art.summary, summary);

  json manifest = {{"mode", std::string(to_string(mode))},
                   {"config", to_json(config)},
                   {"diagnostics", art.diagnostics.string()},
                   {"final_snapshot", art.final_snapshot.string()},
                   {"summary", art.summary.string()}};
  json snaps = json::array();
  for (const auto& p : art.snapshots) snaps.push_back(p.string());
  manifest["snapshots"] = snaps;
  if (options.stencil_dump) manifest["stencil_dump"] = options.stencil_dump->string();
  write_json(art.manifest, manifest);

  if (final_cloud != nullptr) *final_cloud = std::move(result.cloud);
  if (artifacts != nullptr) *artifacts = std::move(art);
  return s;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ConvergenceResult run_convergence(const SimulationConfig& base, Mode mode,
                                  std::span<const double> h_values, const fs::path& out_dir) {
  if (h_values.size() < 3) throw ConfigError("convergence needs at least three h values");
  fs::create_directories(out_dir);
  ConvergenceResult result;
  result.mode = mode;
  for (double h : h_values) {
    SimulationConfig c = base;
    c.h = h;
    result.rows.push_back({h, run_to_directory(c, mode, out_dir / h_label(h))});
  }

  std::vector<double> hs;
  std::vector<double> es;
  std::vector<double> i2s;
  for (const auto& row : result.rows) {
    hs.push_back(row.h);
    es.push_back(row.summary.e_u.value_or(std::nan("")));
    i2s.push_back(row.summary.i2_error);
  }
  result.error_slope = loglog_slope(hs, es);
  result.i2_error_slope = loglog_slope(hs, i2s);
  for (std::size_t k = 1; k < result.rows.size(); ++k) {
    result.particle_ratios.push_back(static_cast<double>(result.rows[k].summary.n_final) /
                                     static_cast<double>(result.rows[k - 1].summary.n_final));
  }

  std::FILE* f = std::fopen((out_dir / "convergence.csv").c_str(), "w");
  if (f == nullptr) throw std::runtime_error("cannot write convergence.csv");
  std::fprintf(f, "h,e_u,N_final,i2_error,i0_max_rel_drift,i1_max_drift,small_fallbacks,fallback_excluded,wall_total\n");
  for (const auto& row : result.rows) {
    const auto& s = row.summary;
    std::fprintf(f, "%.17g,%.17g,%zu,%.17g,%.17g,%.17g,%zu,%zu,%.6g\n", row.h, s.e_u.value_or(std::nan("")),
                 s.n_final, s.i2_error, s.i0_max_rel_drift, s.i1_max_drift, s.total_small_fallback,
                 s.total_fallback_excluded, s.wall_total);
  }
  std::fclose(f);

  json runs = json::array();
  for (const auto& row : result.rows) runs.push_back(to_json(row.summary));
  write_json(out_dir / "summary.json", {{"mode", std::string(to_string(mode))},
                                        {"h_values", hs},
                                        {"error_slope", result.error_slope},
                                        {"i2_error_slope", result.i2_error_slope},
                                        {"particle_ratios", result.particle_ratios},
                                        {"runs", runs},
                                        {"config", to_json(base)}});
  return result;
}

const BenchTiming* BenchCase::find(std::string_view phase) const {
  for (const auto& t : timings) {
    if (t.phase == phase) return &t;
  }
  return nullptr;
}

BenchCase bench_cloud(const SimulationConfig& config, const ParticleCloud& frozen, int repeats) {
  if (repeats < 1) throw ConfigError("repeats must be positive");
  ParticleCloud cloud = frozen;
  SpatialIndex index(cloud.positions(), {config.h, config.r, config.R, config.frame_angle});
  auto exclusion = select_excluded(cloud.circulations(), config.h, config.order, config.c_diff);
  const std::size_t before = cloud.size();
  insert_coverage(index, cloud, exclusion.diffused);
  for (std::size_t j = before; j < cloud.size(); ++j) exclusion.excluded.push_back(static_cast<ParticleId>(j));

  BenchCase bc;
  bc.h = config.h;
  bc.n_particles = cloud.size();
  bc.n_diffused = exclusion.diffused.size();
  for (ParticleId i : exclusion.diffused) bc.full_members += index.neighborhood(i).members.size();

  const int threads = resolve_threads(config.threads);
  DiffusionSettings small{config.order, config.nu, config.c_diff, true, threads};
  DiffusionSettings full = small;
  full.try_small = false;
  // Full-only builds may legitimately fail where the small path succeeds and
  // vice versa; the timing is what matters here.
  small.fallback_budget_factor = full.fallback_budget_factor = std::numeric_limits<double>::infinity();

  bc.timings.push_back(time_phase("stencil_small", repeats, [&] {
    const auto op = build_operator(index, cloud.circulations(), exclusion, small);
    if (op.rows.empty() && !exclusion.diffused.empty()) throw std::runtime_error("empty operator");
  }));
  bc.timings.push_back(time_phase("stencil_full", repeats, [&] {
    const auto op = build_operator(index, cloud.circulations(), exclusion, full);
    if (op.rows.empty() && !exclusion.diffused.empty()) throw std::runtime_error("empty operator");
  }));
  bc.timings.push_back(time_phase("velocity_direct", repeats, [&] {
    velocity_direct(cloud.positions(), cloud.circulations(), cloud.positions(), config.eps(), threads);
  }));
  TreecodeParams tp;
  tp.theta = config.theta;
  tp.order = config.order_p;
  bc.timings.push_back(time_phase("velocity_treecode", repeats, [&] {
    velocity_treecode(cloud.positions(), cloud.circulations(), cloud.positions(), config.eps(), tp, threads);
  }));
  return bc;
}

BenchResult run_bench(const SimulationConfig& base, std::span<const double> h_values, int repeats,
                      const fs::path& out_dir, std::optional<ParticleCloud> cloud) {
  if (h_values.empty()) throw ConfigError("bench needs at least one h value");
  if (cloud && h_values.size() != 1) throw ConfigError("a frozen cloud fixes a single h");
  fs::create_directories(out_dir);
  BenchResult result;
  for (double h : h_values) {
    SimulationConfig c = base;
    c.h = h;
    ParticleCloud frozen;
    if (cloud) {
      frozen = *cloud;
    } else {
      RunOptions opts;
      opts.compute_error = false;
      run_to_directory(c, Mode::heat, out_dir / ("cloud_" + h_label(h)), opts, &frozen);
    }
    result.cases.push_back(bench_cloud(c, frozen, repeats));
  }
  if (result.cases.size() >= 3) {
    std::vector<double> n;
    std::vector<double> t;
    for (const auto& bc : result.cases) {
      n.push_back(static_cast<double>(bc.n_particles));
      t.push_back(bc.find("stencil_small")->median);
    }
    result.small_scaling_exponent = loglog_slope(n, t);
  }

  std::FILE* f = std::fopen((out_dir / "bench.csv").c_str(), "w");
  if (f == nullptr) throw std::runtime_error("cannot write bench.csv");
  std::fprintf(f, "h,N,n_diffused,full_members,phase,median_s,min_s,max_s,repeats\n");
  json cases = json::array();
  for (const auto& bc : result.cases) {
    json jt = json::object();
    for (const auto& t : bc.timings) {
      std::fprintf(f, "%.17g,%zu,%zu,%zu,%s,%.6g,%.6g,%.6g,%d\n", bc.h, bc.n_particles, bc.n_diffused,
                   bc.full_members, t.phase.c_str(), t.median, t.min, t.max, t.repeats);
      jt[t.phase] = {{"median_s", t.median}, {"min_s", t.min}, {"max_s", t.max}};
    }
    const double ratio = bc.find("stencil_small")->median / bc.find("stencil_full")->median;
    cases.push_back({{"h", bc.h},
                     {"N", bc.n_particles},
                     {"n_diffused", bc.n_diffused},
                     {"small_over_full", ratio},
                     {"timings", jt}});
  }
  std::fclose(f);
  json summary = {{"cases", cases}, {"repeats", repeats}, {"config", to_json(base)}};
  summary["small_scaling_exponent"] =
      result.small_scaling_exponent ? json(*result.small_scaling_exponent) : json(nullptr);
  write_json(out_dir / "summary.json", summary);
  return result;
}

RotationResult run_rotation_check(const SimulationConfig& base, double angle_deg,
                                  const fs::path& out_dir) {
  RotationResult r;
  r.angle_deg = angle_deg;
  SimulationConfig c0 = base;
  c0.frame_angle = 0.0;
  SimulationConfig c1 = base;
  c1.frame_angle = angle_deg * std::numbers::pi / 180.0;
  const RunSummary s0 = run_to_directory(c0, Mode::heat, out_dir / "angle_0");
  char name[64];
  std::snprintf(name, sizeof name, "angle_%g", angle_deg);
  const RunSummary s1 = run_to_directory(c1, Mode::heat, out_dir / name);
  if (!s0.e_u || !s1.e_u) throw std::runtime_error("rotation check needs t_end > 0 and nu > 0");
  r.e_reference = *s0.e_u;
  r.e_rotated = *s1.e_u;
  r.relative_difference = std::abs(r.e_reference - r.e_rotated) / r.e_reference;
  write_json(out_dir / "summary.json", {{"angle_deg", angle_deg},
                                        {"e_u_reference", r.e_reference},
                                        {"e_u_rotated", r.e_rotated},
                                        {"relative_difference", r.relative_difference},
                                        {"config", to_json(base)}});
  return r;
}

}  // namespace vrm::harness
