#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vrm/config.hpp"
#include "vrm/diagnostics.hpp"
#include "vrm/integrator.hpp"
#include "vrm/particle_cloud.hpp"

namespace vrm::harness {

namespace fs = std::filesystem;

struct RunSummary {
  Mode mode = Mode::heat;
  double h = 0.0;
  double t_final = 0.0;
  std::size_t steps = 0;
  std::size_t n_final = 0;
  std::optional<double> e_u;  // absent when t_final == 0
  Invariants initial;
  Invariants final;
  double i0_max_rel_drift = 0.0;    // max_t |I0(t) - I0(0)| / |I0(0)|
  double i1_max_drift = 0.0;        // max_t |I1(t) - I1(0)|
  double i2_error = 0.0;            // |I2(T) - I2(0) - 4 nu I0(0) T|
  double i2_rel_error = 0.0;        // i2_error / |4 nu I0(0) T|
  double energy_final = 0.0;
  std::size_t total_inserted = 0;
  std::size_t total_small_fallback = 0;
  std::size_t total_fallback_excluded = 0;
  double wall_stencil = 0.0;
  double wall_velocity = 0.0;
  double wall_total = 0.0;
};

struct RunArtifacts {
  fs::path diagnostics;
  fs::path final_snapshot;
  std::vector<fs::path> snapshots;
  fs::path summary;
  fs::path manifest;
};

struct RunOptions {
  bool compute_error = true;
  std::optional<fs::path> stencil_dump;
};

// Runs the simulation and writes diagnostics.csv, snapshots, final.csv,
// summary.json and manifest.json into `out_dir`.
RunSummary run_to_directory(const SimulationConfig& config, Mode mode, const fs::path& out_dir,
                            const RunOptions& options = {}, ParticleCloud* final_cloud = nullptr,
                            RunArtifacts* artifacts = nullptr);

// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct ConvergenceRow {
  double h = 0.0;
  RunSummary summary;
};

struct ConvergenceResult {
  Mode mode = Mode::heat;
  std::vector<ConvergenceRow> rows;
  double error_slope = 0.0;
  double i2_error_slope = 0.0;
  std::vector<double> particle_ratios;  // N(h_{k+1}) / N(h_k)
};

// One run per h into out_dir/h_<h>; writes convergence.csv and summary.json.
ConvergenceResult run_convergence(const SimulationConfig& base, Mode mode,
                                  std::span<const double> h_values, const fs::path& out_dir);

struct BenchTiming {
  std::string phase;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  int repeats = 0;
};

struct BenchCase {
  double h = 0.0;
  std::size_t n_particles = 0;
  std::size_t n_diffused = 0;
  std::size_t full_members = 0;  // total full-neighbourhood members over diffused particles
  std::vector<BenchTiming> timings;

  const BenchTiming* find(std::string_view phase) const;
};

// Times the operator build with small neighbourhoods, with full ones only,
// and one velocity evaluation per backend on a frozen cloud.
BenchCase bench_cloud(const SimulationConfig& config, const ParticleCloud& cloud, int repeats);

struct BenchResult {
  std::vector<BenchCase> cases;
  std::optional<double> small_scaling_exponent;  // fit of stencil time vs N
};

// Produces frozen clouds with heat runs (or uses `cloud` for a single h) and
// writes bench.csv and summary.json.
BenchResult run_bench(const SimulationConfig& base, std::span<const double> h_values, int repeats,
                      const fs::path& out_dir, std::optional<ParticleCloud> cloud = std::nullopt);

struct RotationResult {
  double angle_deg = 0.0;
  double e_reference = 0.0;
  double e_rotated = 0.0;
  double relative_difference = 0.0;
};

// Heat run in the axis-aligned frame and in a frame rotated by angle_deg.
RotationResult run_rotation_check(const SimulationConfig& base, double angle_deg,
                                  const fs::path& out_dir);

}  // namespace vrm::harness
