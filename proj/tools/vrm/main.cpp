#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vrm/config.hpp"
#include "vrm/harness/config_file.hpp"
#include "vrm/harness/experiments.hpp"
#include "vrm/integrator.hpp"
#include "vrm/particle_cloud.hpp"

namespace fs = std::filesystem;
using namespace vrm;
using namespace vrm::harness;

namespace {

// Simulation parameters shared by every subcommand. Values are kept as text
// and applied after the config file so that flags win.
struct SettingFlags {
  std::map<std::string, std::string> values;
  std::string config_file;
  std::string out_dir = "vrm_out";
  bool record_timings = false;

  void attach(CLI::App* cmd) {
    static const char* const kKeys[][2] = {
        {"h", "Initial particle spacing"},
        {"nu", "Kinematic viscosity"},
        {"gamma", "Circulation of the initial point vortex"},
        {"order", "Consistency order (1 or 2)"},
        {"c-diff", "Exclusion budget constant (0 disables exclusions)"},
        {"r", "Inner neighbourhood radius in units of h"},
        {"R", "Outer neighbourhood radius in units of h"},
        {"eps-factor", "Smoothing radius in units of h"},
        {"t-end", "Final time"},
        {"dt-safety", "Safety factor on the viscous step bound"},
        {"cfl-safety", "Safety factor on the convective step bound"},
        {"velocity", "Velocity backend: direct or treecode"},
        {"theta", "Treecode opening angle"},
        {"order-p", "Treecode expansion order"},
        {"threads", "Worker threads (0 = all cores)"},
        {"snapshot-every", "Write a snapshot every K steps (0 = off)"},
        {"energy-every", "Compute the energy every K steps (0 = final step only)"},
        {"frame-angle", "Rotation of the segment frame in degrees"},
    };
    for (const auto& [key, help] : kKeys) {
      cmd->add_option_function<std::string>(
          std::string("--") + key, [this, k = std::string(key)](const std::string& v) { values[k] = v; },
          help);
    }
    cmd->add_flag("--record-timings", record_timings, "Write wall-clock columns to the diagnostics CSV");
    cmd->add_option("--config", config_file, "Line-based key = value parameter file");
    cmd->add_option("--out", out_dir, "Output directory");
  }

  SimulationConfig resolve() const {
    SimulationConfig config;
    if (!config_file.empty()) load_config_file(config_file, config);
    for (const auto& [key, value] : values) apply_setting(config, key, value);
    if (record_timings) config.record_timings = true;
    config.validate();
    return config;
  }
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    SimulationConfig probe;
    apply_setting(probe, "h", item);
    out.push_back(probe.h);
  }
  if (out.empty()) throw ConfigError("empty h list");
  return out;
}

std::string fmt_opt(const std::optional<double>& v) {
  char buf[64];
  if (!v) return "n/a";
  std::snprintf(buf, sizeof buf, "%.6g", *v);
  return buf;
}

void print_summary(const RunSummary& s) {
  std::printf("mode=%s h=%g t=%.6g steps=%zu N=%zu e_u=%s dI0_rel=%.3g dI1=%.3g dI2=%.3g fallbacks=%zu\n",
              std::string(to_string(s.mode)).c_str(), s.h, s.t_final, s.steps, s.n_final,
              fmt_opt(s.e_u).c_str(), s.i0_max_rel_drift, s.i1_max_drift, s.i2_error, s.total_small_fallback);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vorticity redistribution particle solver for the 2D Lamb-Oseen vortex"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  SettingFlags run_flags;
  SettingFlags conv_flags;
  SettingFlags bench_flags;
  SettingFlags rot_flags;

  std::string run_mode;
  std::string dump_path;
  auto* run_cmd = app.add_subcommand("run", "Single simulation");
  run_cmd->add_option("mode", run_mode, "heat or ns")->required();
  run_cmd->add_option("--dump-stencils", dump_path, "Write the final operator's stencils as text");
  run_flags.attach(run_cmd);

  std::string conv_mode;
  std::string conv_hs;
  auto* conv_cmd = app.add_subcommand("convergence", "Runs over a list of h and fits the error slope");
  conv_cmd->add_option("mode", conv_mode, "heat or ns")->required();
  conv_cmd->add_option("--h-list", conv_hs, "Comma-separated spacings (at least three)");
  conv_flags.attach(conv_cmd);

  std::string bench_hs = "0.08,0.04,0.02";
  std::string bench_cloud_path;
  int repeats = 5;
  auto* bench_cmd = app.add_subcommand("bench", "Times operator builds and velocity backends on frozen clouds");
  bench_cmd->add_option("--h-list", bench_hs, "Comma-separated spacings of the heat runs producing the clouds");
  bench_cmd->add_option("--cloud", bench_cloud_path, "Snapshot CSV to use as the frozen cloud (uses --h)");
  bench_cmd->add_option("--repeats", repeats, "Timed repetitions per phase")->check(CLI::Range(5, 1000));
  bench_flags.attach(bench_cmd);

  double angle = 10.0;
  auto* rot_cmd = app.add_subcommand("rotation-check", "Compares heat runs in two rotated segment frames");
  rot_cmd->add_option("--angle", angle, "Rotation in degrees");
  rot_flags.attach(rot_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "vrm: error: %s\n", e.what());
    return 2;
  }

  try {
    if (run_cmd->parsed()) {
      const Mode mode = parse_mode(run_mode);
      const SimulationConfig config = run_flags.resolve();
      RunOptions options;
      if (!dump_path.empty()) options.stencil_dump = fs::path(dump_path);
      print_summary(run_to_directory(config, mode, run_flags.out_dir, options));
    } else if (conv_cmd->parsed()) {
      const Mode mode = parse_mode(conv_mode);
      const SimulationConfig config = conv_flags.resolve();
      if (conv_hs.empty()) conv_hs = mode == Mode::heat ? "0.16,0.08,0.04,0.02" : "0.16,0.08,0.04";
      const auto hs = parse_list(conv_hs);
      const ConvergenceResult r = run_convergence(config, mode, hs, conv_flags.out_dir);
      for (const auto& row : r.rows) print_summary(row.summary);
      std::printf("error_slope=%.4f i2_error_slope=%.4f\n", r.error_slope, r.i2_error_slope);
    } else if (bench_cmd->parsed()) {
      const SimulationConfig config = bench_flags.resolve();
      std::optional<ParticleCloud> cloud;
      std::vector<double> hs;
      if (!bench_cloud_path.empty()) {
        cloud = read_snapshot(bench_cloud_path);
        hs = {config.h};
      } else {
        hs = parse_list(bench_hs);
      }
      const BenchResult r = run_bench(config, hs, repeats, bench_flags.out_dir, cloud);
      for (const auto& bc : r.cases) {
        std::printf("h=%g N=%zu", bc.h, bc.n_particles);
        for (const auto& t : bc.timings) std::printf(" %s=%.4gs", t.phase.c_str(), t.median);
        std::printf("\n");
      }
      if (r.small_scaling_exponent) std::printf("stencil_scaling_exponent=%.3f\n", *r.small_scaling_exponent);
    } else if (rot_cmd->parsed()) {
      const SimulationConfig config = rot_flags.resolve();
      const RotationResult r = run_rotation_check(config, angle, rot_flags.out_dir);
      std::printf("e_u(0)=%.6g e_u(%g)=%.6g relative_difference=%.4g\n", r.e_reference, r.angle_deg,
                  r.e_rotated, r.relative_difference);
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg) {
      if (c == '\n') c = ' ';
    }
    std::fprintf(stderr, "vrm: error: %s\n", msg.c_str());
    return 1;
  }
  return 0;
}
