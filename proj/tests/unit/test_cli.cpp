#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <json.hpp>

#include "vrm/harness/config_file.hpp"
#include "vrm/harness/experiments.hpp"
#include "vrm/harness/output.hpp"

using namespace vrm;
using namespace vrm::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "vrm_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Invocation {
  int exit_code = 0;
  std::string err;
};

Invocation invoke(const std::string& args) {
  const fs::path err = fs::temp_directory_path() / "vrm_test_cli" / "stderr.txt";
  fs::create_directories(err.parent_path());
  const std::string cmd = std::string(VRM_EXE) + " " + args + " > /dev/null 2> " + err.string();
  const int status = std::system(cmd.c_str());
  Invocation out;
  out.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  out.err = slurp(err);
  return out;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("settings by flag name") {
  SimulationConfig c;
  apply_setting(c, "h", "0.04");
  apply_setting(c, "c_diff", "0.5");
  apply_setting(c, "c-diff", "0.25");
  apply_setting(c, " t-end ", " 2 ");
  apply_setting(c, "R", "3");
  apply_setting(c, "r", "0.4");
  apply_setting(c, "velocity", "direct");
  apply_setting(c, "frame-angle", "90");
  apply_setting(c, "record-timings", "true");
  CHECK(c.h == 0.04);
  CHECK(c.c_diff == 0.25);
  CHECK(c.t_end == 2.0);
  CHECK(c.R == 3.0);
  CHECK(c.r == 0.4);
  CHECK(c.velocity == VelocityBackend::direct);
  CHECK(c.frame_angle == doctest::Approx(std::numbers::pi / 2));
  CHECK(c.record_timings);
  CHECK_THROWS_AS(apply_setting(c, "h", "abc"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "h", "0.1x"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "order", "1.5"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "velocity", "fmm"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "colour", "red"), ConfigError);
}

TEST_CASE("config file") {
  const fs::path dir = scratch("config");
  SUBCASE("comments and blank lines") {
    std::ofstream(dir / "a.cfg") << "# Lamb-Oseen\n\nh = 0.04   # finer\nnu=0.01\norder_p = 12\n";
    SimulationConfig c;
    load_config_file(dir / "a.cfg", c);
    CHECK(c.h == 0.04);
    CHECK(c.nu == 0.01);
    CHECK(c.order_p == 12);
  }
  SUBCASE("errors name the line") {
    std::ofstream(dir / "b.cfg") << "h = 0.04\nthis line is wrong\n";
    SimulationConfig c;
    try {
      load_config_file(dir / "b.cfg", c);
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("b.cfg:2") != std::string::npos);
    }
    std::ofstream(dir / "c.cfg") << "h = 0.04\n\nnu = fast\n";
    CHECK_THROWS_WITH_AS(load_config_file(dir / "c.cfg", c), doctest::Contains("c.cfg:3"), ConfigError);
  }
  SUBCASE("missing file") {
    SimulationConfig c;
    CHECK_THROWS_AS(load_config_file(dir / "nope.cfg", c), ConfigError);
  }
}

TEST_CASE("diagnostics rows") {
  DiagnosticsRecord rec;
  rec.step = 3;
  rec.t = 0.5;
  rec.dt = 0.25;
  rec.n_particles = 9;
  rec.inv.i0 = 1.0;
  rec.wall = {1.5, 2.5, 4.0};
  const std::string plain = format_row(rec, false);
  CHECK(plain == "3,0.5,0.25,9,1,0,0,0,nan,0,0,0,0,0,0,0,0");
  CHECK(format_row(rec, true) == "3,0.5,0.25,9,1,0,0,0,nan,0,0,0,0,0,1.5,2.5,4");
  rec.energy = -1.25;
  CHECK(format_row(rec, false).find(",-1.25,") != std::string::npos);
  CHECK(std::string(kDiagnosticsHeader).find("step,t,dt,N,I0") == 0);
}

TEST_CASE("log-log slope") {
  const std::vector<double> h{0.16, 0.08, 0.04, 0.02};
  std::vector<double> e;
  for (double v : h) e.push_back(3.0 * v * v);
  CHECK(loglog_slope(h, e) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS(loglog_slope(std::vector<double>{1.0}, std::vector<double>{1.0}));
}

TEST_CASE("run artifacts") {
  const fs::path dir = scratch("run");
  SimulationConfig c;
  c.h = 0.16;
  c.snapshot_every = 40;
  RunOptions opts;
  opts.stencil_dump = dir / "stencils.txt";
  RunArtifacts art;
  ParticleCloud final_cloud;
  const RunSummary s = run_to_directory(c, Mode::heat, dir, opts, &final_cloud, &art);
  CHECK(s.steps == 100);
  CHECK(s.t_final == 1.0);
  REQUIRE(s.e_u);
  CHECK(*s.e_u > 0.0);
  CHECK(*s.e_u < 1.0);
  CHECK(s.i0_max_rel_drift <= 1e-12);
  CHECK(s.n_final == final_cloud.size());
  CHECK(art.snapshots.size() == 2);
  CHECK(read_snapshot(art.final_snapshot) == final_cloud);
  CHECK(fs::file_size(dir / "stencils.txt") > 0);

  const auto summary = nlohmann::json::parse(slurp(art.summary));
  CHECK(summary.at("e_u").get<double>() == *s.e_u);
  CHECK(summary.contains("i0_max_rel_drift"));
  CHECK(summary.at("config").at("velocity") == "treecode");
  const auto manifest = nlohmann::json::parse(slurp(art.manifest));
  for (const char* key : {"diagnostics", "final_snapshot", "summary"}) {
    CHECK(fs::exists(manifest.at(key).get<std::string>()));
  }
  for (const auto& p : manifest.at("snapshots")) CHECK(fs::exists(p.get<std::string>()));

  const std::string csv = slurp(art.diagnostics);
  CHECK(csv.rfind(std::string(kDiagnosticsHeader) + "\n", 0) == 0);
  CHECK(count_lines(csv) == 102);
}

TEST_CASE("identical runs write identical files") {
  SimulationConfig c;
  c.h = 0.16;
  c.threads = 2;
  const fs::path a = scratch("same_a");
  const fs::path b = scratch("same_b");
  run_to_directory(c, Mode::navier_stokes, a);
  run_to_directory(c, Mode::navier_stokes, b);
  CHECK(slurp(a / "diagnostics.csv") == slurp(b / "diagnostics.csv"));
  CHECK(slurp(a / "final.csv") == slurp(b / "final.csv"));
}

TEST_CASE("rotated segment frames") {
  SimulationConfig c;
  c.h = 0.16;
  SUBCASE("a quarter turn maps the partition onto itself") {
    // Same segments, but insertion order and hence the chosen LP vertex differ.
    const auto r = run_rotation_check(c, 90.0, scratch("rot90"));
    CHECK(r.relative_difference <= 1e-2);
  }
  SUBCASE("zero angle is exact") {
    const auto r = run_rotation_check(c, 0.0, scratch("rot0"));
    CHECK(r.relative_difference == 0.0);
  }
  SUBCASE("ten degrees barely matters") {
    c.h = 0.08;
    const auto r = run_rotation_check(c, 10.0, scratch("rot10"));
    CHECK(r.relative_difference <= 0.1);
  }
}

TEST_CASE("convergence driver") {
  SimulationConfig c;
  const std::vector<double> hs{0.32, 0.16, 0.08};
  const fs::path dir = scratch("conv");
  const auto r = run_convergence(c, Mode::heat, hs, dir);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.error_slope > 0.5);
  CHECK(r.particle_ratios.size() == 2);
  CHECK(fs::exists(dir / "convergence.csv"));
  CHECK(fs::exists(dir / "h_0.16" / "diagnostics.csv"));
  CHECK(count_lines(slurp(dir / "convergence.csv")) == 4);
  CHECK_THROWS_AS(run_convergence(c, Mode::heat, std::vector<double>{0.16, 0.08}, dir), ConfigError);
}

TEST_CASE("bench driver") {
  SimulationConfig c;
  c.h = 0.16;
  const fs::path dir = scratch("bench");
  const auto r = run_bench(c, std::vector<double>{0.16}, 5, dir);
  REQUIRE(r.cases.size() == 1);
  for (const char* phase : {"stencil_small", "stencil_full", "velocity_direct", "velocity_treecode"}) {
    const auto* t = r.cases[0].find(phase);
    REQUIRE(t != nullptr);
    CHECK(t->repeats == 5);
    CHECK(t->min <= t->median);
    CHECK(t->median <= t->max);
  }
  CHECK(fs::exists(dir / "bench.csv"));
  CHECK_THROWS(bench_cloud(c, init_point_vortex(1.0), 0));
}

TEST_CASE("command line") {
  const fs::path dir = scratch("cmd");
  SUBCASE("heat smoke run") {
    const auto r = invoke("run heat --h 0.16 --out " + (dir / "heat").string());
    CHECK(r.exit_code == 0);
    const auto summary = nlohmann::json::parse(slurp(dir / "heat" / "summary.json"));
    CHECK(summary.at("e_u").is_number());
    CHECK(summary.contains("i1_max_drift"));
  }
  SUBCASE("convective smoke run") {
    const auto r = invoke("run ns --h 0.16 --velocity direct --out " + (dir / "ns").string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "ns" / "manifest.json"));
  }
  SUBCASE("flags override the config file") {
    std::ofstream(dir / "p.cfg") << "h = 0.16\nt-end = 0.5\n";
    const auto r = invoke("run heat --config " + (dir / "p.cfg").string() + " --t-end 0.25 --out " +
                          (dir / "cfg").string());
    REQUIRE(r.exit_code == 0);
    const auto summary = nlohmann::json::parse(slurp(dir / "cfg" / "summary.json"));
    CHECK(summary.at("h").get<double>() == 0.16);
    CHECK(summary.at("t_final").get<double>() == 0.25);
  }
  SUBCASE("errors exit nonzero with one line") {
    const char* bad[] = {
        "run heat --h -1",
        "run heat --h abc",
        "run euler --h 0.16",
        "run",
        "fly",
        "run heat --bogus 1",
        "run heat --velocity fmm",
        "run heat --order 3",
        "run heat --theta 1.5",
        "run heat --config /nonexistent/vrm.cfg",
        "convergence heat --h-list 0.16,0.08",
        "bench --repeats 2",
        "bench --cloud /nonexistent/cloud.csv",
    };
    for (const char* args : bad) {
      CAPTURE(args);
      const auto r = invoke(std::string(args) + " --out " + (dir / "bad").string());
      CHECK(r.exit_code != 0);
      CHECK(count_lines(r.err) == 1);
      CHECK(r.err.rfind("vrm: error: ", 0) == 0);
    }
  }
}
