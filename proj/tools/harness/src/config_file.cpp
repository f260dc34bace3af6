#include "vrm/harness/config_file.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

namespace vrm::harness {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
  }
  return out;
}

int to_int(std::string_view key, std::string_view v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("'" + std::string(key) + "' expects true/false, got '" + std::string(v) + "'");
}

}  // namespace

void apply_setting(SimulationConfig& c, std::string_view raw_key, std::string_view raw_value) {
  std::string key(trim(raw_key));
  for (char& ch : key) {
    if (ch == '_') ch = '-';
  }
  const std::string_view v = trim(raw_value);
  if (key == "h") c.h = to_double(key, v);
  else if (key == "r") c.r = to_double(key, v);
  else if (key == "R") c.R = to_double(key, v);
  else if (key == "order") c.order = to_int(key, v);
  else if (key == "nu") c.nu = to_double(key, v);
  else if (key == "gamma") c.gamma = to_double(key, v);
  else if (key == "c-diff") c.c_diff = to_double(key, v);
  else if (key == "eps-factor") c.eps_factor = to_double(key, v);
  else if (key == "dt-safety") c.dt_safety = to_double(key, v);
  else if (key == "cfl-safety") c.cfl_safety = to_double(key, v);
  else if (key == "t-end") c.t_end = to_double(key, v);
  else if (key == "velocity") c.velocity = parse_velocity_backend(v);
  else if (key == "theta") c.theta = to_double(key, v);
  else if (key == "order-p") c.order_p = to_int(key, v);
  else if (key == "threads") c.threads = to_int(key, v);
  else if (key == "snapshot-every") c.snapshot_every = to_int(key, v);
  else if (key == "energy-every") c.energy_every = to_int(key, v);
  else if (key == "frame-angle") c.frame_angle = to_double(key, v) * std::numbers::pi / 180.0;
  else if (key == "record-timings") c.record_timings = to_bool(key, v);
  else throw ConfigError("unknown configuration key '" + key + "'");
}

void load_config_file(const std::filesystem::path& path, SimulationConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s(line);
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace vrm::harness
