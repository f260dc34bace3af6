#include "vrm/particle_cloud.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>

namespace vrm {

ParticleCloud::ParticleCloud(std::vector<Vec2> positions, std::vector<double> circulations)
    : positions_(std::move(positions)), circulations_(std::move(circulations)) {
  if (positions_.size() != circulations_.size()) {
    throw std::invalid_argument("positions and circulations differ in length");
  }
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    if (!is_finite(positions_[i]) || !std::isfinite(circulations_[i])) {
      throw std::invalid_argument("non-finite particle state at index " + std::to_string(i));
    }
  }
}

ParticleId ParticleCloud::append_empty(Vec2 pos) {
  if (!is_finite(pos)) throw std::invalid_argument("non-finite particle position");
  positions_.push_back(pos);
  circulations_.push_back(0.0);
  return static_cast<ParticleId>(positions_.size() - 1);
}

void ParticleCloud::assign(std::span<const Vec2> positions, std::span<const double> circulations) {
  if (positions.size() != positions_.size() || circulations.size() != circulations_.size()) {
    throw std::invalid_argument("assign: particle count mismatch");
  }
  std::copy(positions.begin(), positions.end(), positions_.begin());
  std::copy(circulations.begin(), circulations.end(), circulations_.begin());
}

double ParticleCloud::circulation_l1() const {
  CompensatedSum sum;
  for (double g : circulations_) sum.add(std::abs(g));
  return sum.value();
}

ParticleCloud init_point_vortex(double gamma) {
  if (!std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite");
  return ParticleCloud({Vec2{0.0, 0.0}}, {gamma});
}

void write_snapshot(const ParticleCloud& cloud, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw SnapshotError("cannot open '" + path.string() + "' for writing");
  std::fputs("x,y,gamma\n", f);
  const auto pos = cloud.positions();
  const auto gam = cloud.circulations();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    std::fprintf(f, "%.17g,%.17g,%.17g\n", pos[i].x, pos[i].y, gam[i]);
  }
  const bool failed = std::ferror(f) != 0;
  if (std::fclose(f) != 0 || failed) {
    throw SnapshotError("write to '" + path.string() + "' failed");
  }
}

namespace {

double parse_field(std::string_view field, std::size_t line_no) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw SnapshotError("line " + std::to_string(line_no) + ": non-numeric field '" +
                        std::string(field) + "'");
  }
  return value;
}

}  // namespace

ParticleCloud read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SnapshotError("cannot open '" + path.string() + "' for reading");

  std::string line;
  if (!std::getline(in, line)) throw SnapshotError("'" + path.string() + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y,gamma") throw SnapshotError("missing header 'x,y,gamma'");

  std::vector<Vec2> positions;
  std::vector<double> circulations;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::string_view rest(line);
    double values[3];
    int column = 0;
    while (true) {
      const auto comma = rest.find(',');
      if (column >= 3) {
        throw SnapshotError("line " + std::to_string(line_no) + ": expected 3 columns");
      }
      values[column++] = parse_field(rest.substr(0, comma), line_no);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (column != 3) {
      throw SnapshotError("line " + std::to_string(line_no) + ": expected 3 columns, got " +
                          std::to_string(column));
    }
    positions.push_back({values[0], values[1]});
    circulations.push_back(values[2]);
  }
  try {
    return ParticleCloud(std::move(positions), std::move(circulations));
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(e.what());
  }
}

}  // namespace vrm
