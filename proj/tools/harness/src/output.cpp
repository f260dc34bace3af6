#include "vrm/harness/output.hpp"

#include <stdexcept>

namespace vrm::harness {

DiagnosticsWriter::DiagnosticsWriter(const std::filesystem::path& path, bool with_timings)
    : with_timings_(with_timings), path_(path) {
  file_ = std::fopen(path.c_str(), "w");
  if (file_ == nullptr) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  std::fprintf(file_, "%s\n", kDiagnosticsHeader);
}

DiagnosticsWriter::~DiagnosticsWriter() {
  if (file_ != nullptr) std::fclose(file_);
}

void DiagnosticsWriter::write(const DiagnosticsRecord& rec) {
  const std::string row = format_row(rec, with_timings_);
  std::fputs(row.c_str(), file_);
  std::fputc('\n', file_);
}

void DiagnosticsWriter::close() {
  if (file_ == nullptr) return;
  const bool failed = std::ferror(file_) != 0;
  const int rc = std::fclose(file_);
  file_ = nullptr;
  if (failed || rc != 0) throw std::runtime_error("write to '" + path_.string() + "' failed");
}

std::string format_row(const DiagnosticsRecord& rec, bool with_timings) {
  const WallTimes w = with_timings ? rec.wall : WallTimes{};
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "%zu,%.17g,%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%zu,%zu,%zu,%zu,%zu,%.6g,%.6g,%.6g",
                rec.step, rec.t, rec.dt, rec.n_particles, rec.inv.i0, rec.inv.i1.x, rec.inv.i1.y,
                rec.inv.i2, rec.energy, rec.n_diffused, rec.n_excluded, rec.n_inserted,
                rec.n_small_fallback, rec.n_fallback_excluded, w.stencil, w.velocity, w.total);
  return buf;
}

void dump_stencils(const std::filesystem::path& path, std::span<const Stencil> rows) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  for (const Stencil& s : rows) {
    std::fprintf(f, "center %u members %zu diagonal %.17g\n", s.center, s.neighbors.size(),
                 s.diagonal);
    for (std::size_t k = 0; k < s.neighbors.size(); ++k) {
      std::fprintf(f, "  %u %.17g\n", s.neighbors[k], s.weights[k]);
    }
  }
  std::fclose(f);
}

}  // namespace vrm::harness
