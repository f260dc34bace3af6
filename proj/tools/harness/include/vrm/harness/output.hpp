#pragma once

#include <cstdio>
#include <filesystem>
#include <string>

#include "vrm/diagnostics.hpp"
#include "vrm/stencil_solver.hpp"

namespace vrm::harness {

inline constexpr const char* kDiagnosticsHeader =
    "step,t,dt,N,I0,I1x,I1y,I2,E,n_diffused,n_excluded,n_inserted,n_small_fallback,"
    "n_fallback_excluded,wt_stencil,wt_velocity,wt_total";

// Streams DiagnosticsRecord rows. Wall-clock columns are written as zero
// unless `with_timings` is set.
class DiagnosticsWriter {
 public:
  DiagnosticsWriter(const std::filesystem::path& path, bool with_timings);
  ~DiagnosticsWriter();
  DiagnosticsWriter(const DiagnosticsWriter&) = delete;
  DiagnosticsWriter& operator=(const DiagnosticsWriter&) = delete;

  void write(const DiagnosticsRecord& rec);
  void close();

 private:
  std::FILE* file_ = nullptr;
  bool with_timings_;
  std::filesystem::path path_;
};

std::string format_row(const DiagnosticsRecord& rec, bool with_timings);

// Plain-text stencil dump: one `center` line followed by its entries.
void dump_stencils(const std::filesystem::path& path, std::span<const Stencil> rows);

}  // namespace vrm::harness
