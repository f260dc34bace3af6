#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "vrm/particle_cloud.hpp"
#include "vrm/spatial_index.hpp"
#include "vrm/stencil_solver.hpp"

namespace vrm {

// Particles left out of diffusion (the set I) and those that are diffused.
// Both lists are sorted by index and together cover every particle.
struct ExclusionSet {
  std::vector<ParticleId> excluded;
  std::vector<ParticleId> diffused;
  double excluded_l1 = 0.0;
  double budget = 0.0;  // C_diff * h^(n+2) * ||Gamma||_1
};

double exclusion_budget(std::span<const double> gamma, double h, int order, double c_diff);

// Adds particles in ascending |Gamma_i| (ties by index) while the excluded
// circulation stays within the budget. Zero-circulation particles always
// end up excluded.
ExclusionSet select_excluded(std::span<const double> gamma, double h, int order, double c_diff);

// Runs ensure_coverage for each diffused particle in ascending order.
// Returns the number of inserted particles.
std::size_t insert_coverage(SpatialIndex& index, ParticleCloud& cloud,
                            std::span<const ParticleId> diffused);

class FallbackBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DiffusionSettings {
  int order = 1;
  double nu = 0.0;
  double c_diff = 1.0;
  bool try_small = true;
  int threads = 1;
  // Abort when fallback exclusions push the excluded circulation beyond
  // this multiple of the budget.
  double fallback_budget_factor = 10.0;
};

struct DiffusionCounters {
  std::size_t n_diffused = 0;
  std::size_t n_excluded = 0;
  std::size_t n_small_fallback = 0;
  std::size_t n_fallback_excluded = 0;
};

// Discrete (reduced) Laplacian: one stencil row per diffused particle.
struct DiffusionOperator {
  std::vector<Stencil> rows;
  std::vector<ParticleId> excluded;
  std::size_t particle_count = 0;
  double h = 0.0;
  double nu = 0.0;
  int order = 1;
  DiffusionCounters counters;
};

// Stencil outcomes of particles that do not move, keyed by particle id. An
// entry stays valid until a new particle lands in the particle's annulus, so
// the cache must only be used while positions are fixed (heat mode) and with
// one set of stencil options.
class StencilCache {
 public:
  const StencilOutcome* find(ParticleId i) const;
  void store(ParticleId i, const StencilOutcome& outcome);
  // Drops the entries of every annulus member of the particles
  // first_new .. index.size()-1.
  void invalidate_around(const SpatialIndex& index, ParticleId first_new);
  std::size_t size() const;

 private:
  std::vector<std::optional<StencilOutcome>> entries_;
};

// Throws FallbackBudgetExceeded when particles whose small and full
// neighbourhoods are both infeasible carry too much circulation.
DiffusionOperator build_operator(const SpatialIndex& index, std::span<const double> gamma,
                                 const ExclusionSet& exclusion, const DiffusionSettings& settings,
                                 StencilCache* cache = nullptr);

// rate_j = nu * sum_i f_ij Gamma_i over the diffused rows i (diagonal included).
// Per-worker buffers are merged in worker order.
std::vector<double> apply(const DiffusionOperator& op, std::span<const double> gamma, int threads = 1);

// min_i -1 / (nu f_ii); +inf for an empty operator or nu = 0.
double stable_dt_aposteriori(const DiffusionOperator& op, double nu);
// (r h)^2 / (4 nu); +inf for nu = 0.
double stable_dt_apriori(double r, double h, double nu);

}  // namespace vrm
