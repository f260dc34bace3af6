#include "vrm/diffusion.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace vrm {

double exclusion_budget(std::span<const double> gamma, double h, int order, double c_diff) {
  CompensatedSum l1;
  for (double g : gamma) l1.add(std::abs(g));
  return c_diff * std::pow(h, order + 2) * l1.value();
}

ExclusionSet select_excluded(std::span<const double> gamma, double h, int order, double c_diff) {
  ExclusionSet set;
  set.budget = exclusion_budget(gamma, h, order, c_diff);

  std::vector<ParticleId> by_size(gamma.size());
  std::iota(by_size.begin(), by_size.end(), ParticleId{0});
  std::stable_sort(by_size.begin(), by_size.end(), [&](ParticleId a, ParticleId b) {
    return std::abs(gamma[a]) < std::abs(gamma[b]);
  });

  std::vector<char> excluded(gamma.size(), 0);
  double acc = 0.0;
  for (ParticleId i : by_size) {
    const double g = std::abs(gamma[i]);
    if (g != 0.0 && acc + g > set.budget) break;
    acc += g;
    excluded[i] = 1;
  }
  set.excluded_l1 = acc;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    (excluded[i] ? set.excluded : set.diffused).push_back(static_cast<ParticleId>(i));
  }
  return set;
}

std::size_t insert_coverage(SpatialIndex& index, ParticleCloud& cloud,
                            std::span<const ParticleId> diffused) {
  std::size_t inserted = 0;
  for (ParticleId i : diffused) inserted += ensure_coverage(index, cloud, i).size();
  return inserted;
}

const StencilOutcome* StencilCache::find(ParticleId i) const {
  if (i >= entries_.size() || !entries_[i]) return nullptr;
  return &*entries_[i];
}

void StencilCache::store(ParticleId i, const StencilOutcome& outcome) {
  if (i >= entries_.size()) entries_.resize(static_cast<std::size_t>(i) + 1);
  entries_[i] = outcome;
}

void StencilCache::invalidate_around(const SpatialIndex& index, ParticleId first_new) {
  NeighborhoodView view;
  for (auto j = static_cast<std::size_t>(first_new); j < index.size(); ++j) {
    index.neighborhood(static_cast<ParticleId>(j), view);
    for (const Neighbor& m : view.members) {
      if (m.index < entries_.size()) entries_[m.index].reset();
    }
  }
}

std::size_t StencilCache::size() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const auto& e) { return e.has_value(); }));
}

DiffusionOperator build_operator(const SpatialIndex& index, std::span<const double> gamma,
                                 const ExclusionSet& exclusion, const DiffusionSettings& settings,
                                 StencilCache* cache) {
  DiffusionOperator op;
  op.particle_count = index.size();
  op.h = index.params().h;
  op.nu = settings.nu;
  op.order = settings.order;

  const auto& diffused = exclusion.diffused;
  std::vector<StencilOutcome> outcomes(diffused.size());
  const StencilOptions options{settings.order, settings.try_small};
  const auto count = static_cast<std::ptrdiff_t>(diffused.size());

#pragma omp parallel for schedule(dynamic, 64) num_threads(settings.threads)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const StencilOutcome* hit = cache != nullptr ? cache->find(diffused[k]) : nullptr;
    outcomes[k] = hit != nullptr ? *hit : compute_stencil(index, diffused[k], options);
  }
  if (cache != nullptr) {
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
      if (cache->find(diffused[k]) == nullptr) cache->store(diffused[k], outcomes[k]);
    }
  }

  op.excluded = exclusion.excluded;
  double excluded_l1 = exclusion.excluded_l1;
  bool added_exclusions = false;
  op.rows.reserve(diffused.size());
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    auto& o = outcomes[k];
    if (o.small_failed) ++op.counters.n_small_fallback;
    if (o.path == StencilPath::failed) {
      ++op.counters.n_fallback_excluded;
      op.excluded.push_back(diffused[k]);
      excluded_l1 += std::abs(gamma[diffused[k]]);
      added_exclusions = true;
      continue;
    }
#ifndef NDEBUG
    const auto check = check_stencil(o.stencil, index.points(), op.h, op.order);
    assert(check.min_weight >= 0.0);
    assert(check.max_moment_residual <= 1e-9);
    assert(check.diagonal_exact);
#endif
    op.rows.push_back(std::move(o.stencil));
  }
  if (added_exclusions) {
    std::sort(op.excluded.begin(), op.excluded.end());
    if (excluded_l1 > settings.fallback_budget_factor * exclusion.budget) {
      throw FallbackBudgetExceeded(
          std::to_string(op.counters.n_fallback_excluded) +
          " particles without a non-negative stencil carry excluded circulation " +
          std::to_string(excluded_l1) + " beyond " +
          std::to_string(settings.fallback_budget_factor) + "x the budget " +
          std::to_string(exclusion.budget));
    }
  }
  op.counters.n_diffused = op.rows.size();
  op.counters.n_excluded = op.excluded.size();
  return op;
}

std::vector<double> apply(const DiffusionOperator& op, std::span<const double> gamma, int threads) {
  const std::size_t n = op.particle_count;
  if (gamma.size() != n) throw std::invalid_argument("apply: circulation count mismatch");
  std::vector<double> rates(n, 0.0);
  if (op.rows.empty()) return rates;

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(op.rows.size())));
  if (workers == 1) {
    for (const Stencil& s : op.rows) {
      const double g = gamma[s.center];
      rates[s.center] += s.diagonal * g;
      for (std::size_t k = 0; k < s.neighbors.size(); ++k) rates[s.neighbors[k]] += s.weights[k] * g;
    }
  } else {
    std::vector<std::vector<double>> buffers(workers, std::vector<double>(n, 0.0));
    const std::size_t rows = op.rows.size();
#pragma omp parallel num_threads(workers)
    {
#pragma omp for schedule(static)
      for (int w = 0; w < workers; ++w) {
        auto& buf = buffers[w];
        const std::size_t begin = rows * w / workers;
        const std::size_t end = rows * (w + 1) / workers;
        for (std::size_t r = begin; r < end; ++r) {
          const Stencil& s = op.rows[r];
          const double g = gamma[s.center];
          buf[s.center] += s.diagonal * g;
          for (std::size_t k = 0; k < s.neighbors.size(); ++k) buf[s.neighbors[k]] += s.weights[k] * g;
        }
      }
    }
    for (int w = 0; w < workers; ++w) {
      for (std::size_t j = 0; j < n; ++j) rates[j] += buffers[w][j];
    }
  }
  for (double& r : rates) r *= op.nu;
  return rates;
}

double stable_dt_aposteriori(const DiffusionOperator& op, double nu) {
  double dt = std::numeric_limits<double>::infinity();
  if (!(nu > 0.0)) return dt;
  for (const Stencil& s : op.rows) {
    if (s.diagonal < 0.0) dt = std::min(dt, -1.0 / (nu * s.diagonal));
  }
  return dt;
}

double stable_dt_apriori(double r, double h, double nu) {
  if (!(nu > 0.0)) return std::numeric_limits<double>::infinity();
  const double rh = r * h;
  return rh * rh / (4.0 * nu);
}

}  // namespace vrm
