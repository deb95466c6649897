#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "geosamp/core_data.hpp"
#include "geosamp/optimizer.hpp"
#include "geosamp/rng.hpp"
#include "geosamp/utility.hpp"

namespace geosamp {

struct SamplerConfig {
  int strata_count = 2;  // N
  int k = 25;
  std::size_t initial_size = 500;  // labeled points in the initial sample
  std::uint64_t strata_seed = 0;   // fixes the N strata across cluster seeds

  void validate(const Dataset& ds) const;
};

struct ConvenienceConfig {
  std::vector<std::pair<double, double>> anchors;
  double temperature = 0.025;
  std::size_t size = 100;

  void validate() const;
};

/// N strata drawn uniformly without replacement from a dedicated seed.
std::set<std::size_t> choose_strata(const Dataset& ds, int count, std::uint64_t strata_seed);

/// min(k, size) eligible points of the cluster, uniformly without
/// replacement, ascending.
std::vector<std::size_t> label_cluster(const Dataset& ds, std::size_t cluster, int k, Rng& rng);

/// PPS cluster draws without replacement inside the chosen strata until the
/// labeled-point target is met; the last cluster is trimmed to hit it exactly.
/// Throws InfeasibleError when the strata cannot supply the target.
SampleState draw_initial_sample(const Dataset& ds, const SamplerConfig& cfg, Rng& rng);

/// PPS draws among unsampled clusters of the initial strata while one is
/// affordable. Sets `infeasible` when the strata run out of clusters before
/// the budget is spent.
SampleState default_cluster_augment(const Dataset& ds, const SampleState& state, const CostModel& cm,
                                    double budget, Rng& rng);

/// Cheapest clusters first (ties: more expected labels, then lower index).
SampleState greedy_size_augment(const Dataset& ds, const SampleState& state, const CostModel& cm,
                                double budget, Rng& rng);

/// Uniformly shuffled unsampled clusters, each added when it still fits.
SampleState random_cluster_augment(const Dataset& ds, const SampleState& state, const CostModel& cm,
                                   double budget, Rng& rng);

struct OptimizedAugment {
  SampleState state;
  SolveResult solve;
  std::vector<std::size_t> chosen;
};

/// expected counts -> relaxed solve -> rounding -> within-cluster labeling.
OptimizedAugment optimized_augment_detailed(const Dataset& ds, const SampleState& state, const CostModel& cm,
                                            double budget, const UtilitySpec& spec, const SolveOptions& opts,
                                            Rng& rng);

SampleState optimized_augment(const Dataset& ds, const SampleState& state, const CostModel& cm, double budget,
                              const UtilitySpec& spec, const SolveOptions& opts, Rng& rng);

/// Per-point weights softmax(-normalized distance to nearest anchor / tau),
/// over eligible points, ascending point index order.
std::vector<double> convenience_weights(const Dataset& ds, const ConvenienceConfig& cfg);

/// Weighted draws of points without replacement, proportional to
/// convenience_weights. Throws InfeasibleError when size exceeds the
/// eligible population.
SampleState convenience_sample(const Dataset& ds, const ConvenienceConfig& cfg, Rng& rng);

/// Uniform draw of eligible points without replacement.
SampleState random_point_sample(const Dataset& ds, std::size_t size, Rng& rng);

}  // namespace geosamp
