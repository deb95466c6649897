#pragma once

// Relaxation instances shared by the optimizer tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "geosamp/optimizer.hpp"
#include "helpers.hpp"

namespace testing_support {

struct Instance {
  CountsTable counts;
  std::vector<double> costs;
  std::vector<char> committed;
  double budget = 0.0;
  UtilitySpec spec;
};

inline Instance random_instance(Rng& rng, std::size_t unlocked, std::size_t locked, bool group_rep) {
  Instance in;
  const std::size_t n = unlocked + locked;
  const std::size_t groups = 2 + rng.index(4);
  in.counts = random_counts(rng, n, groups);
  in.committed.assign(n, 0);
  for (std::size_t i = 0; i < locked; ++i) in.committed[rng.index(n)] = 1;
  in.costs.resize(n);
  double unlocked_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    in.costs[i] = rng.bernoulli(0.5) ? 25.0 : rng.uniform(20.0, 60.0);
    if (!in.committed[i]) unlocked_total += in.costs[i];
  }
  in.budget = rng.uniform(0.15, 0.6) * unlocked_total;
  in.spec = group_rep ? UtilitySpec::group_rep(random_group_model(rng, groups), rng.uniform(0.2, 0.9), 1e-6)
                      : UtilitySpec::size_spec();
  return in;
}

// Best utility over all binary feasible completions of the committed mask.
inline double best_binary(const Instance& in) {
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < in.costs.size(); ++i)
    if (!in.committed[i]) free.push_back(i);
  double best = -std::numeric_limits<double>::infinity();
  InclusionVector s = InclusionVector::zeros(in.costs.size());
  for (std::size_t i = 0; i < in.costs.size(); ++i)
    if (in.committed[i]) s.values(static_cast<Eigen::Index>(i)) = 1.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free.size()); ++mask) {
    double cost = 0.0;
    for (std::size_t j = 0; j < free.size(); ++j) {
      const bool on = (mask >> j) & 1U;
      s.values(static_cast<Eigen::Index>(free[j])) = on ? 1.0 : 0.0;
      if (on) cost += in.costs[free[j]];
    }
    if (cost > in.budget * (1 + 1e-12)) continue;
    best = std::max(best, utility(s, in.counts, in.spec));
  }
  return best;
}

// An augmentation step: 20 committed clusters of 25 labeled points that
// together cover every group, a handful of unlocked clusters, costs 25 or 50
// and one of the experiment budgets.
inline Instance augmentation_instance(Rng& rng, std::size_t unlocked, bool group_rep) {
  Instance in;
  const std::size_t locked = 20, n = locked + unlocked, groups = 2 + rng.index(7);
  in.counts.total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  in.counts.by_group = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(groups));
  in.committed.assign(n, 0);
  in.costs.resize(n);
  double unlocked_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = i < locked ? 25.0 : std::min(25.0, 10.0 + static_cast<double>(rng.index(31)));
    const std::size_t g = i < groups ? i : rng.index(groups);
    in.counts.total(static_cast<Eigen::Index>(i)) = e;
    in.counts.by_group(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) = e;
    in.committed[i] = i < locked;
    in.costs[i] = rng.bernoulli(0.5) ? 25.0 : 50.0;
    if (i >= locked) unlocked_total += in.costs[i];
  }
  const double budgets[] = {100.0, 200.0, 500.0};
  in.budget = std::min(budgets[rng.index(3)], 0.8 * unlocked_total);
  in.spec = group_rep ? UtilitySpec::group_rep(random_group_model(rng, groups), 0.5, 1e-6) : UtilitySpec::size_spec();
  return in;
}

inline double rounded_utility(const Instance& in, const InclusionVector& s, const std::vector<std::size_t>& chosen) {
  InclusionVector b = InclusionVector::zeros(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    if (in.committed[i]) b.values(static_cast<Eigen::Index>(i)) = 1.0;
  for (std::size_t c : chosen) b.values(static_cast<Eigen::Index>(c)) = 1.0;
  return utility(b, in.counts, in.spec);
}

}  // namespace testing_support
