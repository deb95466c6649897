#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geosamp/core_data.hpp"
#include "geosamp/rng.hpp"
#include "geosamp/utility.hpp"

namespace geosamp {

enum class StepRule {
  pairwise,          // pairwise Frank-Wolfe with exact line search
  away_line_search,  // away-step Frank-Wolfe with exact line search
  diminishing,       // classic gamma_t = 2 / (t + 2)
};

/// "pairwise", "away-step" or "diminishing".
std::string to_string(StepRule rule);
/// Throws ConfigError on an unknown name.
StepRule parse_step_rule(const std::string& name);

struct SolveOptions {
  int max_iters = 500;
  double gap_tol = 1e-6;
  StepRule step = StepRule::pairwise;

  void validate() const;
};

struct SolveResult {
  InclusionVector s;
  double utility = 0.0;
  double gap = 0.0;  // grad(s) . (d - s) at the final LMO vertex d
  int iterations = 0;
  bool feasible = false;
  double budget = 0.0;       // budget available to the unlocked clusters
  double budget_used = 0.0;  // sum_i c_i s_i over unlocked clusters
  Eigen::VectorXd last_vertex;
  std::vector<double> best_utility;  // best-so-far utility after each iteration
};

/// Linear maximization over {0 <= d <= 1, sum c_i d_i <= budget} on unlocked
/// coordinates by fractional knapsack: ratio grad_i / c_i descending, ties by
/// lower index, filled until the budget binds. Locked coordinates are 1 and
/// not charged. Coordinates with grad_i <= 0 stay at 0.
Eigen::VectorXd lmo_knapsack(const Eigen::VectorXd& grad, std::span<const double> costs, double budget,
                             const std::vector<char>& locked);

/// Maximizes the utility over the relaxed inclusion polytope with
/// Frank-Wolfe. `committed` marks clusters fixed at 1; they are never charged
/// to `budget`. Throws InfeasibleError when budget < 0 and std::domain_error
/// when the gradient vanishes on every unlocked cluster.
SolveResult solve_relaxation(const CountsTable& counts, std::span<const double> costs, double budget,
                             const std::vector<char>& committed, const UtilitySpec& spec,
                             const SolveOptions& opts = {});

/// Dataset-level entry point: commits the sample's clusters (S0 and any
/// earlier augmentation) and uses the budget left under the cost model's
/// budget scope.
SolveResult solve_relaxation(const Dataset& ds, const CountsTable& counts, const CostModel& cm,
                             const UtilitySpec& spec, const SampleState& state, const SolveOptions& opts = {});

/// Visits unlocked clusters in a shuffled order and includes each with
/// probability s_i. Stops at the first included cluster that would exceed
/// the budget; that cluster is left out. Returns ascending cluster indices.
std::vector<std::size_t> round_inclusion(const InclusionVector& s, std::span<const double> costs, double budget,
                                         Rng& rng);

}  // namespace geosamp
