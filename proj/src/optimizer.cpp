#include "geosamp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace geosamp {

namespace {

constexpr double kBudgetRelTol = 1e-9;

double budget_slack(double budget) { return kBudgetRelTol * std::max(1.0, budget); }

/// Directional derivative of the utility along `dir`, as a function of the
/// step length. The utility only depends on s through the per-group and total
/// counts, so each evaluation is O(groups).
class LineDerivative {
 public:
  LineDerivative(const CountsTable& counts, const UtilitySpec& spec, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& dir)
      : spec_(spec), n_(counts.total.dot(x)), dn_(counts.total.dot(dir)) {
    if (spec.kind == UtilityKind::group_rep) {
      z_ = counts.by_group.transpose() * x;
      dz_ = counts.by_group.transpose() * dir;
    }
  }

  double operator()(double step) const {
    if (spec_.kind == UtilityKind::size) return dn_;
    const auto& gamma = spec_.groups->gamma();
    double d = 0.0;
    for (Eigen::Index g = 0; g < z_.size(); ++g) {
      if (dz_(g) == 0.0) continue;
      d += spec_.lambda * gamma[static_cast<std::size_t>(g)] * 0.5 *
           std::pow(z_(g) + step * dz_(g) + spec_.epsilon, -1.5) * dz_(g);
    }
    if (dn_ != 0.0 && spec_.lambda != 1.0)
      d += (1.0 - spec_.lambda) * 0.5 * std::pow(n_ + step * dn_ + spec_.epsilon, -1.5) * dn_;
    return d;
  }

 private:
  const UtilitySpec& spec_;
  double n_;
  double dn_;
  Eigen::VectorXd z_;
  Eigen::VectorXd dz_;
};

/// Maximizer of a concave function on [0, max_step] given its derivative.
double exact_line_search(const LineDerivative& deriv, double max_step) {
  if (deriv(max_step) >= 0.0) return max_step;
  if (deriv(0.0) <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = max_step;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * max_step; ++i) {
    const double mid = 0.5 * (lo + hi);
    (deriv(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double weighted_cost(const Eigen::VectorXd& s, std::span<const double> costs, const std::vector<char>& locked) {
  double used = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (!locked[static_cast<std::size_t>(i)]) used += costs[static_cast<std::size_t>(i)] * s(i);
  return used;
}

// Hessian of the group-rep utility with respect to s. It has rank at most
// groups + 1, so the face systems below are regularized.
Eigen::MatrixXd group_rep_hessian(const Eigen::VectorXd& x, const CountsTable& counts, const UtilitySpec& spec) {
  const Eigen::VectorXd z = counts.by_group.transpose() * x;
  const double n = counts.total.dot(x);
  const auto& gamma = spec.groups->gamma();
  Eigen::VectorXd w(z.size());
  for (Eigen::Index g = 0; g < z.size(); ++g)
    w(g) = -0.75 * spec.lambda * gamma[static_cast<std::size_t>(g)] * std::pow(z(g) + spec.epsilon, -2.5);
  Eigen::MatrixXd h = counts.by_group * w.asDiagonal() * counts.by_group.transpose();
  h -= 0.75 * (1.0 - spec.lambda) * std::pow(n + spec.epsilon, -2.5) * (counts.total * counts.total.transpose());
  return h;
}

// One Newton step on the face of the feasible set that holds x. Free
// coordinates are the fractional ones plus bound coordinates whose reduced
// gradient points inward; a binding budget stays binding. Returns the
// direction scaled by an exact line search, or an empty vector.
Eigen::VectorXd face_newton_direction(const Eigen::VectorXd& x, const Eigen::VectorXd& grad, const CountsTable& counts,
                                      std::span<const double> costs, double budget, const std::vector<char>& locked,
                                      const UtilitySpec& spec) {
  constexpr double kBound = 1e-12;
  const auto n = static_cast<std::size_t>(x.size());
  const double used = weighted_cost(x, costs, locked);
  const bool tight = used >= budget - budget_slack(budget);

  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x(static_cast<Eigen::Index>(i));
    if (!locked[i] && v > kBound && v < 1.0 - kBound) interior.push_back(i);
  }
  // Budget multiplier estimate from the interior coordinates.
  double mu = 0.0;
  if (tight && !interior.empty()) {
    double num = 0.0, den = 0.0;
    for (std::size_t i : interior) {
      num += costs[i] * grad(static_cast<Eigen::Index>(i));
      den += costs[i] * costs[i];
    }
    mu = num / den;
  }
  std::vector<std::size_t> free = interior;
  for (std::size_t i = 0; i < n; ++i) {
    if (locked[i]) continue;
    const double v = x(static_cast<Eigen::Index>(i));
    const double reduced = grad(static_cast<Eigen::Index>(i)) - mu * costs[i];
    if ((v <= kBound && reduced > 0.0) || (v >= 1.0 - kBound && reduced < 0.0)) free.push_back(i);
  }
  if (free.empty()) return {};
  std::sort(free.begin(), free.end());

  const auto m = static_cast<Eigen::Index>(free.size());
  const Eigen::MatrixXd h = group_rep_hessian(x, counts, spec);
  Eigen::MatrixXd hf(m, m);
  Eigen::VectorXd gf(m), cf(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    gf(a) = grad(static_cast<Eigen::Index>(free[static_cast<std::size_t>(a)]));
    cf(a) = costs[free[static_cast<std::size_t>(a)]];
    for (Eigen::Index b = 0; b < m; ++b)
      hf(a, b) = h(static_cast<Eigen::Index>(free[static_cast<std::size_t>(a)]),
                   static_cast<Eigen::Index>(free[static_cast<std::size_t>(b)]));
  }
  const double delta = 1e-10 * std::max(hf.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  hf.diagonal().array() -= delta;

  Eigen::VectorXd step_f;
  if (tight) {
    // [H  -c; c' 0] [d; nu] = [-g; 0]
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
    kkt.topLeftCorner(m, m) = hf;
    kkt.topRightCorner(m, 1) = -cf;
    kkt.bottomLeftCorner(1, m) = cf.transpose();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
    rhs.head(m) = -gf;
    step_f = kkt.completeOrthogonalDecomposition().solve(rhs).head(m);
  } else {
    step_f = hf.completeOrthogonalDecomposition().solve(-gf);
  }
  if (!step_f.allFinite()) return {};

  Eigen::VectorXd dir = Eigen::VectorXd::Zero(x.size());
  for (Eigen::Index a = 0; a < m; ++a) dir(static_cast<Eigen::Index>(free[static_cast<std::size_t>(a)])) = step_f(a);
  if (!(grad.dot(dir) > 0.0)) return {};

  // Longest feasible multiple of dir.
  double max_step = 1e3;
  for (Eigen::Index i = 0; i < dir.size(); ++i) {
    if (dir(i) > 0.0) max_step = std::min(max_step, (1.0 - x(i)) / dir(i));
    if (dir(i) < 0.0) max_step = std::min(max_step, -x(i) / dir(i));
  }
  const double extra = weighted_cost(dir, costs, locked);
  if (!tight && extra > 0.0) max_step = std::min(max_step, std::max(0.0, budget - used) / extra);
  if (!(max_step > 0.0)) return {};
  const double step = exact_line_search(LineDerivative(counts, spec, x, dir), max_step);
  if (!(step > 0.0)) return {};
  return step * dir;
}

}  // namespace

std::string to_string(StepRule rule) {
  switch (rule) {
    case StepRule::pairwise: return "pairwise";
    case StepRule::away_line_search: return "away-step";
    case StepRule::diminishing: return "diminishing";
  }
  return "pairwise";
}

StepRule parse_step_rule(const std::string& name) {
  for (StepRule r : {StepRule::pairwise, StepRule::away_line_search, StepRule::diminishing})
    if (to_string(r) == name) return r;
  throw ConfigError("unknown step rule '" + name + "'");
}

void SolveOptions::validate() const {
  if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (!(gap_tol > 0.0)) throw ConfigError("gap_tol must be positive");
}

Eigen::VectorXd lmo_knapsack(const Eigen::VectorXd& grad, std::span<const double> costs, double budget,
                             const std::vector<char>& locked) {
  const auto n = static_cast<std::size_t>(grad.size());
  if (costs.size() != n || locked.size() != n) throw std::invalid_argument("lmo_knapsack: size mismatch");
  if (budget < 0.0) throw std::invalid_argument("lmo_knapsack: negative budget");

  Eigen::VectorXd d = Eigen::VectorXd::Zero(grad.size());
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (locked[i]) {
      d(static_cast<Eigen::Index>(i)) = 1.0;
      continue;
    }
    if (!(costs[i] > 0.0)) throw std::invalid_argument("lmo_knapsack: unlocked cluster with non-positive cost");
    if (grad(static_cast<Eigen::Index>(i)) > 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return grad(static_cast<Eigen::Index>(a)) / costs[a] > grad(static_cast<Eigen::Index>(b)) / costs[b];
  });
  double remaining = budget;
  for (std::size_t i : order) {
    if (remaining <= 0.0) break;
    if (costs[i] <= remaining) {
      d(static_cast<Eigen::Index>(i)) = 1.0;
      remaining -= costs[i];
    } else {
      d(static_cast<Eigen::Index>(i)) = remaining / costs[i];
      break;
    }
  }
  return d;
}

SolveResult solve_relaxation(const CountsTable& counts, std::span<const double> costs, double budget,
                             const std::vector<char>& committed, const UtilitySpec& spec, const SolveOptions& opts) {
  opts.validate();
  const auto n = static_cast<std::size_t>(counts.clusters());
  if (costs.size() != n || committed.size() != n) throw std::invalid_argument("solve_relaxation: size mismatch");
  if (budget < 0.0) throw InfeasibleError("no budget left for augmentation (" + std::to_string(budget) + ")");

  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    if (committed[i]) x(static_cast<Eigen::Index>(i)) = 1.0;

  SolveResult res;
  res.budget = budget;
  auto finish = [&](const Eigen::VectorXd& vertex, double gap) {
    res.s.values = x.cwiseMax(0.0).cwiseMin(1.0);
    res.s.committed = committed;
    res.utility = utility(res.s, counts, spec);
    res.gap = gap;
    res.last_vertex = vertex;
    res.budget_used = weighted_cost(res.s.values, costs, committed);
    res.feasible = res.budget_used <= budget + budget_slack(budget);
    return res;
  };

  if (budget == 0.0) return finish(x, 0.0);

  auto eval = [&](const Eigen::VectorXd& v) { return utility(InclusionVector{v, committed}, counts, spec); };
  auto grad_at = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd g = utility_gradient(InclusionVector{v, committed}, counts, spec);
    for (std::size_t i = 0; i < n; ++i)
      if (committed[i]) g(static_cast<Eigen::Index>(i)) = 0.0;
    return g;
  };

  Eigen::VectorXd grad = grad_at(x);
  if ((grad.array() == 0.0).all())
    throw std::domain_error("utility gradient vanishes on every unlocked cluster");

  // Active set for away steps: x = sum_j alpha_j * vertices_j.
  std::vector<Eigen::VectorXd> vertices{x};
  std::vector<double> alpha{1.0};

  double value = eval(x);
  double best = value;
  Eigen::VectorXd vertex = lmo_knapsack(grad, costs, budget, committed);
  double gap = grad.dot(vertex - x);

  // Line-search rules hand over to face Newton steps for the second half of
  // the iteration budget; first-order steps alone crawl when the optimum sits
  // on a face with several fractional coordinates.
  const bool polish = opts.step != StepRule::diminishing && spec.kind == UtilityKind::group_rep;
  const int first_order_iters = polish ? opts.max_iters / 2 : opts.max_iters;

  for (int t = 0; t < opts.max_iters; ++t) {
    if (gap <= opts.gap_tol * std::max(1.0, std::abs(value))) break;
    res.iterations = t + 1;

    if (t >= first_order_iters) {
      const Eigen::VectorXd move = face_newton_direction(x, grad, counts, costs, budget, committed, spec);
      Eigen::VectorXd trial = x;
      if (move.size() > 0) {
        trial += move;
        trial = trial.cwiseMax(0.0).cwiseMin(1.0);
      }
      if (move.size() > 0 && eval(trial) > value) {
        x = trial;
      } else {
        const Eigen::VectorXd dir = vertex - x;
        x += exact_line_search(LineDerivative(counts, spec, x, dir), 1.0) * dir;
      }
    } else if (opts.step == StepRule::diminishing) {
      const double step = 2.0 / (t + 2.0);
      x += step * (vertex - x);
    } else {
      std::size_t away = 0;
      double away_score = grad.dot(vertices[0]);
      for (std::size_t j = 1; j < vertices.size(); ++j) {
        const double score = grad.dot(vertices[j]);
        if (score < away_score) {
          away_score = score;
          away = j;
        }
      }
      const double away_gap = grad.dot(x) - away_score;
      if (opts.step == StepRule::pairwise) {
        // Move weight from the away atom straight to the LMO vertex.
        const Eigen::VectorXd dir = vertex - vertices[away];
        const double step = exact_line_search(LineDerivative(counts, spec, x, dir), alpha[away]);
        alpha[away] -= step;
        auto it = std::find_if(vertices.begin(), vertices.end(), [&](const Eigen::VectorXd& v) { return v == vertex; });
        if (it == vertices.end()) {
          vertices.push_back(vertex);
          alpha.push_back(step);
        } else {
          alpha[static_cast<std::size_t>(it - vertices.begin())] += step;
        }
        x += step * dir;
        if (alpha[away] <= 1e-15) {
          vertices.erase(vertices.begin() + static_cast<std::ptrdiff_t>(away));
          alpha.erase(alpha.begin() + static_cast<std::ptrdiff_t>(away));
        }
      } else if (gap >= away_gap || vertices.size() == 1) {
        const Eigen::VectorXd dir = vertex - x;
        const double step = exact_line_search(LineDerivative(counts, spec, x, dir), 1.0);
        for (double& a : alpha) a *= (1.0 - step);
        auto it = std::find_if(vertices.begin(), vertices.end(), [&](const Eigen::VectorXd& v) { return v == vertex; });
        if (it == vertices.end()) {
          vertices.push_back(vertex);
          alpha.push_back(step);
        } else {
          alpha[static_cast<std::size_t>(it - vertices.begin())] += step;
        }
        if (step >= 1.0) {
          vertices = {vertex};
          alpha = {1.0};
          x = vertex;
        } else {
          x += step * dir;
        }
      } else {
        const Eigen::VectorXd dir = x - vertices[away];
        const double max_step = alpha[away] / (1.0 - alpha[away]);
        const double step = exact_line_search(LineDerivative(counts, spec, x, dir), max_step);
        for (double& a : alpha) a *= (1.0 + step);
        alpha[away] -= step;
        x += step * dir;
        if (step >= max_step || alpha[away] <= 1e-15) {
          vertices.erase(vertices.begin() + static_cast<std::ptrdiff_t>(away));
          alpha.erase(alpha.begin() + static_cast<std::ptrdiff_t>(away));
        }
      }
    }

    value = eval(x);
    best = std::max(best, value);
    res.best_utility.push_back(best);
    grad = grad_at(x);
    vertex = lmo_knapsack(grad, costs, budget, committed);
    gap = grad.dot(vertex - x);
  }
  return finish(vertex, gap);
}

SolveResult solve_relaxation(const Dataset& ds, const CountsTable& counts, const CostModel& cm,
                             const UtilitySpec& spec, const SampleState& state, const SolveOptions& opts) {
  const std::vector<double> costs = cluster_costs(cm, ds);
  std::vector<char> committed(ds.clusters().size(), 0);
  for (std::size_t c : state.all_clusters()) committed[c] = 1;
  double budget = augmentation_budget(cm, ds, state);
  if (budget >= 0.0) budget -= set_cost(cm, ds, std::span<const std::size_t>(state.augment_clusters));
  return solve_relaxation(counts, costs, budget, committed, spec, opts);
}

std::vector<std::size_t> round_inclusion(const InclusionVector& s, std::span<const double> costs, double budget,
                                         Rng& rng) {
  if (costs.size() != s.size()) throw std::invalid_argument("round_inclusion: size mismatch");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!s.committed[i]) order.push_back(i);
  rng.shuffle(order);

  std::vector<std::size_t> chosen;
  double spent = 0.0;
  const double limit = budget + budget_slack(budget);
  for (std::size_t i : order) {
    if (!rng.bernoulli(s.values(static_cast<Eigen::Index>(i)))) continue;
    if (spent + costs[i] > limit) break;
    spent += costs[i];
    chosen.push_back(i);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace geosamp
