#include "geosamp/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace geosamp {

namespace {

std::vector<char> sampled_mask(const Dataset& ds, const SampleState& state) {
  std::vector<char> mask(ds.clusters().size(), 0);
  for (std::size_t c : state.all_clusters()) mask[c] = 1;
  return mask;
}

void add_cluster(const Dataset& ds, SampleState& st, std::size_t cluster, double cost, Rng& rng) {
  st.augment_clusters.push_back(cluster);
  st.labeled[cluster] = label_cluster(ds, cluster, st.k, rng);
  st.spent += cost;
}

void check_budget(double budget) {
  if (!(budget >= 0.0)) throw ConfigError("augmentation budget must be non-negative");
}

std::string seed_tag(const char* name, double budget) {
  return std::string(name) + "(budget=" + std::to_string(budget) + ")";
}

SampleState from_points(const Dataset& ds, const std::vector<std::size_t>& points) {
  SampleState st;
  for (std::size_t p : points) st.labeled[ds.cluster_of_point(p)].push_back(p);
  std::size_t largest = 1;
  for (auto& [c, pts] : st.labeled) {
    std::sort(pts.begin(), pts.end());
    st.initial_clusters.push_back(c);
    largest = std::max(largest, pts.size());
  }
  st.k = static_cast<int>(largest);
  return st;
}

}  // namespace

void SamplerConfig::validate(const Dataset& ds) const {
  if (strata_count < 1 || static_cast<std::size_t>(strata_count) > ds.strata().size())
    throw ConfigError("strata count N must lie in [1, " + std::to_string(ds.strata().size()) + "]");
  if (k < 1) throw ConfigError("k must be at least 1");
  if (initial_size < 1) throw ConfigError("initial sample size must be at least 1");
}

void ConvenienceConfig::validate() const {
  if (anchors.empty()) throw ConfigError("convenience sampling needs at least one anchor");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
}

std::set<std::size_t> choose_strata(const Dataset& ds, int count, std::uint64_t strata_seed) {
  std::vector<std::size_t> idx(ds.strata().size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(derive_seed(strata_seed, "strata"));
  rng.shuffle(idx);
  return {idx.begin(), idx.begin() + std::min<std::ptrdiff_t>(count, static_cast<std::ptrdiff_t>(idx.size()))};
}

std::vector<std::size_t> label_cluster(const Dataset& ds, std::size_t cluster, int k, Rng& rng) {
  std::vector<std::size_t> pool = ds.eligible_members(cluster);
  const std::size_t take = std::min(pool.size(), static_cast<std::size_t>(std::max(k, 0)));
  // Partial Fisher-Yates: the first `take` slots become a uniform subset.
  for (std::size_t i = 0; i < take; ++i) std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
  pool.resize(take);
  std::sort(pool.begin(), pool.end());
  return pool;
}

SampleState draw_initial_sample(const Dataset& ds, const SamplerConfig& cfg, Rng& rng) {
  cfg.validate(ds);
  SampleState st;
  st.k = cfg.k;
  st.initial_strata = choose_strata(ds, cfg.strata_count, cfg.strata_seed);

  std::vector<std::size_t> candidates;
  std::size_t reachable = 0;
  for (std::size_t s : st.initial_strata)
    for (std::size_t c : ds.strata()[s].clusters)
      if (ds.eligible_size(c) > 0) {
        candidates.push_back(c);
        reachable += std::min<std::size_t>(ds.eligible_size(c), static_cast<std::size_t>(cfg.k));
      }
  std::sort(candidates.begin(), candidates.end());
  if (reachable < cfg.initial_size)
    throw InfeasibleError("initial sample target " + std::to_string(cfg.initial_size) +
                          " exceeds the " + std::to_string(reachable) + " points reachable in the chosen strata");

  std::size_t labeled = 0;
  std::vector<double> weights;
  while (labeled < cfg.initial_size) {
    weights.clear();
    for (std::size_t c : candidates) weights.push_back(static_cast<double>(ds.eligible_size(c)));
    const std::size_t pick = rng.weighted_index(weights);
    const std::size_t c = candidates[pick];
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
    auto pts = label_cluster(ds, c, cfg.k, rng);
    if (labeled + pts.size() > cfg.initial_size) {
      // Trim uniformly: drop a random subset of the surplus.
      rng.shuffle(pts);
      pts.resize(cfg.initial_size - labeled);
      std::sort(pts.begin(), pts.end());
    }
    labeled += pts.size();
    st.initial_clusters.push_back(c);
    st.labeled[c] = std::move(pts);
  }
  std::sort(st.initial_clusters.begin(), st.initial_clusters.end());
  st.lineage.push_back("initial(N=" + std::to_string(cfg.strata_count) + ",k=" + std::to_string(cfg.k) +
                       ",size=" + std::to_string(cfg.initial_size) + ",strata_seed=" +
                       std::to_string(cfg.strata_seed) + ")");
  return st;
}

SampleState default_cluster_augment(const Dataset& ds, const SampleState& state, const CostModel& cm_in,
                                    double budget, Rng& rng) {
  check_budget(budget);
  const CostModel cm = bind_initial_strata(cm_in, ds, state);
  const auto costs = cluster_costs(cm, ds);
  const auto taken = sampled_mask(ds, state);

  std::vector<std::size_t> candidates;
  for (std::size_t s : state.initial_strata)
    for (std::size_t c : ds.strata()[s].clusters)
      if (!taken[c] && ds.eligible_size(c) > 0) candidates.push_back(c);
  std::sort(candidates.begin(), candidates.end());

  SampleState st = state;
  st.infeasible = false;
  double remaining = budget;
  std::vector<std::size_t> affordable;
  std::vector<double> weights;
  while (true) {
    affordable.clear();
    weights.clear();
    for (std::size_t c : candidates)
      if (costs[c] <= remaining) {
        affordable.push_back(c);
        weights.push_back(static_cast<double>(ds.eligible_size(c)));
      }
    if (affordable.empty()) break;
    const std::size_t c = affordable[rng.weighted_index(weights)];
    candidates.erase(std::find(candidates.begin(), candidates.end(), c));
    add_cluster(ds, st, c, costs[c], rng);
    remaining -= costs[c];
  }
  // Out of in-strata clusters while the budget still buys one more.
  if (candidates.empty() && remaining >= cm.c1) st.infeasible = true;
  st.lineage.push_back(seed_tag("default", budget));
  return st;
}

SampleState greedy_size_augment(const Dataset& ds, const SampleState& state, const CostModel& cm_in,
                                double budget, Rng& rng) {
  check_budget(budget);
  const CostModel cm = bind_initial_strata(cm_in, ds, state);
  const auto costs = cluster_costs(cm, ds);
  const auto taken = sampled_mask(ds, state);

  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < ds.clusters().size(); ++c)
    if (!taken[c] && ds.eligible_size(c) > 0) order.push_back(c);
  auto expected = [&](std::size_t c) { return std::min<std::size_t>(ds.eligible_size(c), static_cast<std::size_t>(state.k)); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (costs[a] != costs[b]) return costs[a] < costs[b];
    return expected(a) > expected(b);
  });

  SampleState st = state;
  st.infeasible = false;
  double remaining = budget;
  for (std::size_t c : order) {
    if (costs[c] > remaining) continue;
    add_cluster(ds, st, c, costs[c], rng);
    remaining -= costs[c];
  }
  st.lineage.push_back(seed_tag("greedy", budget));
  return st;
}

SampleState random_cluster_augment(const Dataset& ds, const SampleState& state, const CostModel& cm_in,
                                   double budget, Rng& rng) {
  check_budget(budget);
  const CostModel cm = bind_initial_strata(cm_in, ds, state);
  const auto costs = cluster_costs(cm, ds);
  const auto taken = sampled_mask(ds, state);

  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < ds.clusters().size(); ++c)
    if (!taken[c] && ds.eligible_size(c) > 0) order.push_back(c);
  rng.shuffle(order);

  SampleState st = state;
  st.infeasible = false;
  double remaining = budget;
  for (std::size_t c : order) {
    if (costs[c] > remaining) continue;
    add_cluster(ds, st, c, costs[c], rng);
    remaining -= costs[c];
  }
  st.lineage.push_back(seed_tag("random", budget));
  return st;
}

OptimizedAugment optimized_augment_detailed(const Dataset& ds, const SampleState& state, const CostModel& cm_in,
                                            double budget, const UtilitySpec& spec, const SolveOptions& opts,
                                            Rng& rng) {
  check_budget(budget);
  const CostModel cm = bind_initial_strata(cm_in, ds, state);
  const auto costs = cluster_costs(cm, ds);

  if (spec.kind == UtilityKind::group_rep && !spec.groups)
    throw std::invalid_argument("group-rep utility requires a group model");
  UtilitySpec effective = spec;
  if (!effective.groups)
    effective.groups = std::make_shared<GroupModel>(std::vector<int>(ds.points().size(), 0), 1, GroupKind::admin);
  const CountsTable counts = sample_counts(ds, *effective.groups, state.k, state);

  std::vector<char> committed(ds.clusters().size(), 0);
  for (std::size_t c : state.all_clusters()) committed[c] = 1;

  OptimizedAugment out;
  out.state = state;
  out.state.infeasible = false;
  bool any_gain = false;
  for (std::size_t c = 0; c < committed.size(); ++c)
    if (!committed[c] && counts.total(static_cast<Eigen::Index>(c)) > 0.0 && costs[c] <= budget) any_gain = true;

  if (!any_gain) {
    out.solve.s = InclusionVector::zeros(committed.size());
    out.solve.s.committed = committed;
    for (std::size_t c = 0; c < committed.size(); ++c)
      if (committed[c]) out.solve.s.values(static_cast<Eigen::Index>(c)) = 1.0;
    out.solve.budget = budget;
    out.solve.feasible = true;
    out.solve.utility = utility(out.solve.s, counts, effective);
  } else {
    out.solve = solve_relaxation(counts, costs, budget, committed, effective, opts);
    out.chosen = round_inclusion(out.solve.s, costs, budget, rng);
    for (std::size_t c : out.chosen) add_cluster(ds, out.state, c, costs[c], rng);
  }
  out.state.lineage.push_back(seed_tag(spec.kind == UtilityKind::size ? "optimized-size" : "optimized-rep", budget));
  return out;
}

SampleState optimized_augment(const Dataset& ds, const SampleState& state, const CostModel& cm, double budget,
                              const UtilitySpec& spec, const SolveOptions& opts, Rng& rng) {
  return optimized_augment_detailed(ds, state, cm, budget, spec, opts, rng).state;
}

std::vector<double> convenience_weights(const Dataset& ds, const ConvenienceConfig& cfg) {
  cfg.validate();
  const auto pts = ds.train_points();
  std::vector<double> dist(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const Point& p = ds.points()[pts[j]];
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [ax, ay] : cfg.anchors) best = std::min(best, std::hypot(p.x - ax, p.y - ay));
    dist[j] = best;
  }
  if (dist.empty()) return {};
  const auto [lo, hi] = std::minmax_element(dist.begin(), dist.end());
  const double min_d = *lo;
  const double range = *hi - *lo;
  // Max-min normalized distance, then softmax of its negation; the largest
  // logit belongs to the nearest point (normalized distance 0).
  std::vector<double> w(dist.size());
  double total = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    const double norm = range > 0.0 ? (dist[j] - min_d) / range : 0.0;
    w[j] = std::exp(-norm / cfg.temperature);
    total += w[j];
  }
  for (double& v : w) v /= total;
  return w;
}

SampleState convenience_sample(const Dataset& ds, const ConvenienceConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto pts = ds.train_points();
  if (cfg.size > pts.size())
    throw InfeasibleError("convenience sample of " + std::to_string(cfg.size) + " exceeds the " +
                          std::to_string(pts.size()) + " eligible points");
  // Log-weights kept explicitly so tiny temperatures do not underflow.
  std::vector<double> dist(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const Point& p = ds.points()[pts[j]];
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [ax, ay] : cfg.anchors) best = std::min(best, std::hypot(p.x - ax, p.y - ay));
    dist[j] = best;
  }
  const auto [lo, hi] = std::minmax_element(dist.begin(), dist.end());
  const double min_d = pts.empty() ? 0.0 : *lo;
  const double range = pts.empty() ? 0.0 : *hi - *lo;

  // Successive weighted sampling without replacement via exponential keys:
  // key_j = log(-log u_j) - log w_j; the `size` smallest keys are selected.
  std::vector<std::pair<double, std::size_t>> keys(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    double u;
    do {
      u = rng.uniform();
    } while (u <= 0.0);
    const double norm = range > 0.0 ? (dist[j] - min_d) / range : 0.0;
    keys[j] = {std::log(-std::log(u)) + norm / cfg.temperature, pts[j]};
  }
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(cfg.size), keys.end());
  std::vector<std::size_t> chosen;
  for (std::size_t j = 0; j < cfg.size; ++j) chosen.push_back(keys[j].second);
  SampleState st = from_points(ds, chosen);
  st.lineage.push_back("convenience(tau=" + std::to_string(cfg.temperature) + ",size=" + std::to_string(cfg.size) + ")");
  return st;
}

SampleState random_point_sample(const Dataset& ds, std::size_t size, Rng& rng) {
  auto pts = ds.train_points();
  if (size > pts.size())
    throw InfeasibleError("random sample of " + std::to_string(size) + " exceeds the " +
                          std::to_string(pts.size()) + " eligible points");
  for (std::size_t i = 0; i < size; ++i) std::swap(pts[i], pts[i + rng.index(pts.size() - i)]);
  pts.resize(size);
  SampleState st = from_points(ds, pts);
  st.lineage.push_back("random-points(size=" + std::to_string(size) + ")");
  return st;
}

}  // namespace geosamp
