#include "geosamp/core_data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "geosamp/groups.hpp"
#include "geosamp/rng.hpp"

namespace geosamp {

namespace {

template <typename Map>
std::size_t lookup(const Map& map, const std::string& id, const char* what) {
  auto it = map.find(id);
  if (it == map.end()) throw DataError(std::string("unknown ") + what + " '" + id + "'");
  return it->second;
}

}  // namespace

Dataset Dataset::build(std::vector<Point> points, const std::vector<StratumSpec>& strata,
                       std::uint64_t split_seed, double test_fraction) {
  if (points.empty()) throw DataError("dataset has no points");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0))
    throw DataError("test fraction must lie in [0, 1)");

  Dataset ds;
  ds.split_seed_ = split_seed;
  ds.test_fraction_ = test_fraction;

  std::sort(points.begin(), points.end(),
            [](const Point& a, const Point& b) { return a.id < b.id; });
  ds.feature_dim_ = points.front().features.size();
  if (ds.feature_dim_ == 0) throw DataError("feature dimension is zero");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& p = points[i];
    if (p.id.empty()) throw DataError("point with empty identifier");
    if (i > 0 && points[i - 1].id == p.id) throw DataError("duplicate point '" + p.id + "'");
    if (p.features.size() != ds.feature_dim_)
      throw DataError("point '" + p.id + "' has feature dimension " +
                      std::to_string(p.features.size()) + ", expected " +
                      std::to_string(ds.feature_dim_));
    for (double f : p.features)
      if (!std::isfinite(f)) throw DataError("point '" + p.id + "' has a non-finite feature");
    if (p.label && !std::isfinite(*p.label))
      throw DataError("point '" + p.id + "' has a non-finite label");
  }
  ds.points_ = std::move(points);

  // Strata and the cluster table.
  std::vector<StratumSpec> sorted_strata = strata;
  std::sort(sorted_strata.begin(), sorted_strata.end(),
            [](const StratumSpec& a, const StratumSpec& b) { return a.id < b.id; });
  std::map<std::string, std::string> cluster_to_stratum;
  for (std::size_t s = 0; s < sorted_strata.size(); ++s) {
    const auto& spec = sorted_strata[s];
    if (spec.id.empty()) throw DataError("stratum with empty identifier");
    if (s > 0 && sorted_strata[s - 1].id == spec.id)
      throw DataError("duplicate stratum '" + spec.id + "'");
    for (const auto& cid : spec.cluster_ids) {
      if (cid.empty()) throw DataError("cluster with empty identifier in stratum '" + spec.id + "'");
      if (!cluster_to_stratum.emplace(cid, spec.id).second)
        throw DataError("cluster '" + cid + "' listed in more than one stratum");
    }
  }
  for (std::size_t s = 0; s < sorted_strata.size(); ++s) {
    Stratum st;
    st.id = sorted_strata[s].id;
    st.in_initial = sorted_strata[s].in_initial;
    ds.stratum_lookup_.emplace(st.id, s);
    ds.strata_.push_back(std::move(st));
  }
  for (const auto& [cid, sid] : cluster_to_stratum) {  // std::map: ascending id
    Cluster c;
    c.id = cid;
    c.stratum_id = sid;
    const std::size_t ci = ds.clusters_.size();
    ds.cluster_lookup_.emplace(cid, ci);
    const std::size_t si = ds.stratum_lookup_.at(sid);
    ds.strata_[si].clusters.push_back(ci);
    ds.cluster_stratum_.push_back(si);
    ds.clusters_.push_back(std::move(c));
  }

  ds.point_cluster_.resize(ds.points_.size());
  for (std::size_t i = 0; i < ds.points_.size(); ++i) {
    const Point& p = ds.points_[i];
    auto it = ds.cluster_lookup_.find(p.cluster_id);
    if (it == ds.cluster_lookup_.end())
      throw DataError("point '" + p.id + "' references unknown cluster '" + p.cluster_id + "'");
    if (!ds.stratum_lookup_.contains(p.stratum_id))
      throw DataError("point '" + p.id + "' references unknown stratum '" + p.stratum_id + "'");
    Cluster& c = ds.clusters_[it->second];
    if (c.stratum_id != p.stratum_id)
      throw DataError("point '" + p.id + "' has stratum '" + p.stratum_id + "' but cluster '" +
                      c.id + "' belongs to stratum '" + c.stratum_id + "'");
    c.members.push_back(i);
    ds.point_cluster_[i] = it->second;
    ds.point_lookup_.emplace(p.id, i);
  }
  for (const auto& c : ds.clusters_)
    if (c.members.empty()) throw DataError("cluster '" + c.id + "' has no points");

  // Split: a pure function of the seed, the fraction and the labeled ids.
  std::vector<std::size_t> labeled;
  for (std::size_t i = 0; i < ds.points_.size(); ++i)
    if (ds.points_[i].label) labeled.push_back(i);
  Rng rng(derive_seed(split_seed, "split"));
  rng.shuffle(labeled);
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(labeled.size())));
  ds.train_.assign(ds.points_.size(), 0);
  ds.test_.assign(ds.points_.size(), 0);
  for (std::size_t j = 0; j < labeled.size(); ++j) (j < n_test ? ds.test_ : ds.train_)[labeled[j]] = 1;

  ds.eligible_.resize(ds.clusters_.size());
  for (std::size_t c = 0; c < ds.clusters_.size(); ++c)
    for (std::size_t p : ds.clusters_[c].members)
      if (ds.train_[p]) ds.eligible_[c].push_back(p);
  return ds;
}

std::size_t Dataset::point_index(const std::string& id) const {
  return lookup(point_lookup_, id, "point");
}
std::size_t Dataset::cluster_index(const std::string& id) const {
  return lookup(cluster_lookup_, id, "cluster");
}
std::size_t Dataset::stratum_index(const std::string& id) const {
  return lookup(stratum_lookup_, id, "stratum");
}

std::vector<std::size_t> Dataset::test_points() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (test_[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> Dataset::train_points() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (train_[i]) out.push_back(i);
  return out;
}

Eigen::MatrixXd Dataset::design_matrix(std::span<const std::size_t> points) const {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(feature_dim_));
  for (std::size_t r = 0; r < points.size(); ++r) {
    const auto& f = points_.at(points[r]).features;
    for (std::size_t j = 0; j < feature_dim_; ++j)
      X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = f[j];
  }
  return X;
}

Eigen::VectorXd Dataset::label_vector(std::span<const std::size_t> points) const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(points.size()));
  for (std::size_t r = 0; r < points.size(); ++r) {
    const Point& p = points_.at(points[r]);
    if (!p.label) throw DataError("point '" + p.id + "' has an unknown label");
    y(static_cast<Eigen::Index>(r)) = *p.label;
  }
  return y;
}

Dataset Dataset::with_initial_strata(const std::set<std::size_t>& strata) const {
  Dataset out = *this;
  for (std::size_t s = 0; s < out.strata_.size(); ++s) out.strata_[s].in_initial = strata.contains(s);
  return out;
}

bool Dataset::operator==(const Dataset& o) const {
  return points_ == o.points_ && clusters_ == o.clusters_ && strata_ == o.strata_ &&
         feature_dim_ == o.feature_dim_ && split_seed_ == o.split_seed_ &&
         test_fraction_ == o.test_fraction_ && train_ == o.train_ && test_ == o.test_;
}

std::string to_string(BudgetScope scope) {
  return scope == BudgetScope::total ? "total" : "augmentation";
}

BudgetScope parse_budget_scope(const std::string& s) {
  if (s == "total") return BudgetScope::total;
  if (s == "augmentation") return BudgetScope::augmentation;
  throw ConfigError("budget_scope must be 'total' or 'augmentation', got '" + s + "'");
}

void CostModel::validate() const {
  if (!(c1 > 0.0)) throw ConfigError("c1 must be positive");
  if (!(c2 >= c1)) throw ConfigError("c2 must be at least c1");
  if (!(budget >= 0.0)) throw ConfigError("budget must be non-negative");
  for (const auto& [id, cost] : overrides)
    if (!(cost > 0.0)) throw ConfigError("override cost for cluster '" + id + "' must be positive");
}

double cluster_cost(const CostModel& cm, const Cluster& cluster) {
  if (auto it = cm.overrides.find(cluster.id); it != cm.overrides.end()) return it->second;
  return cm.initial_strata.contains(cluster.stratum_id) ? cm.c1 : cm.c2;
}

std::vector<double> cluster_costs(const CostModel& cm, const Dataset& ds) {
  std::vector<double> out;
  out.reserve(ds.clusters().size());
  for (const auto& c : ds.clusters()) out.push_back(cluster_cost(cm, c));
  return out;
}

double set_cost(const CostModel& cm, const Dataset& ds, std::span<const std::string> cluster_ids) {
  double total = 0.0;
  for (const auto& id : cluster_ids) total += cluster_cost(cm, ds.clusters()[ds.cluster_index(id)]);
  return total;
}

double set_cost(const CostModel& cm, const Dataset& ds, std::span<const std::size_t> clusters) {
  double total = 0.0;
  for (std::size_t c : clusters) {
    if (c >= ds.clusters().size()) throw DataError("cluster index out of range");
    total += cluster_cost(cm, ds.clusters()[c]);
  }
  return total;
}

std::vector<std::size_t> SampleState::all_clusters() const {
  std::vector<std::size_t> out = initial_clusters;
  out.insert(out.end(), augment_clusters.begin(), augment_clusters.end());
  return out;
}

std::vector<std::size_t> SampleState::labeled_points() const {
  std::vector<std::size_t> out;
  for (const auto& [c, pts] : labeled) out.insert(out.end(), pts.begin(), pts.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t SampleState::labeled_count() const {
  std::size_t n = 0;
  for (const auto& [c, pts] : labeled) n += pts.size();
  return n;
}

bool SampleState::contains(std::size_t cluster) const {
  return std::find(initial_clusters.begin(), initial_clusters.end(), cluster) !=
             initial_clusters.end() ||
         std::find(augment_clusters.begin(), augment_clusters.end(), cluster) !=
             augment_clusters.end();
}

CostModel bind_initial_strata(CostModel cm, const Dataset& ds, const SampleState& state) {
  cm.initial_strata.clear();
  for (std::size_t s : state.initial_strata) cm.initial_strata.insert(ds.strata().at(s).id);
  return cm;
}

double augmentation_budget(const CostModel& cm, const Dataset& ds, const SampleState& state) {
  if (cm.scope == BudgetScope::augmentation) return cm.budget;
  return cm.budget - set_cost(cm, ds, std::span<const std::size_t>(state.initial_clusters));
}

CountsTable expected_counts(const Dataset& ds, const GroupModel& gm, int k) {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (gm.num_points() != ds.points().size())
    throw DataError("group model does not match the dataset");
  const auto n_clusters = static_cast<Eigen::Index>(ds.clusters().size());
  CountsTable t{Eigen::VectorXd::Zero(n_clusters), Eigen::MatrixXd::Zero(n_clusters, gm.num_groups())};
  for (Eigen::Index c = 0; c < n_clusters; ++c) {
    const auto& members = ds.eligible_members(static_cast<std::size_t>(c));
    if (members.empty()) continue;
    const double size = static_cast<double>(members.size());
    const double e = std::min(static_cast<double>(k), size);
    t.total(c) = e;
    for (std::size_t p : members) t.by_group(c, gm.group_of(p)) += 1.0;
    t.by_group.row(c) *= e / size;
  }
  return t;
}

CountsTable sample_counts(const Dataset& ds, const GroupModel& gm, int k, const SampleState& state) {
  CountsTable t = expected_counts(ds, gm, k);
  for (std::size_t c : state.all_clusters()) {
    const auto ci = static_cast<Eigen::Index>(c);
    t.total(ci) = 0.0;
    t.by_group.row(ci).setZero();
    if (auto it = state.labeled.find(c); it != state.labeled.end()) {
      for (std::size_t p : it->second) {
        t.total(ci) += 1.0;
        t.by_group(ci, gm.group_of(p)) += 1.0;
      }
    }
  }
  return t;
}

}  // namespace geosamp
