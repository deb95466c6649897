#include "geosamp/groups.hpp"

#include <cmath>
#include <numeric>

namespace geosamp {

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::admin: return "admin";
    case GroupKind::feature_kmeans: return "feature-kmeans";
    case GroupKind::auxiliary_kmeans: return "auxiliary-kmeans";
  }
  return "admin";
}

GroupKind parse_group_kind(const std::string& s) {
  if (s == "admin") return GroupKind::admin;
  if (s == "feature-kmeans" || s == "feature" || s == "image") return GroupKind::feature_kmeans;
  if (s == "auxiliary-kmeans" || s == "auxiliary" || s == "aux") return GroupKind::auxiliary_kmeans;
  throw ConfigError("unknown group kind '" + s + "'");
}

GroupModel::GroupModel(std::vector<int> group_of, int num_groups, GroupKind kind)
    : group_of_(std::move(group_of)), kind_(kind) {
  if (num_groups < 1) throw DataError("group model needs at least one group");
  if (group_of_.empty()) throw DataError("group model has no points");
  gamma_.assign(static_cast<std::size_t>(num_groups), 0.0);
  for (int g : group_of_) {
    if (g < 0 || g >= num_groups) throw DataError("group id " + std::to_string(g) + " out of range");
    gamma_[static_cast<std::size_t>(g)] += 1.0;
  }
  for (double& v : gamma_) v /= static_cast<double>(group_of_.size());
}

GroupModel::GroupModel(std::vector<int> group_of, std::vector<double> gamma, GroupKind kind)
    : group_of_(std::move(group_of)), gamma_(std::move(gamma)), kind_(kind) {
  if (gamma_.empty()) throw DataError("group model needs at least one group");
  double total = 0.0;
  for (double v : gamma_) {
    if (!(v >= 0.0)) throw DataError("group shares must be non-negative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DataError("group shares must sum to 1");
  const int g_count = static_cast<int>(gamma_.size());
  for (int g : group_of_)
    if (g < 0 || g >= g_count) throw DataError("group id " + std::to_string(g) + " out of range");
}

GroupModel admin_groups(const Dataset& ds) {
  std::vector<int> group_of(ds.points().size());
  for (std::size_t p = 0; p < group_of.size(); ++p)
    group_of[p] = static_cast<int>(ds.stratum_of_cluster(ds.cluster_of_point(p)));
  return GroupModel(std::move(group_of), static_cast<int>(ds.strata().size()), GroupKind::admin);
}

}  // namespace geosamp
