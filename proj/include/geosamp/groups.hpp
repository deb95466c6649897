#pragma once

#include <string>
#include <vector>

#include "geosamp/core_data.hpp"

namespace geosamp {

enum class GroupKind { admin, feature_kmeans, auxiliary_kmeans };

std::string to_string(GroupKind kind);
GroupKind parse_group_kind(const std::string& s);

/// Assignment of every point to one of G groups plus population shares.
class GroupModel {
 public:
  GroupModel() = default;
  /// Shares computed over all points. Throws DataError on a negative or
  /// out-of-range group id.
  GroupModel(std::vector<int> group_of, int num_groups, GroupKind kind);
  /// Externally supplied shares; must sum to 1 within 1e-9.
  GroupModel(std::vector<int> group_of, std::vector<double> gamma, GroupKind kind);

  int num_groups() const { return static_cast<int>(gamma_.size()); }
  int group_of(std::size_t point) const { return group_of_[point]; }
  const std::vector<int>& assignment() const { return group_of_; }
  const std::vector<double>& gamma() const { return gamma_; }
  GroupKind kind() const { return kind_; }
  std::size_t num_points() const { return group_of_.size(); }

  bool operator==(const GroupModel&) const = default;

 private:
  std::vector<int> group_of_;
  std::vector<double> gamma_;
  GroupKind kind_ = GroupKind::admin;
};

/// One group per stratum.
GroupModel admin_groups(const Dataset& ds);

}  // namespace geosamp
