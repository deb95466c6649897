#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geosamp/core_data.hpp"
#include "geosamp/groups.hpp"

namespace geosamp {

/// Per-cluster inclusion probabilities. Committed clusters are fixed at 1.
struct InclusionVector {
  Eigen::VectorXd values;
  std::vector<char> committed;

  static InclusionVector zeros(std::size_t n);
  /// Binary vector with ones on the sample's clusters, committed on S0.
  static InclusionVector from_state(std::size_t n, const SampleState& state);

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  /// Throws std::invalid_argument when a value leaves [0, 1] or a committed
  /// entry differs from 1.
  void validate() const;
};

enum class UtilityKind { size, group_rep };

std::string to_string(UtilityKind kind);
UtilityKind parse_utility_kind(const std::string& s);

struct UtilitySpec {
  static constexpr double kDefaultLambda = 0.5;
  static constexpr double kDefaultEpsilon = 1e-6;

  UtilityKind kind = UtilityKind::size;
  double lambda = kDefaultLambda;
  double epsilon = kDefaultEpsilon;
  std::shared_ptr<const GroupModel> groups;

  static UtilitySpec size_spec() { return UtilitySpec{}; }
  static UtilitySpec group_rep(std::shared_ptr<const GroupModel> groups, double lambda = kDefaultLambda,
                               double epsilon = kDefaultEpsilon);
};

/// Relaxed expected labeled-point count: sum_i s_i e_i.
double size_utility(const InclusionVector& s, const CountsTable& counts);

/// -lambda sum_g gamma_g (n_g + eps)^(-1/2) - (1 - lambda)(n + eps)^(-1/2)
/// with n_g = sum_i s_i e_{i,g} and n = sum_i s_i e_i.
double group_rep_utility(const InclusionVector& s, const CountsTable& counts, const UtilitySpec& spec);

Eigen::VectorXd group_rep_gradient(const InclusionVector& s, const CountsTable& counts, const UtilitySpec& spec);

/// Dispatch on spec.kind.
double utility(const InclusionVector& s, const CountsTable& counts, const UtilitySpec& spec);
Eigen::VectorXd utility_gradient(const InclusionVector& s, const CountsTable& counts, const UtilitySpec& spec);

/// Group-rep evaluated directly on aggregate counts (n_g per group, n total).
double group_rep_from_totals(const Eigen::VectorXd& n_group, double n, const std::vector<double>& gamma,
                             double lambda, double epsilon);

/// Utility of a realized sample, using the counts of actually labeled points.
double utility_of_sample(const SampleState& state, const UtilitySpec& spec);

}  // namespace geosamp
