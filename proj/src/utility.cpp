#include "geosamp/utility.hpp"

#include <cmath>
#include <stdexcept>

namespace geosamp {

namespace {

void check_dims(const InclusionVector& s, const CountsTable& counts) {
  if (static_cast<Eigen::Index>(s.size()) != counts.clusters())
    throw std::invalid_argument("inclusion vector has " + std::to_string(s.size()) +
                                " entries but counts cover " + std::to_string(counts.clusters()) +
                                " clusters");
}

void check_group_spec(const UtilitySpec& spec, const CountsTable& counts) {
  if (!spec.groups) throw std::invalid_argument("group-rep utility requires a group model");
  if (spec.groups->num_groups() != counts.groups())
    throw std::invalid_argument("group model and counts disagree on the number of groups");
  if (!(spec.lambda >= 0.0 && spec.lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  if (!(spec.epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
}

// x^(-1/2) with a domain check on the weighted term.
double inv_sqrt_term(double weight, double x) {
  if (weight == 0.0) return 0.0;
  if (!(x > 0.0)) throw std::domain_error("group-rep utility undefined for an empty count with epsilon = 0");
  return weight / std::sqrt(x);
}

}  // namespace

InclusionVector InclusionVector::zeros(std::size_t n) {
  return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)), std::vector<char>(n, 0)};
}

InclusionVector InclusionVector::from_state(std::size_t n, const SampleState& state) {
  InclusionVector s = zeros(n);
  for (std::size_t c : state.initial_clusters) {
    s.values(static_cast<Eigen::Index>(c)) = 1.0;
    s.committed[c] = 1;
  }
  for (std::size_t c : state.augment_clusters) s.values(static_cast<Eigen::Index>(c)) = 1.0;
  return s;
}

void InclusionVector::validate() const {
  if (committed.size() != size()) throw std::invalid_argument("committed mask size mismatch");
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = values(i);
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("inclusion value outside [0, 1]");
    if (committed[static_cast<std::size_t>(i)] && v != 1.0)
      throw std::invalid_argument("committed cluster with inclusion below 1");
  }
}

std::string to_string(UtilityKind kind) { return kind == UtilityKind::size ? "size" : "group_rep"; }

UtilityKind parse_utility_kind(const std::string& s) {
  if (s == "size") return UtilityKind::size;
  if (s == "group_rep" || s == "group-rep" || s == "rep") return UtilityKind::group_rep;
  throw ConfigError("unknown utility '" + s + "'");
}

UtilitySpec UtilitySpec::group_rep(std::shared_ptr<const GroupModel> groups, double lambda, double epsilon) {
  UtilitySpec spec;
  spec.kind = UtilityKind::group_rep;
  spec.lambda = lambda;
  spec.epsilon = epsilon;
  spec.groups = std::move(groups);
  return spec;
}

double size_utility(const InclusionVector& s, const CountsTable& counts) {
  check_dims(s, counts);
  return s.values.dot(counts.total);
}

double group_rep_from_totals(const Eigen::VectorXd& n_group, double n, const std::vector<double>& gamma,
                             double lambda, double epsilon) {
  double group_term = 0.0;
  for (Eigen::Index g = 0; g < n_group.size(); ++g)
    group_term += inv_sqrt_term(gamma[static_cast<std::size_t>(g)], n_group(g) + epsilon);
  return -lambda * group_term - inv_sqrt_term(1.0 - lambda, n + epsilon);
}

double group_rep_utility(const InclusionVector& s, const CountsTable& counts, const UtilitySpec& spec) {
  check_dims(s, counts);
  check_group_spec(spec, counts);
  const Eigen::VectorXd n_group = counts.by_group.transpose() * s.values;
  const double n = counts.total.dot(s.values);
  return group_rep_from_totals(n_group, n, spec.groups->gamma(), spec.lambda, spec.epsilon);
}

Eigen::VectorXd group_rep_gradient(const InclusionVector& s, const CountsTable& counts, const UtilitySpec& spec) {
  check_dims(s, counts);
  check_group_spec(spec, counts);
  const Eigen::VectorXd n_group = counts.by_group.transpose() * s.values;
  const double n = counts.total.dot(s.values);
  const auto& gamma = spec.groups->gamma();
  // d/dx of -(x + eps)^(-1/2) is (1/2)(x + eps)^(-3/2).
  Eigen::VectorXd group_weight(n_group.size());
  for (Eigen::Index g = 0; g < n_group.size(); ++g) {
    const double w = spec.lambda * gamma[static_cast<std::size_t>(g)];
    group_weight(g) = w == 0.0 ? 0.0 : w * 0.5 * std::pow(n_group(g) + spec.epsilon, -1.5);
  }
  const double size_weight = spec.lambda == 1.0 ? 0.0 : (1.0 - spec.lambda) * 0.5 * std::pow(n + spec.epsilon, -1.5);
  Eigen::VectorXd grad = counts.by_group * group_weight + size_weight * counts.total;
  for (Eigen::Index i = 0; i < grad.size(); ++i)
    if (counts.total(i) == 0.0) grad(i) = 0.0;
  return grad;
}

double utility(const InclusionVector& s, const CountsTable& counts, const UtilitySpec& spec) {
  return spec.kind == UtilityKind::size ? size_utility(s, counts) : group_rep_utility(s, counts, spec);
}

Eigen::VectorXd utility_gradient(const InclusionVector& s, const CountsTable& counts, const UtilitySpec& spec) {
  if (spec.kind == UtilityKind::size) {
    check_dims(s, counts);
    return counts.total;
  }
  return group_rep_gradient(s, counts, spec);
}

double utility_of_sample(const SampleState& state, const UtilitySpec& spec) {
  const double n = static_cast<double>(state.labeled_count());
  if (spec.kind == UtilityKind::size) return n;
  if (!spec.groups) throw std::invalid_argument("group-rep utility requires a group model");
  if (n == 0.0 && spec.epsilon == 0.0)
    throw std::domain_error("group-rep utility of an empty sample needs epsilon > 0");
  Eigen::VectorXd n_group = Eigen::VectorXd::Zero(spec.groups->num_groups());
  for (const auto& [c, pts] : state.labeled)
    for (std::size_t p : pts) n_group(spec.groups->group_of(p)) += 1.0;
  return group_rep_from_totals(n_group, n, spec.groups->gamma(), spec.lambda, spec.epsilon);
}

}  // namespace geosamp
