#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace geosamp {

/// Malformed or inconsistent input data (bad files, dangling references).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A budget or sampling target that cannot be met.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  std::vector<double> features;
  std::optional<double> label;  // nullopt for prediction-only points
  std::string cluster_id;
  std::string stratum_id;

  bool operator==(const Point&) const = default;
};

struct Cluster {
  std::string id;
  std::string stratum_id;
  std::vector<std::size_t> members;  // point indices, ascending by point id

  std::size_t size() const { return members.size(); }
  bool operator==(const Cluster&) const = default;
};

struct Stratum {
  std::string id;
  std::vector<std::size_t> clusters;  // cluster indices, ascending by id
  bool in_initial = false;

  bool operator==(const Stratum&) const = default;
};

/// Declared membership of a stratum, as found in a bundle's metadata.
struct StratumSpec {
  std::string id;
  std::vector<std::string> cluster_ids;
  bool in_initial = false;
};

/// The population: strata partition clusters, clusters partition points.
/// Immutable once built; everything is ordered by identifier.
class Dataset {
 public:
  static constexpr double kDefaultTestFraction = 0.2;

  /// Validates and indexes the inputs. Throws DataError naming the offending
  /// identifier on any inconsistency.
  static Dataset build(std::vector<Point> points, const std::vector<StratumSpec>& strata,
                       std::uint64_t split_seed, double test_fraction = kDefaultTestFraction);

  const std::vector<Point>& points() const { return points_; }
  const std::vector<Cluster>& clusters() const { return clusters_; }
  const std::vector<Stratum>& strata() const { return strata_; }
  std::size_t feature_dim() const { return feature_dim_; }
  std::uint64_t split_seed() const { return split_seed_; }
  double test_fraction() const { return test_fraction_; }

  bool is_train(std::size_t point) const { return train_[point] != 0; }
  bool is_test(std::size_t point) const { return test_[point] != 0; }

  std::size_t point_index(const std::string& id) const;
  std::size_t cluster_index(const std::string& id) const;
  std::size_t stratum_index(const std::string& id) const;
  std::size_t stratum_of_cluster(std::size_t cluster) const { return cluster_stratum_[cluster]; }
  std::size_t cluster_of_point(std::size_t point) const { return point_cluster_[point]; }

  /// Training-split members of a cluster: the points that may be labeled.
  const std::vector<std::size_t>& eligible_members(std::size_t cluster) const {
    return eligible_[cluster];
  }
  std::size_t eligible_size(std::size_t cluster) const { return eligible_[cluster].size(); }

  std::vector<std::size_t> test_points() const;
  std::vector<std::size_t> train_points() const;

  /// Rows of the feature table for the given points.
  Eigen::MatrixXd design_matrix(std::span<const std::size_t> points) const;
  /// Labels for the given points; throws DataError on an unknown label.
  Eigen::VectorXd label_vector(std::span<const std::size_t> points) const;

  /// Same dataset with the in_initial flag set exactly on the given strata.
  Dataset with_initial_strata(const std::set<std::size_t>& strata) const;

  bool operator==(const Dataset& other) const;

 private:
  std::vector<Point> points_;
  std::vector<Cluster> clusters_;
  std::vector<Stratum> strata_;
  std::size_t feature_dim_ = 0;
  std::uint64_t split_seed_ = 0;
  double test_fraction_ = kDefaultTestFraction;
  std::vector<char> train_;
  std::vector<char> test_;
  std::vector<std::size_t> cluster_stratum_;
  std::vector<std::size_t> point_cluster_;
  std::vector<std::vector<std::size_t>> eligible_;
  std::unordered_map<std::string, std::size_t> point_lookup_;
  std::unordered_map<std::string, std::size_t> cluster_lookup_;
  std::unordered_map<std::string, std::size_t> stratum_lookup_;
};

enum class BudgetScope { augmentation, total };

std::string to_string(BudgetScope scope);
BudgetScope parse_budget_scope(const std::string& s);

/// Per-cluster additive costs: c1 inside the initial strata, c2 outside,
/// unless an explicit override exists for the cluster.
struct CostModel {
  double c1 = 25.0;
  double c2 = 50.0;
  double budget = 0.0;
  std::map<std::string, double> overrides;
  BudgetScope scope = BudgetScope::augmentation;
  std::set<std::string> initial_strata;

  /// Throws ConfigError unless c2 >= c1 > 0, budget >= 0 and overrides > 0.
  void validate() const;
};

double cluster_cost(const CostModel& cm, const Cluster& cluster);
/// Cost of every cluster of the dataset, indexed like ds.clusters().
std::vector<double> cluster_costs(const CostModel& cm, const Dataset& ds);
/// Sum of member costs. Throws DataError on an unknown cluster id.
double set_cost(const CostModel& cm, const Dataset& ds, std::span<const std::string> cluster_ids);
double set_cost(const CostModel& cm, const Dataset& ds, std::span<const std::size_t> clusters);

/// The realized labeled set.
struct SampleState {
  std::vector<std::size_t> initial_clusters;  // S0
  std::vector<std::size_t> augment_clusters;  // S_L
  std::map<std::size_t, std::vector<std::size_t>> labeled;  // cluster -> points
  int k = 1;
  double spent = 0.0;
  std::set<std::size_t> initial_strata;
  bool infeasible = false;  // last augmentation could not spend its budget
  std::vector<std::string> lineage;

  std::vector<std::size_t> all_clusters() const;
  std::vector<std::size_t> labeled_points() const;
  std::size_t labeled_count() const;
  bool contains(std::size_t cluster) const;

  bool operator==(const SampleState&) const = default;
};

/// Copies the strata of the state into a cost model.
CostModel bind_initial_strata(CostModel cm, const Dataset& ds, const SampleState& state);

/// Budget left for augmentation under the model's budget scope. Negative when
/// the committed clusters alone exceed a total-scope budget.
double augmentation_budget(const CostModel& cm, const Dataset& ds, const SampleState& state);

class GroupModel;

/// Expected labeled points per cluster (total) and per cluster and group,
/// under uniform selection of min(k, size) eligible points.
struct CountsTable {
  Eigen::VectorXd total;      // e_i
  Eigen::MatrixXd by_group;   // e_{i,g}, clusters x groups

  Eigen::Index clusters() const { return total.size(); }
  Eigen::Index groups() const { return by_group.cols(); }
};

CountsTable expected_counts(const Dataset& ds, const GroupModel& gm, int k);

/// Counts where clusters already in the sample use their realized labeled
/// points instead of expectations.
CountsTable sample_counts(const Dataset& ds, const GroupModel& gm, int k, const SampleState& state);

}  // namespace geosamp
