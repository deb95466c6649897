#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "geosamp/core_data.hpp"
#include "geosamp/groups.hpp"

namespace geosamp {

/// Ten log-spaced regularization strengths from 1e-5 to 1e5.
std::vector<double> default_alpha_grid();

struct CvEntry {
  double alpha = 0.0;
  double mean_val_mse = 0.0;
};

struct RidgeModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  double alpha = 0.0;
  std::vector<CvEntry> cv;
};

/// Closed-form ridge with an unpenalized intercept: features and labels are
/// centered, then (X'X + alpha I) w = X'y is solved.
RidgeModel ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha);

struct RidgeCvOptions {
  int folds = 5;
  std::vector<double> grid = default_alpha_grid();
  std::uint64_t seed = 0;
};

/// Fold ids 0..folds-1 for n rows from a seeded permutation.
std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed);

/// Selects alpha by mean validation squared error over the folds (ties go to
/// the smaller alpha) and refits on all rows.
RidgeModel ridge_fit_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const RidgeCvOptions& opts = {});

Eigen::VectorXd predict(const RidgeModel& m, const Eigen::MatrixXd& X);

/// 1 - SS_res / SS_tot. Throws std::domain_error when y has zero variance.
double r2_score(std::span<const double> y, std::span<const double> y_hat);
double r2_score(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);

/// 1-based ranks with ties averaged.
std::vector<double> average_ranks(std::span<const double> v);

/// Pearson correlation of average ranks. Throws std::domain_error when
/// either input is constant.
double spearman_rho(std::span<const double> a, std::span<const double> b);

struct KMeansResult {
  Eigen::MatrixXd centroids;  // G x dim
  std::vector<int> assignment;
  double inertia = 0.0;
  std::vector<double> inertia_trace;  // per Lloyd iteration of the kept restart
};

struct KMeansOptions {
  int restarts = 10;
  int max_iters = 100;
};

/// Lloyd's algorithm with k-means++ seeding; best inertia over restarts.
/// Empty clusters take the point farthest from its centroid.
KMeansResult kmeans_groups(const Eigen::MatrixXd& features, int groups, std::uint64_t seed,
                           const KMeansOptions& opts = {});

/// k-means groups over the dataset's feature vectors (all points).
GroupModel feature_groups(const Dataset& ds, int groups, std::uint64_t seed);
/// k-means groups over auxiliary per-point vectors, rows aligned with ds.points().
GroupModel auxiliary_groups(const Dataset& ds, const Eigen::MatrixXd& aux, int groups, std::uint64_t seed);

struct Evaluation {
  RidgeModel model;
  double r2 = 0.0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
};

/// Fits the ridge head on the sample's labeled points and scores R² on the
/// test split. Throws DataError for samples with fewer rows than folds.
Evaluation evaluate_sample_detailed(const Dataset& ds, const SampleState& state, std::uint64_t seed);
double evaluate_sample(const Dataset& ds, const SampleState& state, std::uint64_t seed);

}  // namespace geosamp
