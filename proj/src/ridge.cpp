#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "geosamp/learner.hpp"
#include "geosamp/rng.hpp"

namespace geosamp {

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 10; ++i) grid.push_back(std::pow(10.0, -5.0 + 10.0 * i / 9.0));
  grid.front() = 1e-5;
  grid.back() = 1e5;
  return grid;
}

RidgeModel ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha) {
  if (X.rows() != y.size()) throw std::invalid_argument("ridge_fit: row count mismatch");
  if (X.rows() == 0) throw std::invalid_argument("ridge_fit: no rows");
  if (!(alpha >= 0.0)) throw std::invalid_argument("ridge_fit: negative alpha");
  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(X.cols(), X.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(Xc.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  gram.diagonal().array() += alpha;

  RidgeModel m;
  m.alpha = alpha;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  m.weights = ldlt.solve(Xc.transpose() * yc);
  if (!m.weights.allFinite()) {
    // Singular system at tiny alpha: fall back to the minimum-norm solution.
    m.weights = gram.completeOrthogonalDecomposition().solve(Xc.transpose() * yc);
  }
  m.intercept = y_mean - x_mean.dot(m.weights);
  return m;
}

std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "cv-folds"));
  rng.shuffle(perm);
  std::vector<int> fold(n);
  for (std::size_t j = 0; j < n; ++j) fold[perm[j]] = static_cast<int>(j % static_cast<std::size_t>(folds));
  return fold;
}

RidgeModel ridge_fit_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const RidgeCvOptions& opts) {
  if (opts.folds < 2) throw std::invalid_argument("ridge_fit_cv: need at least 2 folds");
  if (opts.grid.empty()) throw std::invalid_argument("ridge_fit_cv: empty alpha grid");
  if (X.rows() != y.size()) throw std::invalid_argument("ridge_fit_cv: row count mismatch");
  if (X.rows() < opts.folds)
    throw DataError("ridge_fit_cv: " + std::to_string(X.rows()) + " rows is fewer than " +
                    std::to_string(opts.folds) + " folds");
  if ((y.array() == y(0)).all()) throw std::domain_error("ridge_fit_cv: labels have zero variance");

  const auto n = static_cast<std::size_t>(X.rows());
  const auto fold = fold_assignment(n, opts.folds, opts.seed);

  std::vector<double> grid = opts.grid;
  std::sort(grid.begin(), grid.end());
  std::vector<double> total_err(grid.size(), 0.0);
  for (int f = 0; f < opts.folds; ++f) {
    std::vector<Eigen::Index> tr, va;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? va : tr).push_back(static_cast<Eigen::Index>(i));
    const Eigen::MatrixXd Xtr = X(tr, Eigen::all);
    const Eigen::VectorXd ytr = y(tr);
    const Eigen::MatrixXd Xva = X(va, Eigen::all);
    const Eigen::VectorXd yva = y(va);
    for (std::size_t a = 0; a < grid.size(); ++a) {
      const RidgeModel m = ridge_fit(Xtr, ytr, grid[a]);
      total_err[a] += (predict(m, Xva) - yva).squaredNorm() / static_cast<double>(va.size());
    }
  }

  RidgeModel best_cv;
  std::size_t best = 0;
  for (std::size_t a = 0; a < grid.size(); ++a) {
    const double mean_err = total_err[a] / opts.folds;
    best_cv.cv.push_back({grid[a], mean_err});
    if (mean_err < best_cv.cv[best].mean_val_mse) best = a;
  }
  RidgeModel m = ridge_fit(X, y, grid[best]);
  m.cv = std::move(best_cv.cv);
  return m;
}

Eigen::VectorXd predict(const RidgeModel& m, const Eigen::MatrixXd& X) {
  if (X.cols() != m.weights.size())
    throw std::invalid_argument("predict: model has " + std::to_string(m.weights.size()) + " weights, input has " +
                                std::to_string(X.cols()) + " columns");
  return (X * m.weights).array() + m.intercept;
}

double r2_score(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) throw std::invalid_argument("r2_score: length mismatch");
  if (y.size() < 2) throw std::invalid_argument("r2_score: need at least two values");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot == 0.0) throw std::domain_error("r2_score: labels have zero variance");
  return 1.0 - ss_res / ss_tot;
}

double r2_score(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  return r2_score(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
                  std::span<const double>(y_hat.data(), static_cast<std::size_t>(y_hat.size())));
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("spearman_rho: length mismatch");
  if (a.size() < 2) throw std::invalid_argument("spearman_rho: need at least two values");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  if (da == 0.0 || db == 0.0) throw std::domain_error("spearman_rho: constant input");
  return std::clamp(num / std::sqrt(da * db), -1.0, 1.0);
}

}  // namespace geosamp
