#include <limits>
#include <stdexcept>

#include "geosamp/learner.hpp"
#include "geosamp/rng.hpp"

namespace geosamp {

namespace {

struct Assignment {
  std::vector<int> labels;
  Eigen::VectorXd dist2;
  double inertia = 0.0;
};

Assignment assign(const Eigen::MatrixXd& X, const Eigen::MatrixXd& centroids) {
  Assignment a;
  a.labels.resize(static_cast<std::size_t>(X.rows()));
  a.dist2.resize(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index g = 0; g < centroids.rows(); ++g) {
      const double d = (X.row(i) - centroids.row(g)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(g);
      }
    }
    a.labels[static_cast<std::size_t>(i)] = best;
    a.dist2(i) = best_d;
    a.inertia += best_d;
  }
  return a;
}

Eigen::MatrixXd plus_plus_seed(const Eigen::MatrixXd& X, int groups, Rng& rng) {
  const auto n = static_cast<std::size_t>(X.rows());
  Eigen::MatrixXd c(groups, X.cols());
  std::vector<char> chosen(n, 0);
  std::size_t first = rng.index(n);
  c.row(0) = X.row(static_cast<Eigen::Index>(first));
  chosen[first] = 1;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (X.row(static_cast<Eigen::Index>(i)) - c.row(0)).squaredNorm();
  for (int g = 1; g < groups; ++g) {
    std::size_t pick = rng.weighted_index(d2);
    if (pick == n) {
      // All remaining mass is zero (duplicate points): take any unchosen row.
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) rest.push_back(i);
      pick = rest[rng.index(rest.size())];
    }
    chosen[pick] = 1;
    c.row(g) = X.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], (X.row(static_cast<Eigen::Index>(i)) - c.row(g)).squaredNorm());
  }
  return c;
}

KMeansResult lloyd(const Eigen::MatrixXd& X, int groups, int max_iters, Rng& rng) {
  KMeansResult r;
  r.centroids = plus_plus_seed(X, groups, rng);
  Assignment a = assign(X, r.centroids);
  r.inertia_trace.push_back(a.inertia);
  for (int it = 0; it < max_iters; ++it) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(groups, X.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(groups), 0);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      sums.row(a.labels[static_cast<std::size_t>(i)]) += X.row(i);
      ++counts[static_cast<std::size_t>(a.labels[static_cast<std::size_t>(i)])];
    }
    std::vector<char> taken(static_cast<std::size_t>(X.rows()), 0);
    for (int g = 0; g < groups; ++g) {
      if (counts[static_cast<std::size_t>(g)] > 0) {
        r.centroids.row(g) = sums.row(g) / static_cast<double>(counts[static_cast<std::size_t>(g)]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its centroid.
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < X.rows(); ++i)
        if (!taken[static_cast<std::size_t>(i)] && a.dist2(i) > far_d) {
          far_d = a.dist2(i);
          far = i;
        }
      taken[static_cast<std::size_t>(far)] = 1;
      r.centroids.row(g) = X.row(far);
    }
    Assignment next = assign(X, r.centroids);
    r.inertia_trace.push_back(next.inertia);
    const bool converged = next.labels == a.labels;
    a = std::move(next);
    if (converged) break;
  }
  r.assignment = std::move(a.labels);
  r.inertia = a.inertia;
  return r;
}

}  // namespace

KMeansResult kmeans_groups(const Eigen::MatrixXd& features, int groups, std::uint64_t seed,
                           const KMeansOptions& opts) {
  if (groups < 1) throw std::invalid_argument("kmeans: need at least one group");
  if (features.rows() < groups)
    throw std::invalid_argument("kmeans: " + std::to_string(groups) + " groups exceed " +
                                std::to_string(features.rows()) + " rows");
  if (opts.restarts < 1 || opts.max_iters < 1) throw std::invalid_argument("kmeans: restarts and max_iters must be >= 1");
  KMeansResult best;
  bool have = false;
  for (int r = 0; r < opts.restarts; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    KMeansResult res = lloyd(features, groups, opts.max_iters, rng);
    if (!have || res.inertia < best.inertia) {
      best = std::move(res);
      have = true;
    }
  }
  return best;
}

}  // namespace geosamp
