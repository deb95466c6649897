#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "geosamp/learner.hpp"
#include "geosamp/synthgeo.hpp"
#include "helpers.hpp"

using namespace geosamp;
using namespace testing_support;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

Eigen::VectorXd random_vector(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

// A state labeling every training point of the given clusters.
SampleState full_state(const Dataset& ds, const std::vector<std::size_t>& clusters) {
  SampleState st;
  st.k = 1 << 20;
  for (std::size_t c : clusters) {
    if (ds.eligible_size(c) == 0) continue;
    st.initial_clusters.push_back(c);
    st.labeled[c] = ds.eligible_members(c);
  }
  return st;
}

std::vector<std::size_t> all_clusters(const Dataset& ds) {
  std::vector<std::size_t> v(ds.clusters().size());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

TEST_CASE("alpha grid is ten log-spaced values from 1e-5 to 1e5") {
  const auto g = default_alpha_grid();
  REQUIRE(g.size() == 10);
  CHECK(g.front() == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(g.back() == doctest::Approx(1e5).epsilon(1e-12));
  for (std::size_t i = 1; i < g.size(); ++i)
    CHECK(g[i] / g[i - 1] == doctest::Approx(std::pow(10.0, 10.0 / 9.0)).epsilon(1e-12));
}

TEST_CASE("one-dimensional ridge matches the hand closed form") {
  Eigen::MatrixXd X(3, 1);
  X << 1, 2, 3;
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  const RidgeModel m = ridge_fit(X, y, 1.0);
  CHECK(std::abs(m.weights(0) - 2.0 / 3.0) <= 1e-12);
  CHECK(std::abs(m.intercept - 2.0 / 3.0) <= 1e-12);
}

TEST_CASE("noiseless linear data is recovered at the grid minimum") {
  Rng rng(2);
  const Eigen::MatrixXd X = random_matrix(rng, 400, 6);
  const Eigen::VectorXd w = random_vector(rng, 6);
  const Eigen::VectorXd y = (X * w).array() + 1.5;
  const RidgeModel m = ridge_fit_cv(X, y, {.seed = 3});
  CHECK(m.alpha == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK((m.weights - w).norm() <= 1e-3 * w.norm());
  CHECK(m.intercept == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(m.cv.size() == 10);
  CHECK(r2_score(y, predict(m, X)) >= 0.99);
}

TEST_CASE("large alpha collapses predictions toward the training mean") {
  Rng rng(4);
  Eigen::MatrixXd X = random_matrix(rng, 60, 4);
  // Standardize columns.
  X = (X.rowwise() - X.colwise().mean()).eval();
  X = (X.array().rowwise() / X.colwise().norm().array() * std::sqrt(60.0)).matrix();
  const Eigen::VectorXd y = X * random_vector(rng, 4) + random_vector(rng, 60);
  const double mean = y.mean();
  double previous = 1e300;
  for (double alpha : default_alpha_grid()) {
    const Eigen::VectorXd pred = predict(ridge_fit(X, y, alpha), X);
    const double spread = (pred.array() - mean).abs().maxCoeff();
    CHECK(spread <= previous + 1e-12);
    previous = spread;
  }
  CHECK(previous < 0.01);
}

TEST_CASE("ridge solution satisfies the regularized normal equations") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.index(60));
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(10));
    const Eigen::MatrixXd X = random_matrix(rng, n, d) * std::pow(10.0, rng.uniform(-2, 2));
    const Eigen::VectorXd y = random_vector(rng, n);
    const double alpha = std::pow(10.0, rng.uniform(-5, 5));
    const RidgeModel m = ridge_fit(X, y, alpha);
    const Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
    const Eigen::VectorXd yc = y.array() - y.mean();
    const Eigen::VectorXd rhs = Xc.transpose() * yc;
    const Eigen::VectorXd lhs =
        (Xc.transpose() * Xc + alpha * Eigen::MatrixXd::Identity(d, d)) * m.weights;
    CHECK((lhs - rhs).norm() <= 1e-8 * std::max(rhs.norm(), 1e-300));
    CHECK(m.weights.allFinite());
  }
}

TEST_CASE("the CV table replays from fold models") {
  Rng rng(6);
  const Eigen::MatrixXd X = random_matrix(rng, 53, 3);
  const Eigen::VectorXd y = X * random_vector(rng, 3) + 0.5 * random_vector(rng, 53);
  const RidgeCvOptions opts{.seed = 11};
  const RidgeModel m = ridge_fit_cv(X, y, opts);
  const auto folds = fold_assignment(53, 5, 11);
  REQUIRE(m.cv.size() == opts.grid.size());
  double best = 1e300, best_alpha = 0.0;
  for (std::size_t a = 0; a < opts.grid.size(); ++a) {
    double total = 0.0;
    for (int f = 0; f < 5; ++f) {
      std::vector<Eigen::Index> tr, va;
      for (Eigen::Index i = 0; i < 53; ++i) (folds[static_cast<std::size_t>(i)] == f ? va : tr).push_back(i);
      const RidgeModel fm = ridge_fit(X(tr, Eigen::all), y(tr), opts.grid[a]);
      const Eigen::VectorXd r = predict(fm, X(va, Eigen::all)) - y(va);
      total += r.squaredNorm() / static_cast<double>(va.size());
    }
    const double mean = total / 5.0;
    CHECK(m.cv[a].alpha == opts.grid[a]);
    CHECK(m.cv[a].mean_val_mse == doctest::Approx(mean).epsilon(1e-10));
    if (mean < best) {
      best = mean;
      best_alpha = opts.grid[a];
    }
  }
  CHECK(m.alpha == best_alpha);
}

TEST_CASE("fold assignment is balanced and seeded") {
  const auto f = fold_assignment(23, 5, 9);
  std::vector<int> sizes(5, 0);
  for (int v : f) ++sizes[static_cast<std::size_t>(v)];
  CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
  CHECK(fold_assignment(23, 5, 9) == f);
  CHECK(fold_assignment(23, 5, 10) != f);
}

TEST_CASE("alpha selection ignores row order within the fixed folds") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 30 + static_cast<Eigen::Index>(rng.index(40));
    const Eigen::MatrixXd X = random_matrix(rng, n, 4);
    const Eigen::VectorXd y = X * random_vector(rng, 4) + rng.uniform(0.1, 3.0) * random_vector(rng, n);
    const std::uint64_t seed = rng.next_u64();
    const auto folds = fold_assignment(static_cast<std::size_t>(n), 5, seed);
    // Shuffle rows among positions that share a fold.
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (int f = 0; f < 5; ++f) {
      std::vector<Eigen::Index> pos;
      for (Eigen::Index i = 0; i < n; ++i)
        if (folds[static_cast<std::size_t>(i)] == f) pos.push_back(i);
      std::vector<Eigen::Index> shuffled = pos;
      rng.shuffle(shuffled);
      for (std::size_t j = 0; j < pos.size(); ++j) perm[static_cast<std::size_t>(pos[j])] = shuffled[j];
    }
    const RidgeModel a = ridge_fit_cv(X, y, {.seed = seed});
    const RidgeModel b = ridge_fit_cv(X(perm, Eigen::all), y(perm), {.seed = seed});
    CHECK(a.alpha == b.alpha);
    CHECK((a.weights - b.weights).norm() <= 1e-9 * std::max(1.0, a.weights.norm()));
  }
}

TEST_CASE("ridge errors") {
  Eigen::MatrixXd X(4, 1);
  X << 1, 2, 3, 4;
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  CHECK_THROWS_AS(ridge_fit_cv(X, y), DataError);
  Eigen::MatrixXd X6(6, 1);
  X6 << 1, 2, 3, 4, 5, 6;
  CHECK_THROWS_AS(ridge_fit_cv(X6, Eigen::VectorXd::Constant(6, 2.0)), std::domain_error);
  const RidgeModel m = ridge_fit(X, y, 1.0);
  CHECK_THROWS_AS(predict(m, Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("predict examples") {
  RidgeModel identity;
  identity.weights = Eigen::VectorXd::Ones(3);
  const Eigen::MatrixXd unit = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd p = predict(identity, unit);
  CHECK(p == Eigen::VectorXd::Ones(3));
  RidgeModel zero;
  zero.weights = Eigen::VectorXd::Zero(2);
  zero.intercept = 4.25;
  CHECK(predict(zero, Eigen::MatrixXd::Random(5, 2)) == Eigen::VectorXd::Constant(5, 4.25));
}

TEST_CASE("r2 examples and bounds") {
  const std::vector<double> y{0, 1, 2}, partial{0, 0, 2}, mean{1, 1, 1};
  CHECK(r2_score(y, partial) == 0.5);
  CHECK(r2_score(y, y) == 1.0);
  CHECK(r2_score(y, mean) == 0.0);
  const std::vector<double> flat{3, 3, 3};
  CHECK_THROWS_AS(r2_score(flat, y), std::domain_error);

  Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.index(20);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.normal();
      b[i] = a[i] + (rng.bernoulli(0.2) ? 0.0 : rng.normal() * rng.uniform(0.0, 2.0));
    }
    const double r = r2_score(a, b);
    CHECK(r <= 1.0);
    CHECK((r == 1.0) == (a == b));
  }
}

TEST_CASE("spearman examples") {
  const std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 4}, rev{4, 3, 2, 1};
  CHECK(spearman_rho(a, b) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(spearman_rho(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spearman_rho(a, rev) == doctest::Approx(-1.0).epsilon(1e-15));
  const std::vector<double> constant{2, 2, 2, 2};
  CHECK_THROWS_AS(spearman_rho(a, constant), std::domain_error);
  const std::vector<double> tied{10, 20, 20, 30};
  CHECK(average_ranks(tied) == std::vector<double>{1, 2.5, 2.5, 4});
}

TEST_CASE("spearman is bounded and invariant under monotone transforms") {
  Rng rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.index(30);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse values so ties occur.
      a[i] = std::round(rng.normal() * 3);
      b[i] = std::round(rng.normal() * 3);
    }
    if (std::all_of(a.begin(), a.end(), [&](double v) { return v == a[0]; }) ||
        std::all_of(b.begin(), b.end(), [&](double v) { return v == b[0]; }))
      continue;
    const double rho = spearman_rho(a, b);
    CHECK(rho >= -1.0 - 1e-12);
    CHECK(rho <= 1.0 + 1e-12);
    std::vector<double> ta(n), tb(n);
    for (std::size_t i = 0; i < n; ++i) {
      ta[i] = std::exp(a[i]);
      tb[i] = b[i] * b[i] * b[i] - 7.0;
    }
    CHECK(spearman_rho(ta, tb) == doctest::Approx(rho).epsilon(1e-12));
  }
}

TEST_CASE("k-means with one group returns the mean") {
  Rng rng(10);
  const Eigen::MatrixXd F = random_matrix(rng, 40, 3);
  const KMeansResult r = kmeans_groups(F, 1, 1);
  CHECK((r.centroids.row(0).transpose() - F.colwise().mean().transpose()).norm() <= 1e-12);
  CHECK(std::all_of(r.assignment.begin(), r.assignment.end(), [](int g) { return g == 0; }));
}

TEST_CASE("k-means separates well-separated blobs on every seed") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(1000 + seed);
    Eigen::MatrixXd F(60, 2);
    for (Eigen::Index i = 0; i < 60; ++i) {
      const double shift = i < 30 ? 0.0 : 10.0;
      F(i, 0) = shift + rng.normal();
      F(i, 1) = rng.normal();
    }
    const KMeansResult r = kmeans_groups(F, 2, seed);
    for (Eigen::Index i = 1; i < 60; ++i) {
      const bool same_blob = (i < 30) == (0 < 30);
      CHECK((r.assignment[static_cast<std::size_t>(i)] == r.assignment[0]) == same_blob);
    }
  }
}

TEST_CASE("k-means with one group per row has zero inertia") {
  Rng rng(11);
  const Eigen::MatrixXd F = random_matrix(rng, 12, 4);
  CHECK(kmeans_groups(F, 12, 3).inertia == doctest::Approx(0.0));
  CHECK_THROWS_AS(kmeans_groups(F, 13, 3), std::invalid_argument);
}

TEST_CASE("k-means invariants: nearest assignment, inertia sum, monotone trace") {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng.index(80));
    const Eigen::MatrixXd F = random_matrix(rng, n, 1 + static_cast<Eigen::Index>(rng.index(5)));
    const int groups = 1 + static_cast<int>(rng.index(6));
    const KMeansResult r = kmeans_groups(F, groups, rng.next_u64());
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int g = r.assignment[static_cast<std::size_t>(i)];
      const double own = (F.row(i) - r.centroids.row(g)).squaredNorm();
      inertia += own;
      for (int h = 0; h < groups; ++h) CHECK(own <= (F.row(i) - r.centroids.row(h)).squaredNorm() + 1e-12);
    }
    CHECK(r.inertia == doctest::Approx(inertia).epsilon(1e-10));
    for (std::size_t t = 1; t < r.inertia_trace.size(); ++t)
      CHECK(r.inertia_trace[t] <= r.inertia_trace[t - 1] * (1 + 1e-12));
  }
}

TEST_CASE("k-means is deterministic given the seed") {
  Rng rng(13);
  const Eigen::MatrixXd F = random_matrix(rng, 50, 3);
  const KMeansResult a = kmeans_groups(F, 4, 77), b = kmeans_groups(F, 4, 77);
  CHECK(a.assignment == b.assignment);
  CHECK(a.inertia == b.inertia);
}

TEST_CASE("evaluating the full training split of a noiseless homogeneous task") {
  SynthConfig cfg;
  cfg.strata_x = 3;
  cfg.strata_y = 2;
  cfg.clusters_per_stratum = 6;
  cfg.coef_dispersion = 0.0;
  cfg.label_noise = 0.0;
  const Dataset ds = generate(cfg).dataset;
  const Evaluation e = evaluate_sample_detailed(ds, full_state(ds, all_clusters(ds)), 1);
  CHECK(e.r2 >= 0.99);
  CHECK(e.test_rows == ds.test_points().size());
  CHECK(e.train_rows == ds.train_points().size());
}

TEST_CASE("one cluster scores below the full sample on a heterogeneous task") {
  SynthConfig cfg;
  cfg.strata_x = 3;
  cfg.strata_y = 2;
  cfg.clusters_per_stratum = 6;
  cfg.coef_dispersion = 2.0;
  cfg.seed = 5;
  const Dataset ds = generate(cfg).dataset;
  const double full = evaluate_sample(ds, full_state(ds, all_clusters(ds)), 2);
  const double one = evaluate_sample(ds, full_state(ds, {0}), 2);
  CHECK(one < full);
}

TEST_CASE("evaluation is deterministic and rejects tiny samples") {
  SynthConfig cfg;
  cfg.strata_x = 2;
  cfg.strata_y = 2;
  cfg.clusters_per_stratum = 4;
  const Dataset ds = generate(cfg).dataset;
  const SampleState st = full_state(ds, {0, 3, 7});
  CHECK(evaluate_sample(ds, st, 4) == evaluate_sample(ds, st, 4));
  SampleState tiny;
  tiny.initial_clusters = {0};
  tiny.labeled[0] = {ds.eligible_members(0).front()};
  CHECK_THROWS_AS(evaluate_sample(ds, tiny, 4), DataError);
}

TEST_CASE("feature groups cover every point") {
  SynthConfig cfg;
  cfg.strata_x = 2;
  cfg.strata_y = 2;
  cfg.clusters_per_stratum = 4;
  const Dataset ds = generate(cfg).dataset;
  const GroupModel gm = feature_groups(ds, 3, 9);
  CHECK(gm.num_groups() == 3);
  CHECK(gm.num_points() == ds.points().size());
  double total = 0.0;
  for (double g : gm.gamma()) total += g;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gm.kind() == GroupKind::feature_kmeans);
}
