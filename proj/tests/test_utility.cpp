#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "geosamp/utility.hpp"
#include "helpers.hpp"

using namespace geosamp;
using namespace testing_support;

namespace {

CountsTable counts_from(const std::vector<double>& totals) {
  CountsTable t;
  t.total = Eigen::Map<const Eigen::VectorXd>(totals.data(), static_cast<Eigen::Index>(totals.size()));
  t.by_group = t.total;
  return t;
}

InclusionVector inclusion(const std::vector<double>& v) {
  InclusionVector s = InclusionVector::zeros(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) s.values(static_cast<Eigen::Index>(i)) = v[i];
  return s;
}

// Direct transcription of the utility for oracle comparisons.
double oracle_group_rep(const std::vector<double>& n_group, const std::vector<double>& gamma, double lambda,
                        double eps) {
  double n = 0.0, group_term = 0.0;
  for (std::size_t g = 0; g < n_group.size(); ++g) {
    n += n_group[g];
    group_term += gamma[g] / std::sqrt(n_group[g] + eps);
  }
  return -lambda * group_term - (1.0 - lambda) / std::sqrt(n + eps);
}

}  // namespace

TEST_CASE("size utility examples") {
  const CountsTable t = counts_from({10, 10, 5});
  CHECK(size_utility(inclusion({1, 1, 1}), t) == 25.0);
  CHECK(size_utility(inclusion({0, 0, 0}), t) == 0.0);
  CHECK(size_utility(inclusion({1, 0.5, 0}), t) == 15.0);
}

TEST_CASE("size utility is linear in s") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const CountsTable t = random_counts(rng, 8, 2);
    const InclusionVector s = random_inclusion(rng, 8);
    const double alpha = rng.uniform();
    InclusionVector scaled = s;
    scaled.values *= alpha;
    CHECK(size_utility(scaled, t) == doctest::Approx(alpha * size_utility(s, t)).epsilon(1e-12));
  }
}

TEST_CASE("group-rep closed-form examples") {
  const double eps = 1e-12;
  Eigen::VectorXd one(1);
  one << 100.0;
  CHECK(group_rep_from_totals(one, 100.0, {1.0}, 0.5, eps) == doctest::Approx(-0.100).epsilon(1e-9));
  one << 25.0;
  CHECK(group_rep_from_totals(one, 25.0, {1.0}, 0.0, eps) == doctest::Approx(-0.200).epsilon(1e-9));

  Eigen::VectorXd balanced(2), skewed(2);
  balanced << 50.0, 50.0;
  skewed << 90.0, 10.0;
  const double ub = group_rep_from_totals(balanced, 100.0, {0.5, 0.5}, 0.5, eps);
  const double us = group_rep_from_totals(skewed, 100.0, {0.5, 0.5}, 0.5, eps);
  CHECK(ub == doctest::Approx(oracle_group_rep({50, 50}, {0.5, 0.5}, 0.5, eps)).epsilon(1e-12));
  CHECK(us == doctest::Approx(oracle_group_rep({90, 10}, {0.5, 0.5}, 0.5, eps)).epsilon(1e-12));
  CHECK(ub == doctest::Approx(-0.1207).epsilon(1e-3));
  CHECK(us == doctest::Approx(-0.1554).epsilon(1e-3));
  CHECK(ub > us);
}

TEST_CASE("group-rep on an inclusion vector equals the oracle on aggregated counts") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(10), groups = 1 + rng.index(5);
    const CountsTable t = random_counts(rng, n, groups);
    const auto gm = random_group_model(rng, groups);
    const double lambda = rng.uniform(), eps = std::pow(10.0, rng.uniform(-8, 0));
    const auto spec = UtilitySpec::group_rep(gm, lambda, eps);
    const InclusionVector s = random_inclusion(rng, n);
    std::vector<double> ng(groups, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t g = 0; g < groups; ++g)
        ng[g] += s.values(static_cast<Eigen::Index>(i)) * t.by_group(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g));
    CHECK(group_rep_utility(s, t, spec) == doctest::Approx(oracle_group_rep(ng, gm->gamma(), lambda, eps)).epsilon(1e-12));
  }
}

TEST_CASE("group-rep gradient matches central differences") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(10), groups = 1 + rng.index(5);
    const CountsTable t = random_counts(rng, n, groups);
    const auto spec = UtilitySpec::group_rep(random_group_model(rng, groups), rng.uniform(), std::pow(10.0, rng.uniform(-6, 0)));
    InclusionVector s = random_inclusion(rng, n);
    s.values = s.values.cwiseMax(0.05);
    const Eigen::VectorXd grad = group_rep_gradient(s, t, spec);
    const double h = 1e-5;
    for (std::size_t i = 0; i < n; ++i) {
      InclusionVector up = s, down = s;
      up.values(static_cast<Eigen::Index>(i)) += h;
      down.values(static_cast<Eigen::Index>(i)) -= h;
      const double fd = (group_rep_utility(up, t, spec) - group_rep_utility(down, t, spec)) / (2 * h);
      CHECK(std::abs(fd - grad(static_cast<Eigen::Index>(i))) <= 1e-4 * std::max(std::abs(fd), 1e-12));
    }
  }
}

TEST_CASE("gradient vanishes on clusters with no expected labels") {
  CountsTable t = counts_from({10, 0, 5});
  auto gm = std::make_shared<GroupModel>(std::vector<int>{0}, std::vector<double>{1.0}, GroupKind::admin);
  const auto g = group_rep_gradient(inclusion({0.3, 0.7, 0.2}), t, UtilitySpec::group_rep(gm, 0.4, 1e-6));
  CHECK(g(1) == 0.0);
  CHECK(g(0) > 0.0);
}

TEST_CASE("lambda = 0 gradient is proportional to the expected counts") {
  Rng rng(12);
  const CountsTable t = random_counts(rng, 6, 3);
  const auto spec = UtilitySpec::group_rep(random_group_model(rng, 3), 0.0, 1e-6);
  const InclusionVector s = random_inclusion(rng, 6);
  const double n = s.values.dot(t.total);
  const Eigen::VectorXd g = group_rep_gradient(s, t, spec);
  const double factor = 0.5 * std::pow(n + 1e-6, -1.5);
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(g(i) == doctest::Approx(factor * t.total(i)).epsilon(1e-12));
  CHECK(group_rep_utility(s, t, spec) == doctest::Approx(-1.0 / std::sqrt(n + 1e-6)).epsilon(1e-12));
}

TEST_CASE("utilities are monotone in every coordinate") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const CountsTable t = random_counts(rng, 6, 3);
    const auto spec = UtilitySpec::group_rep(random_group_model(rng, 3), rng.uniform(), 1e-6);
    InclusionVector s = random_inclusion(rng, 6);
    const Eigen::Index i = static_cast<Eigen::Index>(rng.index(6));
    InclusionVector raised = s;
    raised.values(i) = s.values(i) + (1.0 - s.values(i)) * rng.uniform();
    CHECK(group_rep_utility(raised, t, spec) >= group_rep_utility(s, t, spec));
    CHECK(size_utility(raised, t) >= size_utility(s, t));
  }
}

TEST_CASE("smoothed group-rep is midpoint concave") {
  Rng rng(33);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.index(10), groups = 1 + rng.index(5);
    const CountsTable t = random_counts(rng, n, groups);
    const auto spec = UtilitySpec::group_rep(random_group_model(rng, groups), rng.uniform(), std::pow(10.0, rng.uniform(-6, 0)));
    const InclusionVector a = random_inclusion(rng, n), b = random_inclusion(rng, n);
    const double alpha = rng.uniform();
    InclusionVector mix = a;
    mix.values = alpha * a.values + (1 - alpha) * b.values;
    CHECK(group_rep_utility(mix, t, spec) >=
          alpha * group_rep_utility(a, t, spec) + (1 - alpha) * group_rep_utility(b, t, spec) - 1e-9);
  }
}

TEST_CASE("group-rep is continuous in lambda") {
  Rng rng(5);
  const CountsTable t = random_counts(rng, 5, 2);
  const auto gm = random_group_model(rng, 2);
  const InclusionVector s = random_inclusion(rng, 5);
  for (int step = 0; step < 10; ++step) {
    const double lambda = 0.1 * step;
    const double u0 = group_rep_utility(s, t, UtilitySpec::group_rep(gm, lambda, 1e-6));
    const double u1 = group_rep_utility(s, t, UtilitySpec::group_rep(gm, lambda + 1e-9, 1e-6));
    CHECK(std::abs(u1 - u0) < 1e-8);
  }
}

TEST_CASE("zero base without smoothing is a domain error") {
  Eigen::VectorXd ng(2);
  ng << 10.0, 0.0;
  CHECK_THROWS_AS(group_rep_from_totals(ng, 10.0, {0.5, 0.5}, 0.5, 0.0), std::domain_error);
}

TEST_CASE("utility of a realized sample") {
  // Two strata; each point is its own admin group member.
  const Dataset ds = shaped_dataset({{0, 4}, {0, 3}, {1, 5}, {1, 2}});
  auto gm = std::make_shared<GroupModel>(admin_groups(ds));
  SampleState st;
  st.k = 10;
  st.initial_clusters = {0, 2};
  st.labeled = {{0, ds.clusters()[0].members}, {2, ds.clusters()[2].members}};

  SUBCASE("size utility is the labeled count") {
    CHECK(utility_of_sample(st, UtilitySpec::size_spec()) == 9.0);
  }
  SUBCASE("equals the relaxed utility on the binary inclusion vector when clusters are fully labeled") {
    const auto spec = UtilitySpec::group_rep(gm, 0.5, 1e-6);
    const CountsTable t = expected_counts(ds, *gm, 10);
    const InclusionVector s = InclusionVector::from_state(ds.clusters().size(), st);
    CHECK(utility_of_sample(st, spec) == doctest::Approx(group_rep_utility(s, t, spec)).epsilon(1e-14));
  }
  SUBCASE("adding a labeled point strictly increases the utility") {
    const auto spec = UtilitySpec::group_rep(gm, 0.5, 1e-6);
    SampleState more = st;
    more.labeled[1] = {ds.clusters()[1].members[0]};
    more.augment_clusters = {1};
    CHECK(utility_of_sample(more, spec) > utility_of_sample(st, spec));
  }
}

TEST_CASE("inclusion vector validation") {
  InclusionVector s = InclusionVector::zeros(3);
  CHECK_NOTHROW(s.validate());
  s.values(1) = 1.5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.values(1) = 0.5;
  s.committed[2] = 1;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
