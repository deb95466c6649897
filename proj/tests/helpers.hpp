#pragma once

// Small builders and random-instance generators shared by the test binaries.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geosamp/core_data.hpp"
#include "geosamp/groups.hpp"
#include "geosamp/rng.hpp"
#include "geosamp/utility.hpp"

namespace testing_support {

using namespace geosamp;

inline std::string pad(const char* prefix, std::size_t v, int width = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, v);
  return buf;
}

/// One cluster described by its stratum and member count; points get simple
/// deterministic coordinates and features.
struct ClusterShape {
  std::size_t stratum;
  std::size_t points;
};

/// Builds a dataset from cluster shapes. Strata are named s00.., clusters
/// c000.., points p00000... Features are (index, 1) scaled, labels = index.
inline Dataset shaped_dataset(const std::vector<ClusterShape>& shapes, double test_fraction = 0.0,
                              std::uint64_t split_seed = 7) {
  std::vector<Point> points;
  std::vector<StratumSpec> strata;
  std::size_t next = 0;
  for (std::size_t c = 0; c < shapes.size(); ++c) {
    const std::string sid = pad("s", shapes[c].stratum, 2);
    const std::string cid = pad("c", c, 3);
    while (strata.size() <= shapes[c].stratum) strata.push_back({pad("s", strata.size(), 2), {}, false});
    strata[shapes[c].stratum].cluster_ids.push_back(cid);
    for (std::size_t k = 0; k < shapes[c].points; ++k, ++next) {
      Point p;
      p.id = pad("p", next, 5);
      p.x = static_cast<double>(shapes[c].stratum) + 0.01 * static_cast<double>(k);
      p.y = static_cast<double>(c);
      p.features = {static_cast<double>(next) * 0.01, 1.0 + static_cast<double>(k % 3)};
      p.label = static_cast<double>(next);
      p.cluster_id = cid;
      p.stratum_id = sid;
      points.push_back(std::move(p));
    }
  }
  return Dataset::build(std::move(points), strata, split_seed, test_fraction);
}

/// A random valid dataset: 1-4 strata, 1-4 clusters each, 1-8 points per
/// cluster, feature dim 1-4, some unknown labels and awkward doubles.
inline Dataset random_dataset(Rng& rng) {
  const std::size_t n_strata = 1 + rng.index(4);
  const std::size_t dim = 1 + rng.index(4);
  std::vector<Point> points;
  std::vector<StratumSpec> strata;
  std::size_t next = 0, next_cluster = 0;
  for (std::size_t s = 0; s < n_strata; ++s) {
    StratumSpec spec{"r" + std::to_string(rng.index(1000)) + "_" + std::to_string(s), {}, rng.bernoulli(0.3)};
    const std::size_t n_clusters = 1 + rng.index(4);
    for (std::size_t c = 0; c < n_clusters; ++c, ++next_cluster) {
      const std::string cid = "k" + std::to_string(next_cluster) + "-" + std::to_string(rng.index(100));
      spec.cluster_ids.push_back(cid);
      const std::size_t n_points = 1 + rng.index(8);
      for (std::size_t k = 0; k < n_points; ++k, ++next) {
        Point p;
        p.id = "pt" + std::to_string(next) + "x" + std::to_string(rng.index(10));
        p.x = rng.normal(0.0, 100.0);
        p.y = rng.uniform(-1e-7, 1e-7);
        for (std::size_t j = 0; j < dim; ++j) p.features.push_back(rng.normal() * std::pow(10.0, rng.uniform(-8, 8)));
        if (rng.uniform() < 0.85) p.label = rng.normal(0.0, 1.0) / 3.0;
        p.cluster_id = cid;
        p.stratum_id = spec.id;
        points.push_back(std::move(p));
      }
    }
    strata.push_back(std::move(spec));
  }
  return Dataset::build(std::move(points), strata, rng.next_u64(), rng.uniform(0.0, 0.5));
}

/// Random counts table with n clusters and G groups.
inline CountsTable random_counts(Rng& rng, std::size_t n, std::size_t groups, double max_count = 30.0) {
  CountsTable t;
  t.total.resize(static_cast<Eigen::Index>(n));
  t.by_group = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(groups));
  for (std::size_t i = 0; i < n; ++i) {
    const double e = 1.0 + std::floor(rng.uniform(0.0, max_count));
    t.total(static_cast<Eigen::Index>(i)) = e;
    // A cluster touches one to three groups.
    std::vector<double> w(groups, 0.0);
    const std::size_t touched = 1 + rng.index(std::min<std::size_t>(3, groups));
    for (std::size_t j = 0; j < touched; ++j) w[rng.index(groups)] += rng.uniform(0.1, 1.0);
    double sum = 0.0;
    for (double v : w) sum += v;
    for (std::size_t g = 0; g < groups; ++g)
      t.by_group(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) = e * w[g] / sum;
  }
  return t;
}

/// Group model over `groups` groups with random shares; the point assignment
/// is a placeholder (utility code only reads gamma).
inline std::shared_ptr<GroupModel> random_group_model(Rng& rng, std::size_t groups) {
  std::vector<double> gamma(groups);
  double sum = 0.0;
  for (auto& g : gamma) sum += (g = rng.uniform(0.05, 1.0));
  for (auto& g : gamma) g /= sum;
  double fixed = 0.0;
  for (std::size_t g = 0; g + 1 < groups; ++g) fixed += gamma[g];
  gamma.back() = 1.0 - fixed;
  std::vector<int> assign(groups);
  for (std::size_t g = 0; g < groups; ++g) assign[g] = static_cast<int>(g);
  return std::make_shared<GroupModel>(assign, gamma, GroupKind::admin);
}

inline InclusionVector random_inclusion(Rng& rng, std::size_t n) {
  InclusionVector s = InclusionVector::zeros(n);
  for (std::size_t i = 0; i < n; ++i) s.values(static_cast<Eigen::Index>(i)) = rng.uniform();
  return s;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("geosamp_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support
