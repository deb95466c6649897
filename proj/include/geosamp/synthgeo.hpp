#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geosamp/core_data.hpp"

namespace geosamp {

/// Synthetic geography: a grid of rectangular strata, each split into
/// cluster cells that hold uniformly placed points.
struct SynthConfig {
  int strata_x = 5;
  int strata_y = 4;
  int clusters_per_stratum = 25;
  int min_points = 20;
  int max_points = 40;
  int feature_dim = 16;
  double coef_dispersion = 1.0;  // sigma_w: spread of per-stratum coefficients
  double label_noise = 0.1;      // sigma_y
  double feature_noise = 1.0;    // isotropic noise around the smooth feature field
  double unlabeled_fraction = 0.0;
  double test_fraction = Dataset::kDefaultTestFraction;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GroundTruth {
  std::vector<std::string> strata;
  std::vector<Eigen::VectorXd> coefficients;  // w_r, one per stratum
  Eigen::VectorXd base_coefficients;
  double coef_dispersion = 0.0;
  double label_noise = 0.0;
  double feature_noise = 0.0;
  std::uint64_t seed = 0;
};

struct SynthOutput {
  Dataset dataset;
  GroundTruth truth;
};

/// Deterministic given cfg.seed.
SynthOutput generate(const SynthConfig& cfg);

/// Noise-free label w_r . x of a point under the ground truth.
double true_signal(const Dataset& ds, const GroundTruth& truth, std::size_t point);

void save_truth(const GroundTruth& truth, const std::filesystem::path& file);

}  // namespace geosamp
