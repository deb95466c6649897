#include "geosamp/synthgeo.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "geosamp/rng.hpp"

namespace geosamp {

namespace {

std::string padded(const char* prefix, long value, int width) {
  std::string digits_str = std::to_string(value);
  if (static_cast<int>(digits_str.size()) < width) digits_str.insert(0, static_cast<std::size_t>(width) - digits_str.size(), '0');
  return prefix + digits_str;
}

int digits(long n) {
  int d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

}  // namespace

void SynthConfig::validate() const {
  if (strata_x < 1 || strata_y < 1) throw ConfigError("strata grid must be at least 1 x 1");
  if (clusters_per_stratum < 1) throw ConfigError("clusters per stratum must be at least 1");
  if (min_points < 1 || max_points < min_points) throw ConfigError("points per cluster range is invalid");
  if (feature_dim < 1) throw ConfigError("feature dimension must be at least 1");
  if (!(coef_dispersion >= 0.0) || !(label_noise >= 0.0) || !(feature_noise >= 0.0))
    throw ConfigError("dispersion and noise levels must be non-negative");
  if (!(unlabeled_fraction >= 0.0 && unlabeled_fraction < 1.0))
    throw ConfigError("unlabeled fraction must lie in [0, 1)");
}

SynthOutput generate(const SynthConfig& cfg) {
  cfg.validate();
  const int d = cfg.feature_dim;
  const int n_strata = cfg.strata_x * cfg.strata_y;
  Rng field_rng(derive_seed(cfg.seed, "feature-field"));
  Rng coef_rng(derive_seed(cfg.seed, "coefficients"));
  Rng point_rng(derive_seed(cfg.seed, "points"));

  // Feature j at (x, y) is sin(a_j x + b_j y + phase_j) + noise; frequencies
  // are chosen so a feature varies over a few strata widths.
  std::vector<double> fa(d), fb(d), phase(d);
  for (int j = 0; j < d; ++j) {
    const double freq = field_rng.uniform(0.4, 1.6);
    const double angle = field_rng.uniform(0.0, 2.0 * std::numbers::pi);
    fa[j] = freq * std::cos(angle);
    fb[j] = freq * std::sin(angle);
    phase[j] = field_rng.uniform(0.0, 2.0 * std::numbers::pi);
  }

  GroundTruth truth;
  truth.coef_dispersion = cfg.coef_dispersion;
  truth.label_noise = cfg.label_noise;
  truth.feature_noise = cfg.feature_noise;
  truth.seed = cfg.seed;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  truth.base_coefficients.resize(d);
  for (int j = 0; j < d; ++j) truth.base_coefficients(j) = coef_rng.normal(0.0, scale);

  const int sw = digits(n_strata - 1);
  const int cw = digits(cfg.clusters_per_stratum - 1);
  const long max_points_total = static_cast<long>(n_strata) * cfg.clusters_per_stratum * cfg.max_points;
  const int pw = digits(max_points_total - 1);

  std::vector<StratumSpec> strata;
  std::vector<Point> points;
  const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.clusters_per_stratum))));
  const double cell = 1.0 / grid;
  long next_point = 0;
  for (int sy = 0; sy < cfg.strata_y; ++sy) {
    for (int sx = 0; sx < cfg.strata_x; ++sx) {
      const int s = sy * cfg.strata_x + sx;
      StratumSpec spec;
      spec.id = padded("s", s, sw);
      Eigen::VectorXd w(d);
      for (int j = 0; j < d; ++j) w(j) = truth.base_coefficients(j) + cfg.coef_dispersion * coef_rng.normal(0.0, scale);
      truth.strata.push_back(spec.id);
      truth.coefficients.push_back(w);

      for (int c = 0; c < cfg.clusters_per_stratum; ++c) {
        const std::string cid = spec.id + "-" + padded("c", c, cw);
        spec.cluster_ids.push_back(cid);
        const double x0 = sx + (c % grid) * cell;
        const double y0 = sy + static_cast<double>(c / grid) * cell;
        const int count = cfg.min_points + static_cast<int>(point_rng.index(
                                               static_cast<std::size_t>(cfg.max_points - cfg.min_points + 1)));
        for (int k = 0; k < count; ++k) {
          Point p;
          p.id = padded("p", next_point++, pw);
          p.x = x0 + cell * point_rng.uniform();
          p.y = y0 + cell * point_rng.uniform();
          p.features.resize(static_cast<std::size_t>(d));
          double signal = 0.0;
          for (int j = 0; j < d; ++j) {
            const double f = std::sin(fa[j] * p.x + fb[j] * p.y + phase[j]) + cfg.feature_noise * point_rng.normal();
            p.features[static_cast<std::size_t>(j)] = f;
            signal += w(j) * f;
          }
          const double label = signal + cfg.label_noise * point_rng.normal();
          if (!(cfg.unlabeled_fraction > 0.0 && point_rng.uniform() < cfg.unlabeled_fraction)) p.label = label;
          p.cluster_id = cid;
          p.stratum_id = spec.id;
          points.push_back(std::move(p));
        }
      }
      strata.push_back(std::move(spec));
    }
  }
  Dataset ds = Dataset::build(std::move(points), strata, derive_seed(cfg.seed, "split"), cfg.test_fraction);
  return {std::move(ds), std::move(truth)};
}

double true_signal(const Dataset& ds, const GroundTruth& truth, std::size_t point) {
  const Point& p = ds.points().at(point);
  const std::size_t s = ds.stratum_index(p.stratum_id);
  double v = 0.0;
  for (std::size_t j = 0; j < p.features.size(); ++j) v += truth.coefficients.at(s)(static_cast<Eigen::Index>(j)) * p.features[j];
  return v;
}

void save_truth(const GroundTruth& truth, const std::filesystem::path& file) {
  nlohmann::json doc;
  doc["seed"] = truth.seed;
  doc["coef_dispersion"] = truth.coef_dispersion;
  doc["label_noise"] = truth.label_noise;
  doc["feature_noise"] = truth.feature_noise;
  doc["base_coefficients"] = std::vector<double>(truth.base_coefficients.data(),
                                                 truth.base_coefficients.data() + truth.base_coefficients.size());
  nlohmann::json strata = nlohmann::json::array();
  for (std::size_t s = 0; s < truth.strata.size(); ++s) {
    const auto& w = truth.coefficients[s];
    strata.push_back({{"stratum_id", truth.strata[s]}, {"coefficients", std::vector<double>(w.data(), w.data() + w.size())}});
  }
  doc["strata"] = strata;
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write '" + file.string() + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace geosamp
