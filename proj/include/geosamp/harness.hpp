#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "geosamp/core_data.hpp"
#include "geosamp/groups.hpp"
#include "geosamp/optimizer.hpp"
#include "geosamp/samplers.hpp"
#include "geosamp/synthgeo.hpp"

namespace geosamp {

/// Everything one experiment command needs. Serializes to a canonical JSON
/// document whose hash identifies the run.
struct ExperimentConfig {
  std::string dataset_path;  // empty: use `synth`
  SynthConfig synth;

  SamplerConfig sampler;
  double c1 = 25.0;
  double c2 = 50.0;
  std::vector<double> budgets{100.0, 200.0, 500.0};
  BudgetScope scope = BudgetScope::augmentation;
  std::vector<std::string> methods{"default", "greedy", "random", "rep-admin", "rep-image"};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};

  double lambda = UtilitySpec::kDefaultLambda;
  double epsilon = UtilitySpec::kDefaultEpsilon;
  int image_groups = 8;
  int aux_groups = 8;
  std::string aux_path;  // per-point auxiliary vectors for rep-aux
  std::uint64_t group_seed = 0;
  SolveOptions solve;

  // cost sweep
  std::vector<double> c2_list{25.0, 30.0, 40.0, 50.0};
  double sweep_budget = 500.0;

  // initial-size sweep
  std::vector<std::size_t> initial_sizes{200, 300, 400, 500};
  std::string optimized_method = "rep-admin";

  // rank study
  std::vector<std::size_t> rank_sizes{100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
  int rank_cluster_k = 10;
  int rank_cluster_strata = 0;  // 0: all strata
  double convenience_tau = 0.025;
  std::vector<std::pair<double, double>> anchors;  // empty: centers of the largest clusters
  int anchor_count = 3;

  std::filesystem::path out_dir;

  void validate() const;
  nlohmann::json to_json() const;
  /// Applies the keys present in `doc` on top of this configuration. Unknown
  /// keys raise ConfigError.
  void apply_json(const nlohmann::json& doc);
  /// sha1 of the canonical JSON (out_dir excluded).
  std::string hash() const;
};

/// Dataset plus the group models every method may need.
struct ExperimentContext {
  Dataset dataset;
  std::string dataset_hash;
  std::shared_ptr<const GroupModel> admin;
  std::shared_ptr<const GroupModel> image;
  std::shared_ptr<const GroupModel> aux;  // null unless aux_path is set

  static ExperimentContext build(const ExperimentConfig& cfg);
};

/// Applies the named augmentation method. Known names: default, greedy,
/// random, size (optimized size utility), rep-admin, rep-image, rep-aux.
SampleState run_method(const ExperimentContext& ctx, const ExperimentConfig& cfg, const std::string& method,
                       const SampleState& initial, const CostModel& cm, double budget, Rng& rng);

bool is_known_method(const std::string& method);

struct MeanStats {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation
  double se = 0.0;  // sd / sqrt(n)
  std::size_t n = 0;
};

MeanStats summarize(const std::vector<double>& v);

/// A CSV table held in memory; cells are already formatted.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
  void write(const std::filesystem::path& file) const;
  std::size_t column(const std::string& name) const;
};

struct AugmentationResult {
  CsvTable runs;   // one row per (method, budget, seed)
  CsvTable table;  // one row per budget, mean/sd/se columns per method
};

struct RankStudyResult {
  CsvTable samples;  // one row per realized sample
  CsvTable rho;      // utility x sampling type (plus overall)
};

struct SweepResult {
  CsvTable runs;
  CsvTable summary;
};

AugmentationResult run_augmentation(const ExperimentConfig& cfg);
AugmentationResult run_augmentation(const ExperimentConfig& cfg, const ExperimentContext& ctx);
RankStudyResult run_rank_study(const ExperimentConfig& cfg);
RankStudyResult run_rank_study(const ExperimentConfig& cfg, const ExperimentContext& ctx);
SweepResult run_cost_sweep(const ExperimentConfig& cfg);
SweepResult run_cost_sweep(const ExperimentConfig& cfg, const ExperimentContext& ctx);
SweepResult run_initial_size_sweep(const ExperimentConfig& cfg);
SweepResult run_initial_size_sweep(const ExperimentConfig& cfg, const ExperimentContext& ctx);

/// Writes the tables plus run_meta.json into cfg.out_dir.
void write_outputs(const ExperimentConfig& cfg, const ExperimentContext& ctx, const std::string& command,
                   const std::vector<std::pair<std::string, const CsvTable*>>& tables);

}  // namespace geosamp
