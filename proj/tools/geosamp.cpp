// geosamp: command-line front end for the sampling library.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geosamp/bundle_io.hpp"
#include "geosamp/harness.hpp"
#include "geosamp/learner.hpp"
#include "geosamp/provenance.hpp"

using namespace geosamp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open '" + file.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("'" + file.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + file.string() + "'");
  out << text;
}

// Flags shared by the four experiment commands.
struct ExperimentFlags {
  ExperimentConfig cfg;
  std::uint64_t seed = 0;
  std::size_t n_seeds = 10;
  std::vector<std::uint64_t> seed_list;
  std::string config_file;
  std::string scope = "augmentation";
  std::string out_dir;
  std::string step = "pairwise";

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "first run seed")->required();
    cmd->add_option("--n-seeds", n_seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
    cmd->add_option("--seeds", seed_list, "explicit seed list (overrides --seed/--n-seeds)");
    cmd->add_option("--out-dir", out_dir, "output directory")->required();
    cmd->add_option("--config", config_file, "JSON document applied on top of the flags");
    cmd->add_option("--dataset", cfg.dataset_path, "dataset bundle directory (default: synthetic)");
    cmd->add_option("--synth-seed", cfg.synth.seed, "synthetic geography seed");
    cmd->add_option("--coef-dispersion", cfg.synth.coef_dispersion, "synthetic sigma_w");
    cmd->add_option("--label-noise", cfg.synth.label_noise, "synthetic sigma_y");
    cmd->add_option("--strata-count,-N", cfg.sampler.strata_count, "strata in the initial sample");
    cmd->add_option("-k", cfg.sampler.k, "points labeled per cluster");
    cmd->add_option("--initial-size", cfg.sampler.initial_size, "labeled points in the initial sample");
    cmd->add_option("--strata-seed", cfg.sampler.strata_seed, "seed fixing the initial strata");
    cmd->add_option("--c1", cfg.c1, "in-strata cluster cost");
    cmd->add_option("--c2", cfg.c2, "out-of-strata cluster cost");
    cmd->add_option("--budgets", cfg.budgets, "augmentation budgets");
    cmd->add_option("--budget-scope", scope, "augmentation or total")->check(CLI::IsMember({"augmentation", "total"}));
    cmd->add_option("--methods", cfg.methods, "methods to compare");
    cmd->add_option("--lambda", cfg.lambda, "group-rep weight");
    cmd->add_option("--epsilon", cfg.epsilon, "group-rep smoothing");
    cmd->add_option("--image-groups", cfg.image_groups, "k-means groups over features");
    cmd->add_option("--aux-groups", cfg.aux_groups, "k-means groups over auxiliary vectors");
    cmd->add_option("--aux", cfg.aux_path, "auxiliary per-point table (point_id, a0, ...)");
    cmd->add_option("--group-seed", cfg.group_seed, "k-means seed");
    cmd->add_option("--max-iters", cfg.solve.max_iters, "Frank-Wolfe iteration cap");
    cmd->add_option("--gap-tol", cfg.solve.gap_tol, "relative duality-gap tolerance");
    cmd->add_option("--step", step, "pairwise, away-step or diminishing")
        ->check(CLI::IsMember({"pairwise", "away-step", "diminishing"}));
    cmd->add_option("--c2-list", cfg.c2_list, "cost sweep: c2 values");
    cmd->add_option("--sweep-budget", cfg.sweep_budget, "cost sweep: budget");
    cmd->add_option("--initial-sizes", cfg.initial_sizes, "size sweep: initial sample sizes");
    cmd->add_option("--optimized-method", cfg.optimized_method, "size sweep: optimized arm");
    cmd->add_option("--rank-sizes", cfg.rank_sizes, "rank study: sample sizes");
    cmd->add_option("--rank-cluster-k", cfg.rank_cluster_k, "rank study: points per cluster");
    cmd->add_option("--rank-cluster-strata", cfg.rank_cluster_strata, "rank study: strata (0 = all)");
    cmd->add_option("--temperature", cfg.convenience_tau, "rank study: convenience softmax temperature");
    cmd->add_option("--anchor-count", cfg.anchor_count, "rank study: default anchors");
  }

  ExperimentConfig resolve() {
    cfg.scope = parse_budget_scope(scope);
    cfg.solve.step = parse_step_rule(step);
    if (!seed_list.empty()) {
      cfg.seeds = seed_list;
    } else {
      cfg.seeds.clear();
      for (std::size_t i = 0; i < n_seeds; ++i) cfg.seeds.push_back(seed + i);
    }
    if (!config_file.empty()) cfg.apply_json(read_json(config_file));
    cfg.out_dir = out_dir;
    cfg.validate();
    return cfg;
  }
};

struct DatasetFlags {
  std::string dataset;
  void attach(CLI::App* cmd) { cmd->add_option("--dataset", dataset, "dataset bundle directory")->required(); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budget-constrained spatial sample selection"};
  app.require_subcommand(1);

  // generate
  SynthConfig synth;
  std::string gen_out, gen_format = "csv";
  auto* gen = app.add_subcommand("generate", "write a synthetic dataset bundle");
  gen->add_option("--seed", synth.seed, "generator seed")->required();
  gen->add_option("--out-dir", gen_out, "bundle directory")->required();
  gen->add_option("--strata-x", synth.strata_x);
  gen->add_option("--strata-y", synth.strata_y);
  gen->add_option("--clusters-per-stratum", synth.clusters_per_stratum);
  gen->add_option("--min-points", synth.min_points);
  gen->add_option("--max-points", synth.max_points);
  gen->add_option("--feature-dim", synth.feature_dim);
  gen->add_option("--coef-dispersion", synth.coef_dispersion);
  gen->add_option("--label-noise", synth.label_noise);
  gen->add_option("--feature-noise", synth.feature_noise);
  gen->add_option("--unlabeled-fraction", synth.unlabeled_fraction);
  gen->add_option("--test-fraction", synth.test_fraction);
  gen->add_option("--format", gen_format, "csv or binary features")->check(CLI::IsMember({"csv", "binary"}));

  // groups
  DatasetFlags grp_ds;
  std::string grp_kind = "admin", grp_out, grp_aux;
  int grp_count = 8;
  std::uint64_t grp_seed = 0;
  auto* grp = app.add_subcommand("groups", "build a group model");
  grp_ds.attach(grp);
  grp->add_option("--kind", grp_kind, "admin, feature/image or auxiliary/aux");
  grp->add_option("--groups,-G", grp_count, "k-means group count");
  grp->add_option("--seed", grp_seed, "k-means seed");
  grp->add_option("--aux", grp_aux, "auxiliary per-point table");
  grp->add_option("--out-dir", grp_out, "output directory")->required();

  // optimize
  DatasetFlags opt_ds;
  std::string opt_sample, opt_costs, opt_groups, opt_utility = "group-rep", opt_out;
  std::optional<double> opt_budget;
  double opt_lambda = UtilitySpec::kDefaultLambda, opt_eps = UtilitySpec::kDefaultEpsilon;
  std::uint64_t opt_seed = 0;
  SamplerConfig opt_sampler;
  SolveOptions opt_solve;
  auto* opt = app.add_subcommand("optimize", "solve the relaxation, round it and label the chosen clusters");
  opt_ds.attach(opt);
  opt->add_option("--sample", opt_sample, "current sample (default: draw an initial sample)");
  opt->add_option("--costs", opt_costs, "cost model JSON");
  opt->add_option("--budget", opt_budget, "budget (overrides the cost file)");
  opt->add_option("--utility", opt_utility, "size or group-rep")->check(CLI::IsMember({"size", "group-rep"}));
  opt->add_option("--groups-dir", opt_groups, "group model directory (default: admin groups)");
  opt->add_option("--lambda", opt_lambda);
  opt->add_option("--epsilon", opt_eps);
  opt->add_option("--seed", opt_seed, "rounding and labeling seed")->required();
  opt->add_option("--strata-count,-N", opt_sampler.strata_count);
  opt->add_option("-k", opt_sampler.k);
  opt->add_option("--initial-size", opt_sampler.initial_size);
  opt->add_option("--strata-seed", opt_sampler.strata_seed);
  opt->add_option("--max-iters", opt_solve.max_iters);
  opt->add_option("--gap-tol", opt_solve.gap_tol);
  std::string opt_step = "pairwise";
  opt->add_option("--step", opt_step, "pairwise, away-step or diminishing")
      ->check(CLI::IsMember({"pairwise", "away-step", "diminishing"}));
  opt->add_option("--out-dir", opt_out, "output directory")->required();

  // evaluate
  DatasetFlags ev_ds;
  std::string ev_sample, ev_out;
  std::uint64_t ev_seed = 0;
  auto* ev = app.add_subcommand("evaluate", "fit the ridge head on a sample and score the test split");
  ev_ds.attach(ev);
  ev->add_option("--sample", ev_sample, "sample JSON")->required();
  ev->add_option("--seed", ev_seed, "cross-validation seed");
  ev->add_option("--out-dir", ev_out, "output directory")->required();

  ExperimentFlags aug_f, rank_f, cost_f, size_f;
  auto* aug = app.add_subcommand("augment", "budgeted augmentation experiment (one row per budget)");
  aug_f.attach(aug);
  auto* rank = app.add_subcommand("rank-study", "Spearman correlation between utilities and test R2");
  rank_f.attach(rank);
  auto* cost = app.add_subcommand("cost-sweep", "R2 gain as the out-of-strata cost varies");
  cost_f.attach(cost);
  auto* size = app.add_subcommand("size-sweep", "optimized vs default augmentation across initial sizes");
  size_f.attach(size);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (gen->parsed()) {
      const SynthOutput out = generate(synth);
      save_dataset(out.dataset, gen_out, gen_format == "binary" ? FeatureFormat::binary : FeatureFormat::csv);
      save_truth(out.truth, fs::path(gen_out) / "truth.json");
      std::cout << "dataset " << dataset_content_hash(out.dataset) << " (" << out.dataset.points().size()
                << " points)\n";
    } else if (grp->parsed()) {
      const Dataset ds = load_dataset(grp_ds.dataset);
      const GroupKind kind = parse_group_kind(grp_kind);
      GroupModel gm = admin_groups(ds);
      if (kind == GroupKind::feature_kmeans) {
        gm = feature_groups(ds, grp_count, grp_seed);
      } else if (kind == GroupKind::auxiliary_kmeans) {
        if (grp_aux.empty()) throw ConfigError("--aux is required for auxiliary groups");
        ExperimentConfig tmp;
        tmp.dataset_path = grp_ds.dataset;
        tmp.aux_path = grp_aux;
        tmp.aux_groups = grp_count;
        tmp.group_seed = grp_seed;
        tmp.image_groups = 1;
        gm = *ExperimentContext::build(tmp).aux;
      }
      save_groups(ds, gm, grp_out);
    } else if (opt->parsed()) {
      const Dataset ds = load_dataset(opt_ds.dataset);
      Rng rng(opt_seed);
      SampleState state;
      if (!opt_sample.empty()) {
        state = load_sample(ds, opt_sample);
      } else {
        opt_sampler.validate(ds);
        Rng init_rng(derive_seed(opt_seed, "initial"));
        state = draw_initial_sample(ds, opt_sampler, init_rng);
      }
      CostModel cm = opt_costs.empty() ? CostModel{} : load_costs(opt_costs);
      if (opt_budget) cm.budget = *opt_budget;
      cm = bind_initial_strata(cm, ds, state);
      cm.validate();
      UtilitySpec spec = UtilitySpec::size_spec();
      if (opt_utility == "group-rep") {
        auto groups = std::make_shared<GroupModel>(opt_groups.empty() ? admin_groups(ds) : load_groups(ds, opt_groups));
        spec = UtilitySpec::group_rep(groups, opt_lambda, opt_eps);
      }
      opt_solve.step = parse_step_rule(opt_step);
      opt_solve.validate();
      const double budget = augmentation_budget(cm, ds, state);
      if (budget < 0.0) throw InfeasibleError("the initial sample already exceeds the total budget");
      const OptimizedAugment res = optimized_augment_detailed(ds, state, cm, budget, spec, opt_solve, rng);

      std::ostringstream csv;
      csv << "cluster_id,probability,committed,selected_after_rounding\n";
      for (std::size_t c = 0; c < ds.clusters().size(); ++c) {
        const bool committed = res.solve.s.size() ? res.solve.s.committed[c] != 0 : state.contains(c);
        const bool chosen = std::find(res.chosen.begin(), res.chosen.end(), c) != res.chosen.end();
        const double p = res.solve.s.size() ? res.solve.s.values[static_cast<Eigen::Index>(c)] : (committed ? 1.0 : 0.0);
        csv << ds.clusters()[c].id << ',' << format_double(p) << ',' << (committed ? 1 : 0) << ','
            << (chosen ? 1 : 0) << '\n';
      }
      write_text(fs::path(opt_out) / "inclusion.csv", csv.str());
      json meta{{"utility", res.solve.utility},
                {"gap", res.solve.gap},
                {"iterations", res.solve.iterations},
                {"step", to_string(opt_solve.step)},
                {"feasible", res.solve.feasible},
                {"budget", res.solve.budget},
                {"budget_used", res.solve.budget_used},
                {"spent", res.state.spent - state.spent},
                {"clusters_added", res.chosen.size()},
                {"seed", opt_seed},
                {"dataset_hash", dataset_content_hash(ds)}};
      write_text(fs::path(opt_out) / "solve_meta.json", meta.dump(2) + "\n");
      save_sample(ds, res.state, fs::path(opt_out) / "sample.json");
    } else if (ev->parsed()) {
      const Dataset ds = load_dataset(ev_ds.dataset);
      const SampleState state = load_sample(ds, ev_sample);
      const Evaluation e = evaluate_sample_detailed(ds, state, ev_seed);
      json cv = json::array();
      for (const auto& c : e.model.cv) cv.push_back({{"alpha", c.alpha}, {"mean_val_mse", c.mean_val_mse}});
      json model{{"alpha", e.model.alpha},
                 {"intercept", e.model.intercept},
                 {"weights", std::vector<double>(e.model.weights.data(), e.model.weights.data() + e.model.weights.size())},
                 {"cv", cv}};
      write_text(fs::path(ev_out) / "model.json", model.dump(2) + "\n");
      CsvTable t;
      t.header = {"seed", "r2", "alpha", "train_rows", "test_rows", "dataset_hash"};
      t.rows.push_back({std::to_string(ev_seed), format_double(e.r2), format_double(e.model.alpha),
                        std::to_string(e.train_rows), std::to_string(e.test_rows), dataset_content_hash(ds)});
      t.write(fs::path(ev_out) / "results.csv");
      std::cout << "r2 " << format_double(e.r2) << '\n';
    } else if (aug->parsed()) {
      const ExperimentConfig cfg = aug_f.resolve();
      const ExperimentContext ctx = ExperimentContext::build(cfg);
      const AugmentationResult r = run_augmentation(cfg, ctx);
      write_outputs(cfg, ctx, "augment", {{"augment_runs.csv", &r.runs}, {"augment_table.csv", &r.table}});
    } else if (rank->parsed()) {
      const ExperimentConfig cfg = rank_f.resolve();
      const ExperimentContext ctx = ExperimentContext::build(cfg);
      const RankStudyResult r = run_rank_study(cfg, ctx);
      write_outputs(cfg, ctx, "rank-study", {{"rank_samples.csv", &r.samples}, {"rank_rho.csv", &r.rho}});
    } else if (cost->parsed()) {
      const ExperimentConfig cfg = cost_f.resolve();
      const ExperimentContext ctx = ExperimentContext::build(cfg);
      const SweepResult r = run_cost_sweep(cfg, ctx);
      write_outputs(cfg, ctx, "cost-sweep", {{"cost_sweep_runs.csv", &r.runs}, {"cost_sweep.csv", &r.summary}});
    } else if (size->parsed()) {
      const ExperimentConfig cfg = size_f.resolve();
      const ExperimentContext ctx = ExperimentContext::build(cfg);
      const SweepResult r = run_initial_size_sweep(cfg, ctx);
      write_outputs(cfg, ctx, "size-sweep", {{"size_sweep_runs.csv", &r.runs}, {"size_sweep.csv", &r.summary}});
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
