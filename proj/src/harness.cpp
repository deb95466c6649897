#include "geosamp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "geosamp/bundle_io.hpp"
#include "geosamp/learner.hpp"
#include "geosamp/provenance.hpp"
#include "geosamp/utility.hpp"

namespace geosamp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kKnownMethods{"default", "greedy", "random", "size", "rep-admin", "rep-image", "rep-aux"};

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

json synth_to_json(const SynthConfig& s) {
  return {{"strata_x", s.strata_x},
          {"strata_y", s.strata_y},
          {"clusters_per_stratum", s.clusters_per_stratum},
          {"min_points", s.min_points},
          {"max_points", s.max_points},
          {"feature_dim", s.feature_dim},
          {"coef_dispersion", s.coef_dispersion},
          {"label_noise", s.label_noise},
          {"feature_noise", s.feature_noise},
          {"unlabeled_fraction", s.unlabeled_fraction},
          {"test_fraction", s.test_fraction},
          {"seed", s.seed}};
}

void synth_from_json(SynthConfig& s, const json& doc) {
  for (const auto& [key, v] : doc.items()) {
    const std::string k = "synth." + key;
    if (key == "strata_x") s.strata_x = get_as<int>(v, k);
    else if (key == "strata_y") s.strata_y = get_as<int>(v, k);
    else if (key == "clusters_per_stratum") s.clusters_per_stratum = get_as<int>(v, k);
    else if (key == "min_points") s.min_points = get_as<int>(v, k);
    else if (key == "max_points") s.max_points = get_as<int>(v, k);
    else if (key == "feature_dim") s.feature_dim = get_as<int>(v, k);
    else if (key == "coef_dispersion") s.coef_dispersion = get_as<double>(v, k);
    else if (key == "label_noise") s.label_noise = get_as<double>(v, k);
    else if (key == "feature_noise") s.feature_noise = get_as<double>(v, k);
    else if (key == "unlabeled_fraction") s.unlabeled_fraction = get_as<double>(v, k);
    else if (key == "test_fraction") s.test_fraction = get_as<double>(v, k);
    else if (key == "seed") s.seed = get_as<std::uint64_t>(v, k);
    else throw ConfigError("unknown config key '" + k + "'");
  }
}

std::string seed_string(std::uint64_t s) { return std::to_string(s); }

/// Evaluation seed for a sample: the run seed, so equal training sets get
/// equal folds.
std::uint64_t eval_seed(std::uint64_t seed) { return seed; }

std::vector<std::pair<double, double>> default_anchors(const Dataset& ds, int count) {
  std::vector<std::size_t> order(ds.clusters().size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ds.clusters()[a].size() > ds.clusters()[b].size(); });
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < count && static_cast<std::size_t>(i) < order.size(); ++i) {
    const auto& c = ds.clusters()[order[static_cast<std::size_t>(i)]];
    double x = 0.0, y = 0.0;
    for (std::size_t p : c.members) {
      x += ds.points()[p].x;
      y += ds.points()[p].y;
    }
    out.emplace_back(x / static_cast<double>(c.size()), y / static_cast<double>(c.size()));
  }
  return out;
}

Eigen::MatrixXd load_aux(const Dataset& ds, const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open auxiliary table '" + file.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("auxiliary table has no header");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "point_id") throw DataError("auxiliary table must start with point_id");
  Eigen::MatrixXd aux(static_cast<Eigen::Index>(ds.points().size()), static_cast<Eigen::Index>(header.size() - 1));
  std::vector<char> seen(ds.points().size(), 0);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) throw DataError("auxiliary row for '" + f[0] + "' has the wrong width");
    const std::size_t p = ds.point_index(f[0]);
    for (std::size_t j = 1; j < f.size(); ++j)
      aux(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j - 1)) = parse_double(f[j], "auxiliary value");
    seen[p] = 1;
  }
  for (std::size_t p = 0; p < seen.size(); ++p)
    if (!seen[p]) throw DataError("auxiliary table has no row for point '" + ds.points()[p].id + "'");
  return aux;
}

CostModel base_costs(const ExperimentConfig& cfg, double c2, double budget) {
  CostModel cm;
  cm.c1 = cfg.c1;
  cm.c2 = c2;
  cm.budget = budget;
  cm.scope = cfg.scope;
  return cm;
}

void add_provenance(CsvTable& t, const ExperimentConfig& cfg, const ExperimentContext& ctx) {
  t.header.push_back("config_hash");
  t.header.push_back("dataset_hash");
  const std::string h = cfg.hash();
  for (auto& row : t.rows) {
    row.push_back(h);
    row.push_back(ctx.dataset_hash);
  }
}

struct RunOutcome {
  double r2 = 0.0;
  double spent = 0.0;
  std::size_t added = 0;
  std::size_t labeled = 0;
  bool infeasible = false;
};

RunOutcome augment_and_score(const ExperimentContext& ctx, const ExperimentConfig& cfg, const std::string& method,
                             const SampleState& initial, const CostModel& cm, std::uint64_t seed,
                             const std::string& tag) {
  RunOutcome out;
  const double avail = augmentation_budget(cm, ctx.dataset, initial);
  if (avail < 0.0) {
    out.infeasible = true;
    out.r2 = std::nan("");
    return out;
  }
  Rng rng(derive_seed(derive_seed(seed, method), tag));
  const SampleState st = run_method(ctx, cfg, method, initial, cm, avail, rng);
  out.r2 = evaluate_sample(ctx.dataset, st, eval_seed(seed));
  out.spent = st.spent - initial.spent;
  out.added = st.augment_clusters.size() - initial.augment_clusters.size();
  out.labeled = st.labeled_count();
  out.infeasible = st.infeasible;
  return out;
}

SampleState initial_sample(const ExperimentContext& ctx, const SamplerConfig& sc, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "initial"));
  return draw_initial_sample(ctx.dataset, sc, rng);
}

std::string cell_or_na(double v) { return std::isfinite(v) ? fmt(v) : "NA"; }

}  // namespace

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("seeds must be non-empty");
  for (double b : budgets)
    if (!(b >= 0.0)) throw ConfigError("budgets must be non-negative");
  if (!(c1 > 0.0) || !(c2 >= c1)) throw ConfigError("costs must satisfy c2 >= c1 > 0");
  for (double v : c2_list)
    if (!(v >= c1)) throw ConfigError("every c2 in the sweep must be at least c1");
  if (!(sweep_budget >= 0.0)) throw ConfigError("sweep budget must be non-negative");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (image_groups < 1 || aux_groups < 1) throw ConfigError("group counts must be at least 1");
  for (const auto& m : methods)
    if (!is_known_method(m)) throw ConfigError("unknown method '" + m + "'");
  if (!is_known_method(optimized_method)) throw ConfigError("unknown method '" + optimized_method + "'");
  if (std::find(methods.begin(), methods.end(), "rep-aux") != methods.end() && aux_path.empty())
    throw ConfigError("method rep-aux needs aux_path");
  if (sampler.k < 1) throw ConfigError("k must be at least 1");
  if (rank_cluster_k < 1) throw ConfigError("rank_cluster_k must be at least 1");
  if (!(convenience_tau > 0.0)) throw ConfigError("convenience temperature must be positive");
  if (dataset_path.empty()) synth.validate();
  solve.validate();
}

json ExperimentConfig::to_json() const {
  json doc;
  doc["dataset_path"] = dataset_path;
  doc["synth"] = synth_to_json(synth);
  doc["sampler"] = {{"N", sampler.strata_count},
                    {"k", sampler.k},
                    {"initial_size", sampler.initial_size},
                    {"strata_seed", sampler.strata_seed}};
  doc["c1"] = c1;
  doc["c2"] = c2;
  doc["budgets"] = budgets;
  doc["budget_scope"] = to_string(scope);
  doc["methods"] = methods;
  doc["seeds"] = seeds;
  doc["lambda"] = lambda;
  doc["epsilon"] = epsilon;
  doc["image_groups"] = image_groups;
  doc["aux_groups"] = aux_groups;
  doc["aux_path"] = aux_path;
  doc["group_seed"] = group_seed;
  doc["solve"] = {{"max_iters", solve.max_iters},
                  {"gap_tol", solve.gap_tol},
                  {"step", to_string(solve.step)}};
  doc["c2_list"] = c2_list;
  doc["sweep_budget"] = sweep_budget;
  doc["initial_sizes"] = initial_sizes;
  doc["optimized_method"] = optimized_method;
  doc["rank_sizes"] = rank_sizes;
  doc["rank_cluster_k"] = rank_cluster_k;
  doc["rank_cluster_strata"] = rank_cluster_strata;
  doc["convenience_tau"] = convenience_tau;
  json anchor_list = json::array();
  for (const auto& [x, y] : anchors) anchor_list.push_back({x, y});
  doc["anchors"] = anchor_list;
  doc["anchor_count"] = anchor_count;
  return doc;
}

void ExperimentConfig::apply_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
  for (const auto& [key, v] : doc.items()) {
    if (key == "dataset_path") dataset_path = get_as<std::string>(v, key);
    else if (key == "synth") synth_from_json(synth, v);
    else if (key == "sampler") {
      for (const auto& [sk, sv] : v.items()) {
        const std::string k = "sampler." + sk;
        if (sk == "N") sampler.strata_count = get_as<int>(sv, k);
        else if (sk == "k") sampler.k = get_as<int>(sv, k);
        else if (sk == "initial_size") sampler.initial_size = get_as<std::size_t>(sv, k);
        else if (sk == "strata_seed") sampler.strata_seed = get_as<std::uint64_t>(sv, k);
        else throw ConfigError("unknown config key '" + k + "'");
      }
    } else if (key == "c1") c1 = get_as<double>(v, key);
    else if (key == "c2") c2 = get_as<double>(v, key);
    else if (key == "budgets") budgets = get_as<std::vector<double>>(v, key);
    else if (key == "budget_scope") scope = parse_budget_scope(get_as<std::string>(v, key));
    else if (key == "methods") methods = get_as<std::vector<std::string>>(v, key);
    else if (key == "seeds") seeds = get_as<std::vector<std::uint64_t>>(v, key);
    else if (key == "lambda") lambda = get_as<double>(v, key);
    else if (key == "epsilon") epsilon = get_as<double>(v, key);
    else if (key == "image_groups") image_groups = get_as<int>(v, key);
    else if (key == "aux_groups") aux_groups = get_as<int>(v, key);
    else if (key == "aux_path") aux_path = get_as<std::string>(v, key);
    else if (key == "group_seed") group_seed = get_as<std::uint64_t>(v, key);
    else if (key == "solve") {
      for (const auto& [sk, sv] : v.items()) {
        const std::string k = "solve." + sk;
        if (sk == "max_iters") solve.max_iters = get_as<int>(sv, k);
        else if (sk == "gap_tol") solve.gap_tol = get_as<double>(sv, k);
        else if (sk == "step") solve.step = parse_step_rule(get_as<std::string>(sv, k));
        else throw ConfigError("unknown config key '" + k + "'");
      }
    } else if (key == "c2_list") c2_list = get_as<std::vector<double>>(v, key);
    else if (key == "sweep_budget") sweep_budget = get_as<double>(v, key);
    else if (key == "initial_sizes") initial_sizes = get_as<std::vector<std::size_t>>(v, key);
    else if (key == "optimized_method") optimized_method = get_as<std::string>(v, key);
    else if (key == "rank_sizes") rank_sizes = get_as<std::vector<std::size_t>>(v, key);
    else if (key == "rank_cluster_k") rank_cluster_k = get_as<int>(v, key);
    else if (key == "rank_cluster_strata") rank_cluster_strata = get_as<int>(v, key);
    else if (key == "convenience_tau") convenience_tau = get_as<double>(v, key);
    else if (key == "anchors") {
      anchors.clear();
      for (const auto& a : v) {
        const auto xy = get_as<std::vector<double>>(a, key);
        if (xy.size() != 2) throw ConfigError("each anchor must be [x, y]");
        anchors.emplace_back(xy[0], xy[1]);
      }
    } else if (key == "anchor_count") anchor_count = get_as<int>(v, key);
    else if (key == "out_dir") out_dir = get_as<std::string>(v, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

std::string ExperimentConfig::hash() const { return sha1_hex(to_json().dump()); }

// ---------------------------------------------------------------- context

ExperimentContext ExperimentContext::build(const ExperimentConfig& cfg) {
  ExperimentContext ctx{cfg.dataset_path.empty() ? generate(cfg.synth).dataset : load_dataset(cfg.dataset_path),
                        {}, nullptr, nullptr, nullptr};
  ctx.dataset_hash = dataset_content_hash(ctx.dataset);
  ctx.admin = std::make_shared<GroupModel>(admin_groups(ctx.dataset));
  ctx.image = std::make_shared<GroupModel>(feature_groups(ctx.dataset, cfg.image_groups, cfg.group_seed));
  if (!cfg.aux_path.empty())
    ctx.aux = std::make_shared<GroupModel>(
        auxiliary_groups(ctx.dataset, load_aux(ctx.dataset, cfg.aux_path), cfg.aux_groups, cfg.group_seed));
  return ctx;
}

bool is_known_method(const std::string& method) {
  return std::find(kKnownMethods.begin(), kKnownMethods.end(), method) != kKnownMethods.end();
}

SampleState run_method(const ExperimentContext& ctx, const ExperimentConfig& cfg, const std::string& method,
                       const SampleState& initial, const CostModel& cm, double budget, Rng& rng) {
  const Dataset& ds = ctx.dataset;
  if (method == "default") return default_cluster_augment(ds, initial, cm, budget, rng);
  if (method == "greedy") return greedy_size_augment(ds, initial, cm, budget, rng);
  if (method == "random") return random_cluster_augment(ds, initial, cm, budget, rng);
  if (method == "size") return optimized_augment(ds, initial, cm, budget, UtilitySpec::size_spec(), cfg.solve, rng);
  std::shared_ptr<const GroupModel> groups;
  if (method == "rep-admin") groups = ctx.admin;
  else if (method == "rep-image") groups = ctx.image;
  else if (method == "rep-aux") groups = ctx.aux;
  else throw ConfigError("unknown method '" + method + "'");
  if (!groups) throw ConfigError("method '" + method + "' has no group model");
  return optimized_augment(ds, initial, cm, budget, UtilitySpec::group_rep(groups, cfg.lambda, cfg.epsilon), cfg.solve,
                           rng);
}

MeanStats summarize(const std::vector<double>& v) {
  MeanStats s;
  s.n = v.size();
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    s.se = s.sd / std::sqrt(static_cast<double>(v.size()));
  }
  return s;
}

// ---------------------------------------------------------------- tables

std::string CsvTable::to_string() const {
  std::ostringstream out;
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
    out << '\n';
  }
  return out.str();
}

void CsvTable::write(const fs::path& file) const {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + file.string() + "'");
  out << to_string();
}

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range("no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentContext& ctx, const std::string& command,
                   const std::vector<std::pair<std::string, const CsvTable*>>& tables) {
  if (cfg.out_dir.empty()) throw ConfigError("an output directory is required");
  fs::create_directories(cfg.out_dir);
  json names = json::array();
  for (const auto& [name, table] : tables) {
    table->write(cfg.out_dir / name);
    names.push_back(name);
  }
  json meta;
  meta["command"] = command;
  meta["config"] = cfg.to_json();
  meta["config_hash"] = cfg.hash();
  meta["dataset_hash"] = ctx.dataset_hash;
  meta["tables"] = names;
  std::ofstream out(cfg.out_dir / "run_meta.json", std::ios::binary | std::ios::trunc);
  out << meta.dump(2) << '\n';
}

// ---------------------------------------------------------------- experiments

AugmentationResult run_augmentation(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_augmentation(cfg, ExperimentContext::build(cfg));
}

AugmentationResult run_augmentation(const ExperimentConfig& cfg, const ExperimentContext& ctx) {
  cfg.validate();
  const std::size_t nb = cfg.budgets.size(), nm = cfg.methods.size(), ns = cfg.seeds.size();
  std::vector<RunOutcome> outcomes(nb * nm * ns);
  std::vector<double> initial_r2(ns);
  auto at = [&](std::size_t b, std::size_t m, std::size_t s) -> RunOutcome& { return outcomes[(b * nm + m) * ns + s]; };

  for (std::size_t s = 0; s < ns; ++s) {
    const std::uint64_t seed = cfg.seeds[s];
    const SampleState init = initial_sample(ctx, cfg.sampler, seed);
    initial_r2[s] = evaluate_sample(ctx.dataset, init, eval_seed(seed));
    for (std::size_t b = 0; b < nb; ++b) {
      const CostModel cm = bind_initial_strata(base_costs(cfg, cfg.c2, cfg.budgets[b]), ctx.dataset, init);
      for (std::size_t m = 0; m < nm; ++m)
        at(b, m, s) = augment_and_score(ctx, cfg, cfg.methods[m], init, cm, seed, "budget=" + fmt(cfg.budgets[b]));
    }
  }

  AugmentationResult res;
  res.runs.header = {"method", "budget", "seed", "r2_initial", "r2", "delta_r2", "spent", "clusters_added",
                     "labeled", "infeasible"};
  for (std::size_t m = 0; m < nm; ++m)
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t s = 0; s < ns; ++s) {
        const RunOutcome& o = at(b, m, s);
        res.runs.rows.push_back({cfg.methods[m], fmt(cfg.budgets[b]), seed_string(cfg.seeds[s]), fmt(initial_r2[s]),
                                 cell_or_na(o.r2), cell_or_na(o.r2 - initial_r2[s]), fmt(o.spent), fmt(o.added),
                                 fmt(o.labeled), o.infeasible ? "1" : "0"});
      }

  res.table.header = {"budget", "initial_mean", "initial_sd", "initial_se"};
  for (const auto& m : cfg.methods)
    for (const char* stat : {"_mean", "_sd", "_se"}) res.table.header.push_back(m + stat);
  res.table.header.push_back("n_seeds");
  const MeanStats init_stats = summarize(initial_r2);
  for (std::size_t b = 0; b < nb; ++b) {
    std::vector<std::string> row{fmt(cfg.budgets[b]), fmt(init_stats.mean), fmt(init_stats.sd), fmt(init_stats.se)};
    for (std::size_t m = 0; m < nm; ++m) {
      std::vector<double> vals;
      bool infeasible = false;
      for (std::size_t s = 0; s < ns; ++s) {
        infeasible = infeasible || at(b, m, s).infeasible;
        vals.push_back(at(b, m, s).r2);
      }
      if (infeasible) {
        row.insert(row.end(), {"infeasible", "infeasible", "infeasible"});
      } else {
        const MeanStats st = summarize(vals);
        row.insert(row.end(), {fmt(st.mean), fmt(st.sd), fmt(st.se)});
      }
    }
    row.push_back(fmt(ns));
    res.table.rows.push_back(std::move(row));
  }
  add_provenance(res.runs, cfg, ctx);
  add_provenance(res.table, cfg, ctx);
  return res;
}

RankStudyResult run_rank_study(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_rank_study(cfg, ExperimentContext::build(cfg));
}

RankStudyResult run_rank_study(const ExperimentConfig& cfg, const ExperimentContext& ctx) {
  cfg.validate();
  const Dataset& ds = ctx.dataset;
  const std::vector<std::string> types{"cluster", "convenience", "random"};
  std::vector<std::pair<std::string, UtilitySpec>> utilities{
      {"size", UtilitySpec::size_spec()},
      {"rep-admin", UtilitySpec::group_rep(ctx.admin, cfg.lambda, cfg.epsilon)},
      {"rep-image", UtilitySpec::group_rep(ctx.image, cfg.lambda, cfg.epsilon)}};
  if (ctx.aux) utilities.emplace_back("rep-aux", UtilitySpec::group_rep(ctx.aux, cfg.lambda, cfg.epsilon));

  ConvenienceConfig conv;
  conv.anchors = cfg.anchors.empty() ? default_anchors(ds, cfg.anchor_count) : cfg.anchors;
  conv.temperature = cfg.convenience_tau;
  SamplerConfig cluster_cfg;
  cluster_cfg.k = cfg.rank_cluster_k;
  cluster_cfg.strata_count = cfg.rank_cluster_strata > 0 ? cfg.rank_cluster_strata : static_cast<int>(ds.strata().size());

  RankStudyResult res;
  res.samples.header = {"type", "size", "seed", "labeled", "r2"};
  for (const auto& [name, spec] : utilities) res.samples.header.push_back("util_" + name);

  struct Row {
    std::size_t type;
    double r2;
    std::vector<double> util;
  };
  std::vector<Row> rows;
  for (std::size_t t = 0; t < types.size(); ++t)
    for (std::size_t size : cfg.rank_sizes)
      for (std::uint64_t seed : cfg.seeds) {
        Rng rng(derive_seed(derive_seed(seed, types[t]), static_cast<std::uint64_t>(size)));
        SampleState st;
        double r2 = 0.0;
        try {
          if (types[t] == "cluster") {
            cluster_cfg.initial_size = size;
            cluster_cfg.strata_seed = derive_seed(seed, "rank-strata");
            st = draw_initial_sample(ds, cluster_cfg, rng);
          } else if (types[t] == "convenience") {
            conv.size = size;
            st = convenience_sample(ds, conv, rng);
          } else {
            st = random_point_sample(ds, size, rng);
          }
          r2 = evaluate_sample(ds, st, eval_seed(seed));
        } catch (const std::exception& e) {
          std::cerr << "warning: skipping " << types[t] << " sample of size " << size << " (seed " << seed
                    << "): " << e.what() << '\n';
          continue;
        }
        Row row{t, r2, {}};
        std::vector<std::string> cells{types[t], fmt(size), seed_string(seed), fmt(st.labeled_count()), fmt(r2)};
        for (const auto& [name, spec] : utilities) {
          const double u = utility_of_sample(st, spec);
          row.util.push_back(u);
          cells.push_back(fmt(u));
        }
        rows.push_back(std::move(row));
        res.samples.rows.push_back(std::move(cells));
      }

  res.rho.header = {"utility", "type", "rho", "n"};
  for (std::size_t u = 0; u < utilities.size(); ++u) {
    for (std::size_t t = 0; t <= types.size(); ++t) {
      std::vector<double> a, b;
      for (const auto& r : rows)
        if (t == types.size() || r.type == t) {
          a.push_back(r.util[u]);
          b.push_back(r.r2);
        }
      std::string rho = "NA";
      if (a.size() >= 2) {
        try {
          rho = fmt(spearman_rho(a, b));
        } catch (const std::domain_error&) {
          rho = "NA";
        }
      }
      res.rho.rows.push_back({utilities[u].first, t == types.size() ? "overall" : types[t], rho, fmt(a.size())});
    }
  }
  add_provenance(res.samples, cfg, ctx);
  add_provenance(res.rho, cfg, ctx);
  return res;
}

SweepResult run_cost_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_cost_sweep(cfg, ExperimentContext::build(cfg));
}

SweepResult run_cost_sweep(const ExperimentConfig& cfg, const ExperimentContext& ctx) {
  cfg.validate();
  const std::size_t nc = cfg.c2_list.size(), nm = cfg.methods.size(), ns = cfg.seeds.size();
  std::vector<RunOutcome> outcomes(nc * nm * ns);
  std::vector<double> initial_r2(ns);
  auto at = [&](std::size_t c, std::size_t m, std::size_t s) -> RunOutcome& { return outcomes[(c * nm + m) * ns + s]; };
  for (std::size_t s = 0; s < ns; ++s) {
    const std::uint64_t seed = cfg.seeds[s];
    const SampleState init = initial_sample(ctx, cfg.sampler, seed);
    initial_r2[s] = evaluate_sample(ctx.dataset, init, eval_seed(seed));
    for (std::size_t c = 0; c < nc; ++c) {
      const CostModel cm = bind_initial_strata(base_costs(cfg, cfg.c2_list[c], cfg.sweep_budget), ctx.dataset, init);
      for (std::size_t m = 0; m < nm; ++m)
        at(c, m, s) = augment_and_score(ctx, cfg, cfg.methods[m], init, cm, seed, "c2=" + fmt(cfg.c2_list[c]));
    }
  }

  SweepResult res;
  res.runs.header = {"c2", "c1", "budget", "method", "seed", "r2_initial", "r2", "delta_r2", "spent", "infeasible"};
  res.summary.header = {"c2", "c1", "budget", "method", "delta_r2_mean", "delta_r2_sd", "delta_r2_se", "n",
                        "infeasible_runs"};
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t m = 0; m < nm; ++m) {
      std::vector<double> deltas;
      std::size_t infeasible = 0;
      for (std::size_t s = 0; s < ns; ++s) {
        const RunOutcome& o = at(c, m, s);
        const double delta = o.r2 - initial_r2[s];
        res.runs.rows.push_back({fmt(cfg.c2_list[c]), fmt(cfg.c1), fmt(cfg.sweep_budget), cfg.methods[m],
                                 seed_string(cfg.seeds[s]), fmt(initial_r2[s]), cell_or_na(o.r2), cell_or_na(delta),
                                 fmt(o.spent), o.infeasible ? "1" : "0"});
        if (o.infeasible) ++infeasible;
        if (std::isfinite(delta)) deltas.push_back(delta);
      }
      const MeanStats st = summarize(deltas);
      res.summary.rows.push_back({fmt(cfg.c2_list[c]), fmt(cfg.c1), fmt(cfg.sweep_budget), cfg.methods[m],
                                  fmt(st.mean), fmt(st.sd), fmt(st.se), fmt(st.n), fmt(infeasible)});
    }
  add_provenance(res.runs, cfg, ctx);
  add_provenance(res.summary, cfg, ctx);
  return res;
}

SweepResult run_initial_size_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_initial_size_sweep(cfg, ExperimentContext::build(cfg));
}

SweepResult run_initial_size_sweep(const ExperimentConfig& cfg, const ExperimentContext& ctx) {
  cfg.validate();
  const std::vector<std::string> arms{cfg.optimized_method, "default"};
  SweepResult res;
  res.runs.header = {"initial_size", "budget", "arm", "method", "seed", "r2_initial", "r2", "initial_cost",
                     "spent", "total_cost", "infeasible"};
  res.summary.header = {"initial_size", "budget", "arm", "method", "r2_mean", "r2_sd", "r2_se",
                        "total_cost_mean", "n", "infeasible_runs"};
  for (std::size_t size : cfg.initial_sizes) {
    SamplerConfig sc = cfg.sampler;
    sc.initial_size = size;
    std::vector<SampleState> inits;
    std::vector<double> init_r2;
    for (std::uint64_t seed : cfg.seeds) {
      inits.push_back(initial_sample(ctx, sc, seed));
      init_r2.push_back(evaluate_sample(ctx.dataset, inits.back(), eval_seed(seed)));
    }
    for (double budget : cfg.budgets) {
      for (std::size_t a = 0; a < arms.size(); ++a) {
        std::vector<double> r2s, totals;
        std::size_t infeasible = 0;
        for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
          const CostModel cm = bind_initial_strata(base_costs(cfg, cfg.c2, budget), ctx.dataset, inits[s]);
          const double initial_cost = set_cost(cm, ctx.dataset, std::span<const std::size_t>(inits[s].initial_clusters));
          const RunOutcome o = augment_and_score(ctx, cfg, arms[a], inits[s], cm, cfg.seeds[s],
                                                 "size=" + fmt(size) + ",budget=" + fmt(budget));
          const double total = initial_cost + o.spent;
          res.runs.rows.push_back({fmt(size), fmt(budget), a == 0 ? "optimized" : "default", arms[a],
                                   seed_string(cfg.seeds[s]), fmt(init_r2[s]), cell_or_na(o.r2), fmt(initial_cost),
                                   fmt(o.spent), fmt(total), o.infeasible ? "1" : "0"});
          if (o.infeasible) ++infeasible;
          if (std::isfinite(o.r2)) r2s.push_back(o.r2);
          totals.push_back(total);
        }
        const MeanStats st = summarize(r2s);
        res.summary.rows.push_back({fmt(size), fmt(budget), a == 0 ? "optimized" : "default", arms[a], fmt(st.mean),
                                    fmt(st.sd), fmt(st.se), fmt(summarize(totals).mean), fmt(st.n), fmt(infeasible)});
      }
    }
  }
  add_provenance(res.runs, cfg, ctx);
  add_provenance(res.summary, cfg, ctx);
  return res;
}

}  // namespace geosamp
