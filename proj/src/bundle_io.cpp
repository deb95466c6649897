#include "geosamp/bundle_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace geosamp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<char, 4> kBinMagic = {'G', 'S', 'O', 'F'};

std::ifstream open_in(const fs::path& file, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(file, mode);
  if (!in) throw DataError("cannot open '" + file.string() + "'");
  return in;
}

std::ofstream open_out(const fs::path& file, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(file, mode | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + file.string() + "'");
  return out;
}

json read_json(const fs::path& file) {
  auto in = open_in(file);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("invalid JSON in '" + file.string() + "': " + e.what());
  }
}

void write_json(const fs::path& file, const json& doc) {
  auto out = open_out(file);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing '" + file.string() + "'");
}

/// CSV table with a required header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const fs::path& file) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw DataError("'" + file.string() + "' is missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

Table read_csv(const fs::path& file) {
  auto in = open_in(file);
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + file.string() + "' has no header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Tolerate a UTF-8 byte order mark.
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  t.header = split_csv_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != t.header.size())
      throw DataError("'" + file.string() + "' line " + std::to_string(lineno) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(t.header.size()));
    t.rows.push_back(std::move(fields));
  }
  return t;
}

void check_id(const std::string& id) {
  if (id.find_first_of(",\n\r") != std::string::npos)
    throw DataError("identifier '" + id + "' contains a separator character");
}

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::map<std::string, std::vector<double>> read_features_csv(const fs::path& file, std::size_t dim) {
  Table t = read_csv(file);
  const std::size_t id_col = t.column("point_id", file);
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < dim; ++j) cols.push_back(t.column("f" + std::to_string(j), file));
  if (t.header.size() != dim + 1)
    throw DataError("'" + file.string() + "' has " + std::to_string(t.header.size() - 1) +
                    " feature columns, expected " + std::to_string(dim));
  std::map<std::string, std::vector<double>> out;
  for (const auto& row : t.rows) {
    std::vector<double> f(dim);
    for (std::size_t j = 0; j < dim; ++j) f[j] = parse_double(row[cols[j]], "feature of '" + row[id_col] + "'");
    if (!out.emplace(row[id_col], std::move(f)).second)
      throw DataError("duplicate feature row for point '" + row[id_col] + "'");
  }
  return out;
}

// Binary rows follow points.csv row order.
std::vector<std::vector<double>> read_features_bin(const fs::path& file, std::size_t dim) {
  auto in = open_in(file, std::ios::in | std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || !std::equal(kBinMagic.begin(), kBinMagic.end(), bytes.begin()))
    throw DataError("'" + file.string() + "' is not a feature binary (bad magic)");
  const std::uint32_t rows = read_u32_le(bytes.data() + 4);
  const std::uint32_t cols = read_u32_le(bytes.data() + 8);
  if (cols != dim)
    throw DataError("'" + file.string() + "' has dimension " + std::to_string(cols) + ", expected " +
                    std::to_string(dim));
  const std::size_t expected = 16 + static_cast<std::size_t>(rows) * cols * 4;
  if (bytes.size() != expected) throw DataError("'" + file.string() + "' is truncated");
  std::vector<std::vector<double>> out(rows, std::vector<double>(cols));
  const unsigned char* p = bytes.data() + 16;
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c, p += 4) {
      const std::uint32_t bits = read_u32_le(p);
      float f;
      std::memcpy(&f, &bits, 4);
      out[r][c] = static_cast<double>(f);
    }
  return out;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw DataError("cannot parse '" + s + "' as a number (" + context + ")");
  return v;
}

Dataset load_dataset(const fs::path& dir) {
  const json meta = read_json(dir / "meta.json");
  std::size_t dim = 0;
  std::uint64_t split_seed = 0;
  double test_fraction = Dataset::kDefaultTestFraction;
  std::vector<StratumSpec> strata;
  std::string features_file;
  try {
    dim = meta.at("feature_dim").get<std::size_t>();
    split_seed = meta.value("split_seed", std::uint64_t{0});
    test_fraction = meta.value("test_fraction", Dataset::kDefaultTestFraction);
    features_file = meta.value("features_file", std::string());
    for (const auto& s : meta.at("strata")) {
      StratumSpec spec;
      spec.id = s.at("stratum_id").get<std::string>();
      spec.in_initial = s.value("in_initial", false);
      spec.cluster_ids = s.at("cluster_ids").get<std::vector<std::string>>();
      strata.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw DataError("meta.json: " + std::string(e.what()));
  }
  if (dim == 0) throw DataError("feature dimension is zero");

  const fs::path points_file = dir / "points.csv";
  Table t = read_csv(points_file);
  const std::size_t c_id = t.column("point_id", points_file);
  const std::size_t c_x = t.column("x", points_file);
  const std::size_t c_y = t.column("y", points_file);
  const std::size_t c_label = t.column("label", points_file);
  const std::size_t c_cluster = t.column("cluster_id", points_file);
  const std::size_t c_stratum = t.column("stratum_id", points_file);

  std::vector<Point> points;
  points.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    Point p;
    p.id = row[c_id];
    p.x = parse_double(row[c_x], "x of '" + p.id + "'");
    p.y = parse_double(row[c_y], "y of '" + p.id + "'");
    if (row[c_label] != "NA" && !row[c_label].empty())
      p.label = parse_double(row[c_label], "label of '" + p.id + "'");
    p.cluster_id = row[c_cluster];
    p.stratum_id = row[c_stratum];
    points.push_back(std::move(p));
  }

  if (features_file.empty())
    features_file = fs::exists(dir / "features.bin") && !fs::exists(dir / "features.csv") ? "features.bin"
                                                                                         : "features.csv";
  if (features_file == "features.bin") {
    auto rows = read_features_bin(dir / features_file, dim);
    if (rows.size() != points.size())
      throw DataError("features.bin has " + std::to_string(rows.size()) + " rows, points.csv has " +
                      std::to_string(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) points[i].features = std::move(rows[i]);
  } else {
    auto by_id = read_features_csv(dir / features_file, dim);
    for (auto& p : points) {
      auto it = by_id.find(p.id);
      if (it == by_id.end()) throw DataError("no feature row for point '" + p.id + "'");
      p.features = std::move(it->second);
      by_id.erase(it);
    }
    if (!by_id.empty()) throw DataError("feature row for unknown point '" + by_id.begin()->first + "'");
  }

  if (meta.contains("n_points") && meta["n_points"].get<std::size_t>() != points.size())
    throw DataError("meta.json n_points disagrees with points.csv");
  return Dataset::build(std::move(points), strata, split_seed, test_fraction);
}

std::map<std::string, std::string> bundle_files(const Dataset& ds, FeatureFormat format) {
  if (ds.feature_dim() == 0) throw DataError("feature dimension is zero");
  for (const auto& c : ds.clusters())
    if (c.size() == 0) throw DataError("cluster '" + c.id + "' has no points");
  for (const auto& p : ds.points()) check_id(p.id);
  for (const auto& c : ds.clusters()) check_id(c.id);
  for (const auto& s : ds.strata()) check_id(s.id);
  if (format == FeatureFormat::binary)
    for (const auto& p : ds.points())
      for (double f : p.features)
        if (static_cast<double>(static_cast<float>(f)) != f)
          throw DataError("point '" + p.id + "' has a feature not representable as float32");

  std::map<std::string, std::string> files;
  json meta;
  meta["format"] = "geosamp-bundle";
  meta["version"] = 1;
  meta["feature_dim"] = ds.feature_dim();
  meta["n_points"] = ds.points().size();
  meta["n_clusters"] = ds.clusters().size();
  meta["n_strata"] = ds.strata().size();
  meta["split_seed"] = ds.split_seed();
  meta["test_fraction"] = ds.test_fraction();
  meta["features_file"] = format == FeatureFormat::binary ? "features.bin" : "features.csv";
  json strata = json::array();
  for (const auto& s : ds.strata()) {
    json ids = json::array();
    for (std::size_t c : s.clusters) ids.push_back(ds.clusters()[c].id);
    strata.push_back({{"stratum_id", s.id}, {"in_initial", s.in_initial}, {"cluster_ids", ids}});
  }
  meta["strata"] = strata;
  files["meta.json"] = meta.dump(2) + "\n";

  {
    std::ostringstream out;
    out << "point_id,x,y,label,cluster_id,stratum_id\n";
    for (const auto& p : ds.points())
      out << p.id << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
          << (p.label ? format_double(*p.label) : "NA") << ',' << p.cluster_id << ',' << p.stratum_id << '\n';
    files["points.csv"] = out.str();
  }

  std::ostringstream out;
  if (format == FeatureFormat::csv) {
    out << "point_id";
    for (std::size_t j = 0; j < ds.feature_dim(); ++j) out << ",f" << j;
    out << '\n';
    for (const auto& p : ds.points()) {
      out << p.id;
      for (double f : p.features) out << ',' << format_double(f);
      out << '\n';
    }
    files["features.csv"] = out.str();
  } else {
    out.write(kBinMagic.data(), 4);
    write_u32_le(out, static_cast<std::uint32_t>(ds.points().size()));
    write_u32_le(out, static_cast<std::uint32_t>(ds.feature_dim()));
    write_u32_le(out, 0);  // reserved
    for (const auto& p : ds.points())
      for (double f : p.features) {
        const float v = static_cast<float>(f);
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        write_u32_le(out, bits);
      }
    files["features.bin"] = out.str();
  }
  return files;
}

void save_dataset(const Dataset& ds, const fs::path& dir, FeatureFormat format) {
  const auto files = bundle_files(ds, format);
  fs::create_directories(dir);
  const fs::path other = dir / (format == FeatureFormat::binary ? "features.csv" : "features.bin");
  if (fs::exists(other)) fs::remove(other);
  for (const auto& [name, content] : files) {
    auto out = open_out(dir / name, std::ios::out | std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("failed writing '" + (dir / name).string() + "'");
  }
}

CostModel load_costs(const fs::path& file) {
  const json doc = read_json(file);
  CostModel cm;
  try {
    cm.c1 = doc.at("c1").get<double>();
    cm.c2 = doc.at("c2").get<double>();
    cm.budget = doc.value("budget", 0.0);
    if (doc.contains("overrides"))
      cm.overrides = doc["overrides"].get<std::map<std::string, double>>();
    if (doc.contains("budget_scope")) cm.scope = parse_budget_scope(doc["budget_scope"].get<std::string>());
    if (doc.contains("initial_strata"))
      for (const auto& s : doc["initial_strata"]) cm.initial_strata.insert(s.get<std::string>());
  } catch (const json::exception& e) {
    throw DataError("costs file: " + std::string(e.what()));
  }
  cm.validate();
  return cm;
}

void save_costs(const CostModel& cm, const fs::path& file) {
  json doc;
  doc["c1"] = cm.c1;
  doc["c2"] = cm.c2;
  doc["budget"] = cm.budget;
  doc["overrides"] = cm.overrides;
  doc["budget_scope"] = to_string(cm.scope);
  doc["initial_strata"] = cm.initial_strata;
  write_json(file, doc);
}

void save_groups(const Dataset& ds, const GroupModel& gm, const fs::path& dir) {
  if (gm.num_points() != ds.points().size()) throw DataError("group model does not match the dataset");
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "groups.csv");
    out << "point_id,group_id\n";
    for (std::size_t p = 0; p < ds.points().size(); ++p) out << ds.points()[p].id << ',' << gm.group_of(p) << '\n';
  }
  write_json(dir / "gamma.json", {{"kind", to_string(gm.kind())}, {"gamma", gm.gamma()}});
}

GroupModel load_groups(const Dataset& ds, const fs::path& dir) {
  const fs::path file = dir / "groups.csv";
  Table t = read_csv(file);
  const std::size_t c_id = t.column("point_id", file);
  const std::size_t c_group = t.column("group_id", file);
  std::vector<int> group_of(ds.points().size(), -1);
  for (const auto& row : t.rows) {
    const std::size_t p = ds.point_index(row[c_id]);
    int g = 0;
    auto [ptr, ec] = std::from_chars(row[c_group].data(), row[c_group].data() + row[c_group].size(), g);
    if (ec != std::errc() || ptr != row[c_group].data() + row[c_group].size())
      throw DataError("bad group id '" + row[c_group] + "' for point '" + row[c_id] + "'");
    group_of[p] = g;
  }
  for (std::size_t p = 0; p < group_of.size(); ++p)
    if (group_of[p] < 0) throw DataError("point '" + ds.points()[p].id + "' has no group");
  const json meta = read_json(dir / "gamma.json");
  try {
    return GroupModel(std::move(group_of), meta.at("gamma").get<std::vector<double>>(),
                      parse_group_kind(meta.value("kind", std::string("admin"))));
  } catch (const json::exception& e) {
    throw DataError("gamma.json: " + std::string(e.what()));
  }
}

void save_sample(const Dataset& ds, const SampleState& state, const fs::path& file) {
  auto ids = [&](const std::vector<std::size_t>& clusters) {
    json a = json::array();
    for (std::size_t c : clusters) a.push_back(ds.clusters().at(c).id);
    return a;
  };
  json labeled = json::object();
  for (const auto& [c, pts] : state.labeled) {
    json a = json::array();
    for (std::size_t p : pts) a.push_back(ds.points().at(p).id);
    labeled[ds.clusters().at(c).id] = a;
  }
  json strata = json::array();
  for (std::size_t s : state.initial_strata) strata.push_back(ds.strata().at(s).id);
  json doc;
  doc["k"] = state.k;
  doc["spent"] = state.spent;
  doc["infeasible"] = state.infeasible;
  doc["initial_strata"] = strata;
  doc["initial_clusters"] = ids(state.initial_clusters);
  doc["augment_clusters"] = ids(state.augment_clusters);
  doc["labeled"] = labeled;
  doc["labeled_count"] = state.labeled_count();
  doc["lineage"] = state.lineage;
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  write_json(file, doc);
}

SampleState load_sample(const Dataset& ds, const fs::path& file) {
  const json doc = read_json(file);
  SampleState st;
  try {
    st.k = doc.at("k").get<int>();
    st.spent = doc.value("spent", 0.0);
    st.infeasible = doc.value("infeasible", false);
    for (const auto& s : doc.at("initial_strata")) st.initial_strata.insert(ds.stratum_index(s.get<std::string>()));
    for (const auto& c : doc.at("initial_clusters")) st.initial_clusters.push_back(ds.cluster_index(c.get<std::string>()));
    for (const auto& c : doc.at("augment_clusters")) st.augment_clusters.push_back(ds.cluster_index(c.get<std::string>()));
    for (const auto& [cid, pts] : doc.at("labeled").items()) {
      const std::size_t c = ds.cluster_index(cid);
      auto& v = st.labeled[c];
      for (const auto& p : pts) {
        const std::size_t pi = ds.point_index(p.get<std::string>());
        if (ds.cluster_of_point(pi) != c)
          throw DataError("labeled point '" + p.get<std::string>() + "' is not in cluster '" + cid + "'");
        v.push_back(pi);
      }
    }
    if (doc.contains("lineage")) st.lineage = doc["lineage"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError("sample file: " + std::string(e.what()));
  }
  return st;
}

}  // namespace geosamp
