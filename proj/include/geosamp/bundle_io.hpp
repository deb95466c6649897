#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "geosamp/core_data.hpp"
#include "geosamp/groups.hpp"

namespace geosamp {

enum class FeatureFormat { csv, binary };

/// Reads a dataset bundle directory: meta.json, points.csv and either
/// features.csv or features.bin. Throws DataError on malformed content.
Dataset load_dataset(const std::filesystem::path& dir);

/// Writes a bundle that load_dataset reproduces exactly. The binary feature
/// format stores 32-bit floats, so it is exact only for float-representable
/// features.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir,
                  FeatureFormat format = FeatureFormat::csv);

/// File name -> exact bytes of the bundle save_dataset would write.
std::map<std::string, std::string> bundle_files(const Dataset& ds, FeatureFormat format = FeatureFormat::csv);

CostModel load_costs(const std::filesystem::path& file);
void save_costs(const CostModel& cm, const std::filesystem::path& file);

/// groups.csv (point_id, group_id) and gamma.json in `dir`.
void save_groups(const Dataset& ds, const GroupModel& gm, const std::filesystem::path& dir);
GroupModel load_groups(const Dataset& ds, const std::filesystem::path& dir);

void save_sample(const Dataset& ds, const SampleState& state, const std::filesystem::path& file);
SampleState load_sample(const Dataset& ds, const std::filesystem::path& file);

/// Shortest round-trippable text form of a double.
std::string format_double(double v);
double parse_double(const std::string& s, const std::string& context);

/// Comma-separated fields; no quoting.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace geosamp
