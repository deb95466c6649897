#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "geosamp/core_data.hpp"

namespace geosamp {

std::string sha1_hex(const std::string& bytes);

/// git's blob id: sha1("blob <len>\0" + content).
std::string git_blob_hash(const std::string& content);

/// Tree-style hash over named files: sha1 of "<name> <blob id>\n" lines in
/// name order.
std::string content_hash(const std::map<std::string, std::string>& files);

/// Content hash of the bundle the dataset serializes to.
std::string dataset_content_hash(const Dataset& ds);

/// Content hash of an on-disk bundle directory (regular files only).
std::string directory_content_hash(const std::filesystem::path& dir);

}  // namespace geosamp
