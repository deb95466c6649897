#include "geosamp/provenance.hpp"

#include <fstream>
#include <iterator>

#include <openssl/evp.h>

#include "geosamp/bundle_io.hpp"

namespace geosamp {

std::string sha1_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("sha1 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string git_blob_hash(const std::string& content) {
  std::string framed = "blob " + std::to_string(content.size());
  framed.push_back('\0');
  framed += content;
  return sha1_hex(framed);
}

std::string content_hash(const std::map<std::string, std::string>& files) {
  std::string listing;
  for (const auto& [name, content] : files) listing += name + " " + git_blob_hash(content) + "\n";
  return sha1_hex(listing);
}

std::string dataset_content_hash(const Dataset& ds) { return content_hash(bundle_files(ds)); }

std::string directory_content_hash(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    files[entry.path().filename().string()] =
        std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }
  return content_hash(files);
}

}  // namespace geosamp
