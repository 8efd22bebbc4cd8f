#include "manifest.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace hyperlq::cli {

std::string Sha256Hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::string Sha256File(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return Sha256Hex(ss.str());
}

void WriteManifest(const std::string& dir, const std::vector<std::string>& relative_files,
                   Manifest manifest) {
  namespace fs = std::filesystem;
  nlohmann::json files = nlohmann::json::array();
  for (const std::string& rel : relative_files) {
    const fs::path p = fs::path(dir) / rel;
    if (!fs::exists(p)) continue;
    files.push_back({{"path", rel}, {"sha256", Sha256File(p.string())}, {"bytes", fs::file_size(p)}});
  }
  nlohmann::json j;
  j["config_hash"] = manifest.config_hash;
  j["version"] = kVersion;
  j["seed"] = manifest.seed;
  j["wall_time_seconds"] = manifest.wall_time_seconds;
  j["status"] = manifest.status;
  j["files"] = files;
  std::ofstream f(fs::path(dir) / "manifest.json", std::ios::binary);
  if (!f) throw std::runtime_error("cannot write manifest in " + dir);
  f << j.dump(2) << '\n';
}

}  // namespace hyperlq::cli
