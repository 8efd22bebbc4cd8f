#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace hyperlq::cli {

inline constexpr const char* kVersion = "0.1.0";

std::string Sha256Hex(const std::string& bytes);
std::string Sha256File(const std::string& path);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct Manifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  double wall_time_seconds = 0.0;
  std::string status = "ok";
  std::vector<ManifestEntry> files;
};

/// Hashes every listed file under `dir` and writes dir/manifest.json.
void WriteManifest(const std::string& dir, const std::vector<std::string>& relative_files,
                   Manifest manifest);

}  // namespace hyperlq::cli
