#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"

namespace gpmass {

// FNV-1a 64-bit checksum; cheap, stable across platforms, and good enough to
// detect truncated or swapped artifacts (this is integrity bookkeeping, not
// cryptography).
uint64_t fnv1a64(const void* data, std::size_t n);
uint64_t fnv1a64_file(const std::filesystem::path& path);  // IoError if unreadable
std::string fnv1a64_hex(uint64_t h);

// Collects every artifact a run emits and writes manifest.json last, so a
// manifest on disk certifies a complete run. The config snapshot, seed, and
// tolerances are embedded verbatim for reproduction; timing is recorded and
// is the one field expected to differ between otherwise identical reruns.
class ManifestWriter {
 public:
  ManifestWriter(std::filesystem::path dir, std::string tool_version);

  const std::filesystem::path& dir() const { return dir_; }
  void set_config(const nlohmann::json& snapshot);
  void set_seed(uint64_t seed);
  void note(const std::string& key, const nlohmann::json& value);

  // Write text to dir/name and record its checksum; returns the full path.
  std::filesystem::path emit_text(const std::string& name, const std::string& text);
  // Record a file that was written directly (field dumps and the like).
  void record_file(const std::filesystem::path& path);

  // Writes manifest.json (always the last artifact) and returns its path.
  std::filesystem::path finalize();

 private:
  std::filesystem::path dir_;
  nlohmann::json doc_;
  nlohmann::json files_;
};

}  // namespace gpmass
