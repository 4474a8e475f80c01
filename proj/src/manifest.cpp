#include "gpmass/manifest.hpp"

#include <cstdio>
#include <fstream>

#include "gpmass/errors.hpp"

namespace gpmass {

namespace {
constexpr uint64_t kFnvOffset = 14695981039346656037ull;
constexpr uint64_t kFnvPrime = 1099511628211ull;
}  // namespace

uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "' for checksumming");
  uint64_t h = kFnvOffset;
  char buf[1 << 16];
  for (;;) {
    in.read(buf, sizeof buf);
    const std::streamsize got = in.gcount();
    if (got <= 0) break;
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= kFnvPrime;
    }
  }
  return h;
}

std::string fnv1a64_hex(uint64_t h) {
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

ManifestWriter::ManifestWriter(std::filesystem::path dir, std::string tool_version)
    : dir_(std::move(dir)), doc_(nlohmann::json::object()), files_(nlohmann::json::array()) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create output directory '" + dir_.string() + "'");
  doc_["tool"] = "gp-mass";
  doc_["version"] = std::move(tool_version);
}

void ManifestWriter::set_config(const nlohmann::json& snapshot) { doc_["config"] = snapshot; }

void ManifestWriter::set_seed(uint64_t seed) { doc_["seed"] = seed; }

void ManifestWriter::note(const std::string& key, const nlohmann::json& value) {
  doc_[key] = value;
}

std::filesystem::path ManifestWriter::emit_text(const std::string& name,
                                                const std::string& text) {
  const std::filesystem::path p = dir_ / name;
  {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write '" + p.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("short write to '" + p.string() + "'");
  }
  files_.push_back({{"name", name},
                    {"bytes", text.size()},
                    {"fnv1a64", fnv1a64_hex(fnv1a64(text.data(), text.size()))}});
  return p;
}

void ManifestWriter::record_file(const std::filesystem::path& path) {
  const std::filesystem::path rel = path.lexically_relative(dir_);
  const std::string name =
      (!rel.empty() && rel.native().compare(0, 2, "..") != 0) ? rel.string() : path.string();
  files_.push_back({{"name", name},
                    {"bytes", std::filesystem::file_size(path)},
                    {"fnv1a64", fnv1a64_hex(fnv1a64_file(path))}});
}

std::filesystem::path ManifestWriter::finalize() {
  doc_["files"] = files_;
  const std::filesystem::path p = dir_ / "manifest.json";
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  out << doc_.dump(2) << "\n";
  if (!out) throw IoError("short write to '" + p.string() + "'");
  return p;
}

}  // namespace gpmass
