#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "gpmass/maximizer.hpp"
#include "gpmass/model.hpp"

namespace gpmass {

// Configuration tree loaded from TOML (subset) or JSON; lookups use dotted
// paths into nested tables. Physics parameters are required keys: there are
// no hidden defaults for (mu1, mu2, beta), the potentials, or the grid.
struct Config {
  nlohmann::json root = nlohmann::json::object();
  std::string source;  // file path, or a caller-supplied tag for inline text

  const nlohmann::json* find(const std::string& dotted) const;  // nullptr if absent
  bool has(const std::string& dotted) const { return find(dotted) != nullptr; }

  // Typed getters. The one-argument forms are for required keys and throw
  // ConfigError naming the key and source; the two-argument forms fall back.
  double number(const std::string& dotted) const;
  double number(const std::string& dotted, double fallback) const;
  long long integer(const std::string& dotted) const;
  long long integer(const std::string& dotted, long long fallback) const;
  std::string text(const std::string& dotted) const;
  std::string text(const std::string& dotted, const std::string& fallback) const;
  bool boolean(const std::string& dotted, bool fallback) const;
  std::vector<double> numbers(const std::string& dotted) const;  // [] if absent
};

// TOML subset: [table] / [table.sub] headers, dotted keys, `key = value` with
// numbers, strings, booleans, arrays, and inline tables; `#` comments.
// Covers the config blocks this tool consumes; anything outside the subset
// raises ConfigError with a line number.
Config parse_toml_text(const std::string& text, const std::string& source);
Config parse_json_text(const std::string& text, const std::string& source);

// Dispatches on the extension: .json is parsed as JSON, everything else as
// the TOML subset.
Config load_config(const std::string& path);

// Builders for the [model] block: dim, n, L, potential1/2 = {kind, coeffs,
// path}, mu1, mu2, beta. model_from_config also rejects degenerate scattering
// regimes up front. [solver] overrides the MaximizeOptions defaults.
Grid grid_from_config(const Config& c);
PotentialSpec potential_from_config(const Config& c, const std::string& key);
ScatteringParams scattering_from_config(const Config& c);
ModelParams model_from_config(const Config& c);
MaximizeOptions maximize_options_from_config(const Config& c);

}  // namespace gpmass
