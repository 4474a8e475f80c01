#include "gpmass/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gpmass/errors.hpp"

namespace gpmass {

using nlohmann::json;

namespace {

// ---- TOML subset parser ----
//
// Hand-rolled recursive descent over the handful of constructs our config
// files use. The grammar is deliberately small; anything it does not
// recognize is rejected with a line number rather than silently skipped.

struct TomlParser {
  const std::string& s;
  const std::string& src;
  std::size_t pos = 0;
  int line = 1;
  json root = json::object();
  json* table = nullptr;  // current [section]

  TomlParser(const std::string& text, const std::string& source) : s(text), src(source) {
    table = &root;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(src + ":" + std::to_string(line) + ": " + msg);
  }

  bool eof() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }
  char take() {
    char c = s[pos++];
    if (c == '\n') ++line;
    return c;
  }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos;
  }

  // whitespace, newlines, comments
  void skip_filler() {
    for (;;) {
      skip_inline_ws();
      if (eof()) return;
      if (peek() == '#') {
        while (!eof() && peek() != '\n') ++pos;
      } else if (peek() == '\n') {
        take();
      } else {
        return;
      }
    }
  }

  void expect_line_end() {
    skip_inline_ws();
    if (eof()) return;
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos;
    }
    if (eof()) return;
    if (peek() != '\n') fail("trailing characters after value");
    take();
  }

  static bool is_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string parse_bare_key() {
    std::size_t start = pos;
    while (!eof() && is_key_char(peek())) ++pos;
    if (pos == start) fail("expected a key");
    return s.substr(start, pos - start);
  }

  // a.b.c -> list of segments
  std::vector<std::string> parse_dotted_key() {
    std::vector<std::string> parts{parse_bare_key()};
    while (!eof() && peek() == '.') {
      take();
      parts.push_back(parse_bare_key());
    }
    return parts;
  }

  json* descend(json* base, const std::vector<std::string>& parts, std::size_t upto) {
    json* node = base;
    for (std::size_t i = 0; i < upto; ++i) {
      json& child = (*node)[parts[i]];
      if (child.is_null()) child = json::object();
      if (!child.is_object()) fail("'" + parts[i] + "' is not a table");
      node = &child;
    }
    return node;
  }

  std::string parse_string() {
    take();  // opening quote
    std::string out;
    for (;;) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = take();
      if (c == '"') return out;
      if (c == '\\') {
        if (eof()) fail("unterminated escape");
        char e = take();
        switch (e) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: fail(std::string("unsupported escape '\\") + e + "'");
        }
      } else {
        out += c;
      }
    }
  }

  json parse_number_or_keyword() {
    std::size_t start = pos;
    while (!eof() && (is_key_char(peek()) || peek() == '+' || peek() == '.')) ++pos;
    std::string tok = s.substr(start, pos - start);
    if (tok.empty()) fail("expected a value");
    if (tok == "true") return json(true);
    if (tok == "false") return json(false);
    std::string digits;
    for (char c : tok)
      if (c != '_') digits += c;  // TOML permits 1_000
    if (!digits.empty() && digits[0] == '+') digits.erase(0, 1);  // from_chars rejects '+'
    long long iv = 0;
    auto [ip, iec] = std::from_chars(digits.data(), digits.data() + digits.size(), iv);
    if (iec == std::errc() && ip == digits.data() + digits.size()) return json(iv);
    double dv = 0.0;
    auto [dp, dec] = std::from_chars(digits.data(), digits.data() + digits.size(), dv);
    if (dec == std::errc() && dp == digits.data() + digits.size()) return json(dv);
    fail("cannot parse value '" + tok + "'");
  }

  json parse_array() {
    take();  // '['
    json arr = json::array();
    skip_filler();
    if (!eof() && peek() == ']') {
      take();
      return arr;
    }
    for (;;) {
      arr.push_back(parse_value());
      skip_filler();
      if (eof()) fail("unterminated array");
      char c = take();
      if (c == ']') return arr;
      if (c != ',') fail("expected ',' or ']' in array");
      skip_filler();
      if (!eof() && peek() == ']') {  // trailing comma
        take();
        return arr;
      }
    }
  }

  json parse_inline_table() {
    take();  // '{'
    json obj = json::object();
    skip_inline_ws();
    if (!eof() && peek() == '}') {
      take();
      return obj;
    }
    for (;;) {
      skip_inline_ws();
      std::vector<std::string> parts = parse_dotted_key();
      skip_inline_ws();
      if (eof() || peek() != '=') fail("expected '=' in inline table");
      take();
      skip_inline_ws();
      json* node = &obj;
      if (parts.size() > 1) node = descend(&obj, parts, parts.size() - 1);
      if (node->contains(parts.back())) fail("duplicate key '" + parts.back() + "'");
      (*node)[parts.back()] = parse_value();
      skip_inline_ws();
      if (eof()) fail("unterminated inline table");
      char c = take();
      if (c == '}') return obj;
      if (c != ',') fail("expected ',' or '}' in inline table");
    }
  }

  json parse_value() {
    skip_inline_ws();
    if (eof()) fail("expected a value");
    char c = peek();
    if (c == '"') return json(parse_string());
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    return parse_number_or_keyword();
  }

  void parse_table_header() {
    take();  // '['
    if (!eof() && peek() == '[') fail("arrays of tables are outside the supported subset");
    skip_inline_ws();
    std::vector<std::string> parts = parse_dotted_key();
    skip_inline_ws();
    if (eof() || peek() != ']') fail("expected ']' to close table header");
    take();
    table = descend(&root, parts, parts.size());
    expect_line_end();
  }

  void parse_key_value() {
    std::vector<std::string> parts = parse_dotted_key();
    skip_inline_ws();
    if (eof() || peek() != '=') fail("expected '=' after key");
    take();
    json* node = table;
    if (parts.size() > 1) node = descend(table, parts, parts.size() - 1);
    if (node->contains(parts.back())) fail("duplicate key '" + parts.back() + "'");
    (*node)[parts.back()] = parse_value();
    expect_line_end();
  }

  json run() {
    for (;;) {
      skip_filler();
      if (eof()) return std::move(root);
      if (peek() == '[') {
        parse_table_header();
      } else {
        parse_key_value();
      }
    }
  }
};

[[noreturn]] void missing(const Config& c, const std::string& key, const char* what) {
  throw ConfigError(c.source + ": missing required " + what + " '" + key +
                    "' (all physics parameters must be explicit)");
}

[[noreturn]] void wrong_type(const Config& c, const std::string& key, const char* what) {
  throw ConfigError(c.source + ": '" + key + "' is not a " + what);
}

}  // namespace

const json* Config::find(const std::string& dotted) const {
  const json* node = &root;
  std::size_t start = 0;
  for (;;) {
    std::size_t dot = dotted.find('.', start);
    std::string part = dotted.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->is_object()) return nullptr;
    auto it = node->find(part);
    if (it == node->end()) return nullptr;
    node = &*it;
    if (dot == std::string::npos) return node;
    start = dot + 1;
  }
}

double Config::number(const std::string& dotted) const {
  const json* v = find(dotted);
  if (!v) missing(*this, dotted, "number");
  if (!v->is_number()) wrong_type(*this, dotted, "number");
  return v->get<double>();
}

double Config::number(const std::string& dotted, double fallback) const {
  return has(dotted) ? number(dotted) : fallback;
}

long long Config::integer(const std::string& dotted) const {
  const json* v = find(dotted);
  if (!v) missing(*this, dotted, "integer");
  if (v->is_number_integer()) return v->get<long long>();
  if (v->is_number()) {
    double d = v->get<double>();
    long long i = static_cast<long long>(d);
    if (static_cast<double>(i) == d) return i;
  }
  wrong_type(*this, dotted, "whole number");
}

long long Config::integer(const std::string& dotted, long long fallback) const {
  return has(dotted) ? integer(dotted) : fallback;
}

std::string Config::text(const std::string& dotted) const {
  const json* v = find(dotted);
  if (!v) missing(*this, dotted, "string");
  if (!v->is_string()) wrong_type(*this, dotted, "string");
  return v->get<std::string>();
}

std::string Config::text(const std::string& dotted, const std::string& fallback) const {
  return has(dotted) ? text(dotted) : fallback;
}

bool Config::boolean(const std::string& dotted, bool fallback) const {
  const json* v = find(dotted);
  if (!v) return fallback;
  if (!v->is_boolean()) wrong_type(*this, dotted, "boolean");
  return v->get<bool>();
}

std::vector<double> Config::numbers(const std::string& dotted) const {
  const json* v = find(dotted);
  if (!v) return {};
  if (!v->is_array()) wrong_type(*this, dotted, "number array");
  std::vector<double> out;
  out.reserve(v->size());
  for (const json& e : *v) {
    if (!e.is_number()) wrong_type(*this, dotted, "number array");
    out.push_back(e.get<double>());
  }
  return out;
}

Config parse_toml_text(const std::string& text, const std::string& source) {
  TomlParser p(text, source);
  return Config{p.run(), source};
}

Config parse_json_text(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError(source + ": top level must be an object");
  return Config{std::move(root), source};
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return is_json ? parse_json_text(buf.str(), path) : parse_toml_text(buf.str(), path);
}

Grid grid_from_config(const Config& c) {
  const long long dim = c.integer("model.dim");
  const long long n = c.integer("model.n");
  const double L = c.number("model.L");
  if (dim != 1 && dim != 2)
    throw ConfigError(c.source + ": model.dim must be 1 or 2");
  if (n < 3) throw ConfigError(c.source + ": model.n must be at least 3");
  if (!(L > 0.0)) throw ConfigError(c.source + ": model.L must be positive");
  return Grid::make(static_cast<int>(dim), static_cast<int>(n), L);
}

PotentialSpec potential_from_config(const Config& c, const std::string& key) {
  if (!c.has(key)) missing(c, key, "potential block");
  PotentialSpec spec;
  spec.kind = potential_kind_from_name(c.text(key + ".kind"));
  spec.coeffs = c.numbers(key + ".coeffs");
  if (spec.kind == PotentialKind::custom_file) spec.path = c.text(key + ".path");
  return spec;
}

ScatteringParams scattering_from_config(const Config& c) {
  return {c.number("model.mu1"), c.number("model.mu2"), c.number("model.beta")};
}

ModelParams model_from_config(const Config& c) {
  Grid g = grid_from_config(c);
  PotentialSpec p1 = potential_from_config(c, "model.potential1");
  PotentialSpec p2 = potential_from_config(c, "model.potential2");
  ScatteringParams s = scattering_from_config(c);
  require_nondegenerate(s);  // reject degenerate regimes at configuration time
  const double floor = c.number("model.confinement_floor", 0.0);
  return make_model(g, p1, p2, s, floor);
}

MaximizeOptions maximize_options_from_config(const Config& c) {
  MaximizeOptions o;
  o.gtol = c.number("solver.gtol", o.gtol);
  o.ctol = c.number("solver.ctol", o.ctol);
  o.rtol = c.number("solver.rtol", o.rtol);
  o.max_iters = static_cast<int>(c.integer("solver.max_iters", o.max_iters));
  o.armijo = c.number("solver.armijo", o.armijo);
  o.seed = static_cast<uint64_t>(c.integer("solver.seed", static_cast<long long>(o.seed)));
  o.threshold_band = c.number("solver.threshold_band", o.threshold_band);
  o.verbose = c.boolean("solver.verbose", o.verbose);
  for (const char* key : {"solver.gtol", "solver.ctol", "solver.rtol", "solver.armijo",
                          "solver.threshold_band"})
    if (!(c.number(key, 1.0) > 0.0))
      throw ConfigError(c.source + ": '" + key + "' must be positive");
  if (o.max_iters <= 0) throw ConfigError(c.source + ": 'solver.max_iters' must be positive");
  return o;
}

}  // namespace gpmass
