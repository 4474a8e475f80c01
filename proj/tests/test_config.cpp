#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>

#include "gpmass/config.hpp"
#include "gpmass/errors.hpp"

using namespace gpmass;

namespace {

const char* kModelToml = R"(# two-component model
[model]
dim = 1
n = 256
L = 10.0
potential1 = {kind = "harmonic"}
potential2 = {kind = "anisotropic-harmonic", coeffs = [4.0]}
mu1 = -1.0
mu2 = -1.0
beta = 0.5

[solver]
gtol = 1e-7
max_iters = 5_000
verbose = true
)";

std::string write_temp(const std::string& name, const std::string& text) {
  std::string path = "test_config_" + name;
  std::ofstream out(path);
  out << text;
  return path;
}

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("parse_toml_text: tables, values, and comments") {
  Config c = parse_toml_text(kModelToml, "<inline>");
  CHECK(c.integer("model.dim") == 1);
  CHECK(c.integer("model.n") == 256);
  CHECK(c.number("model.L") == 10.0);
  CHECK(c.text("model.potential1.kind") == "harmonic");
  CHECK(c.numbers("model.potential2.coeffs") == std::vector<double>{4.0});
  CHECK(c.number("model.beta") == 0.5);
  CHECK(c.number("solver.gtol") == 1e-7);
  CHECK(c.integer("solver.max_iters") == 5000);  // underscore separator
  CHECK(c.boolean("solver.verbose", false));

  SUBCASE("dotted keys, nested headers, and multiline arrays") {
    Config d = parse_toml_text(
        "top = \"a b\\n\\\"c\\\"\"\n"
        "[run.output]\n"
        "dir = \"out\"\n"
        "grid.eps = [1e-2,\n  1e-3,  # comment inside\n  1e-4,\n]\n"
        "flag = false\n",
        "<inline>");
    CHECK(d.text("top") == "a b\n\"c\"");
    CHECK(d.text("run.output.dir") == "out");
    CHECK(d.numbers("run.output.grid.eps") == std::vector<double>{1e-2, 1e-3, 1e-4});
    CHECK_FALSE(d.boolean("run.output.flag", true));
  }

  SUBCASE("negative and signed numbers") {
    Config d = parse_toml_text("a = -3\nb = +2.5\nc = 1e3\n", "<inline>");
    CHECK(d.integer("a") == -3);
    CHECK(d.number("b") == 2.5);
    CHECK(d.number("c") == 1000.0);
    CHECK(d.integer("c") == 1000);  // exact float accepted as whole number
  }
}

TEST_CASE("parse_toml_text: malformed input is rejected with a line number") {
  auto check_throws_at = [](const std::string& text, const char* lineno) {
    try {
      parse_toml_text(text, "bad.toml");
      FAIL("expected ConfigError for: ", text);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(std::string("bad.toml:") + lineno) !=
            std::string::npos);
    }
  };
  check_throws_at("a = 1\na = 2\n", "2");              // duplicate key
  check_throws_at("a = \"oops\n", "1");                // unterminated string
  check_throws_at("\n\nx = what\n", "3");              // unparsable value
  check_throws_at("x = 1 y = 2\n", "1");               // trailing characters
  check_throws_at("[[points]]\n", "1");                // arrays of tables unsupported
  check_throws_at("a = \"\\q\"\n", "1");               // unknown escape
  check_throws_at("a = [1, 2\n", "2");                 // unterminated array
  check_throws_at("[model\n", "1");                    // unclosed header
  check_throws_at("a = 1\n[a]\nb = 2\n", "2");         // key reused as table
}

TEST_CASE("parse_json_text and load_config dispatch") {
  const char* jtext = R"({"model": {"dim": 1, "n": 64, "L": 5.0, "mu1": 1.0}})";
  Config c = parse_json_text(jtext, "<inline>");
  CHECK(c.integer("model.n") == 64);
  CHECK_THROWS_AS(parse_json_text("[1, 2]", "<inline>"), ConfigError);
  CHECK_THROWS_AS(parse_json_text("{nope", "<inline>"), ConfigError);

  TempFile toml(write_temp("m.toml", kModelToml));
  TempFile jsonf(write_temp("m.json", jtext));
  CHECK(load_config(toml.path).number("model.L") == 10.0);
  CHECK(load_config(jsonf.path).number("model.L") == 5.0);
  CHECK_THROWS_AS(load_config("no_such_file.toml"), ConfigError);
}

TEST_CASE("Config getters: required keys throw, fallbacks apply") {
  Config c = parse_toml_text("a = 1.5\nname = \"x\"\n[t]\nb = 2\n", "cfg.toml");
  CHECK(c.number("a") == 1.5);
  CHECK(c.number("zzz", 7.0) == 7.0);
  CHECK(c.integer("t.b", 9) == 2);
  CHECK(c.text("name", "y") == "x");
  CHECK(c.numbers("absent").empty());
  CHECK_FALSE(c.has("t.c"));

  auto message_names_key = [&](auto&& fn, const char* key) {
    try {
      fn();
      FAIL("expected ConfigError for key ", key);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(key) != std::string::npos);
    }
  };
  message_names_key([&] { c.number("t.missing"); }, "t.missing");
  message_names_key([&] { c.text("a"); }, "a");          // wrong type
  message_names_key([&] { c.integer("a"); }, "a");       // 1.5 is not whole
  message_names_key([&] { c.numbers("name"); }, "name");
}

TEST_CASE("model builders: explicit physics, validation, regime gate") {
  Config c = parse_toml_text(kModelToml, "cfg.toml");

  SUBCASE("full round trip") {
    ModelParams m = model_from_config(c);
    CHECK(m.grid.dim == 1);
    CHECK(m.grid.n == 256);
    CHECK(m.scattering.mu1 == -1.0);
    CHECK(m.scattering.beta == 0.5);
    // potential2 carries the anisotropic weight 4 x^2
    const double x0 = m.grid.coord(0);
    CHECK(m.V2.v[0] == doctest::Approx(4.0 * x0 * x0));
    CHECK(m.V1.v[0] == doctest::Approx(x0 * x0));
  }

  SUBCASE("missing scattering parameter is an error, not a default") {
    Config d = c;
    d.root["model"].erase("beta");
    CHECK_THROWS_AS(model_from_config(d), ConfigError);
    try {
      model_from_config(d);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("model.beta") != std::string::npos);
    }
  }

  SUBCASE("missing potential block is an error") {
    Config d = c;
    d.root["model"].erase("potential2");
    CHECK_THROWS_AS(model_from_config(d), ConfigError);
  }

  SUBCASE("grid validation") {
    Config d = c;
    d.root["model"]["dim"] = 3;
    CHECK_THROWS_AS(grid_from_config(d), ConfigError);
    d.root["model"]["dim"] = 1;
    d.root["model"]["n"] = 2;
    CHECK_THROWS_AS(grid_from_config(d), ConfigError);
    d.root["model"]["n"] = 256;
    d.root["model"]["L"] = -1.0;
    CHECK_THROWS_AS(grid_from_config(d), ConfigError);
  }

  SUBCASE("degenerate scattering is rejected at configuration time") {
    Config d = c;
    d.root["model"]["mu1"] = 1.0;
    d.root["model"]["mu2"] = 1.0;
    d.root["model"]["beta"] = -1.0;
    CHECK_THROWS_AS(model_from_config(d), DegenerateRegime);
  }

  SUBCASE("solver overrides and tolerance positivity") {
    MaximizeOptions o = maximize_options_from_config(c);
    CHECK(o.gtol == 1e-7);
    CHECK(o.max_iters == 5000);
    CHECK(o.verbose);
    CHECK(o.ctol == MaximizeOptions{}.ctol);  // untouched default
    Config d = c;
    d.root["solver"]["rtol"] = -1e-6;
    CHECK_THROWS_AS(maximize_options_from_config(d), ConfigError);
    d.root["solver"]["rtol"] = 1e-6;
    d.root["solver"]["max_iters"] = 0;
    CHECK_THROWS_AS(maximize_options_from_config(d), ConfigError);
  }
}
