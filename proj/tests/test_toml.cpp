#include <catch2/catch_amalgamated.hpp>

#include "htreg/tomlmini.hpp"

TEST_CASE("toml subset: tables, scalars, arrays, comments") {
  const std::string text = R"(# experiment config
[experiment]
id = "rate_sweep"   # trailing comment
seeds = 10
n_grid = [512, 1024, 2048]
p = 2.0

[noise]
kind = "trinomial_spike"
symmetric = true
regimes = ["a", "b"]
)";
  const auto doc = htreg::TomlDoc::parse(text);
  CHECK(doc.get_string("experiment.id", "") == "rate_sweep");
  CHECK(doc.get_int("experiment.seeds", 0) == 10);
  CHECK(doc.get_double("experiment.p", 0.0) == 2.0);
  CHECK(doc.get_double_array("experiment.n_grid") == std::vector<double>{512, 1024, 2048});
  CHECK(doc.get_bool("noise.symmetric", false));
  CHECK(doc.get_string_array("noise.regimes") == std::vector<std::string>{"a", "b"});
  CHECK(doc.get_string("missing.key", "fallback") == "fallback");
  CHECK_FALSE(doc.has("missing.key"));
}

TEST_CASE("toml subset: malformed documents throw with line info") {
  CHECK_THROWS_AS(htreg::TomlDoc::parse("[unterminated\n"), std::runtime_error);
  CHECK_THROWS_AS(htreg::TomlDoc::parse("novalue\n"), std::runtime_error);
  CHECK_THROWS_AS(htreg::TomlDoc::parse("x = [1, 2\n"), std::runtime_error);
  CHECK_THROWS_AS(htreg::TomlDoc::parse("x = zzz\n"), std::runtime_error);
  try {
    htreg::TomlDoc::parse("ok = 1\nbad line\n");
    FAIL();
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("toml subset: type mismatches are loud") {
  const auto doc = htreg::TomlDoc::parse("x = 5\ns = \"hi\"\n");
  CHECK_THROWS_AS(doc.get_string("x", ""), std::runtime_error);
  CHECK_THROWS_AS(doc.get_double("s", 0.0), std::runtime_error);
}
