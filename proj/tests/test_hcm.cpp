#include <catch2/catch_amalgamated.hpp>

#include "htreg/hcm.hpp"
#include "htreg/rng.hpp"

using htreg::HcmFunction;

TEST_CASE("single level-1 component on d=3") {
  const HcmFunction h("sq", 3, {{{htreg::comp_square(), {0}}}}, 1.0);
  CHECK(h.evaluate({0.5, 0.9, 0.1}) == 0.25);
  CHECK(h.gamma_star() == 2.0);
}

TEST_CASE("two-level hand-computed value") {
  // g2 = mean2, g1a = x1*x2, g1b = sin(pi x3)/2: h(.5,.5,.5) = (0.25+0.5)/2
  const auto lib = htreg::library_instances();
  const auto& h = htreg::find_instance(lib, "gamma1-d3");
  CHECK(h.evaluate({0.5, 0.5, 0.5}) == Catch::Approx(0.375).margin(1e-15));
}

TEST_CASE("gamma* equals the brute-force component minimum") {
  const auto lib = htreg::library_instances();
  for (const auto& h : lib) {
    double brute = std::numeric_limits<double>::infinity();
    for (const auto& level : h.levels())
      for (const auto& node : level)
        brute = std::min(brute, node.component.beta / static_cast<double>(node.component.arity));
    CHECK(h.gamma_star() == brute);
  }
}

TEST_CASE("presets span the advertised gamma* and dimensions") {
  const auto lib = htreg::library_instances();
  REQUIRE(lib.size() >= 3);
  CHECK(htreg::find_instance(lib, "gamma05-d1").gamma_star() == 0.5);
  CHECK(htreg::find_instance(lib, "gamma05-d1").input_dim() == 1);
  CHECK(htreg::find_instance(lib, "gamma1-d3").gamma_star() == 1.0);
  CHECK(htreg::find_instance(lib, "gamma1-d3").input_dim() == 3);
  CHECK(htreg::find_instance(lib, "gamma2-d5").gamma_star() == 2.0);
  CHECK(htreg::find_instance(lib, "gamma2-d5").input_dim() == 5);
}

TEST_CASE("boundedness audit: sup over 1e5 uniform samples within declared M") {
  const auto lib = htreg::library_instances();
  htreg::Rng rng(2025);
  for (const auto& h : lib) {
    double sup = 0.0;
    std::vector<double> x(h.input_dim());
    for (int t = 0; t < 100000; ++t) {
      for (auto& v : x) v = rng.uniform();
      sup = std::max(sup, std::abs(h.evaluate(x)));
    }
    CHECK(sup <= h.sup_bound());
  }
}

TEST_CASE("preset values at frozen points match the closed forms") {
  const auto lib = htreg::library_instances();
  const auto& g05 = htreg::find_instance(lib, "gamma05-d1");
  // |x^2 - sin(pi x)/2| / 2
  for (double x : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const double want = 0.5 * std::abs(x * x - 0.5 * std::sin(M_PI * x));
    CHECK(g05.evaluate({x}) == Catch::Approx(want).margin(1e-15));
  }
  const auto& g1 = htreg::find_instance(lib, "gamma1-d3");
  for (double x : {0.0, 0.3, 0.6, 0.9, 1.0}) {
    const double want = 0.5 * (x * x + 0.5 * std::sin(M_PI * x));
    CHECK(g1.evaluate({x, x, x}) == Catch::Approx(want).margin(1e-15));
  }
  const auto& g2 = htreg::find_instance(lib, "gamma2-d5");
  for (double x : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    const double want = 0.5 * std::sin(M_PI * x * x);
    CHECK(g2.evaluate({0.1, 0.1, x, 0.1, 0.1}) == Catch::Approx(want).margin(1e-15));
  }
}

TEST_CASE("measured modulus of continuity respects the declared Lipschitz constants") {
  const auto lib = htreg::library_instances();
  htreg::Rng rng(31);
  for (const auto& h : lib) {
    // overall Lipschitz bound: product of per-level constants (loose)
    double lip = 1.0;
    for (const auto& level : h.levels()) {
      double lmax = 0.0;
      for (const auto& node : level) lmax = std::max(lmax, node.component.lipschitz);
      lip *= lmax * std::sqrt(2.0);
    }
    std::vector<double> x(h.input_dim()), y(h.input_dim());
    for (int t = 0; t < 2000; ++t) {
      double dist2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.uniform();
        y[i] = std::clamp(x[i] + rng.uniform(-0.05, 0.05), 0.0, 1.0);
        dist2 += (x[i] - y[i]) * (x[i] - y[i]);
      }
      CHECK(std::abs(h.evaluate(x) - h.evaluate(y)) <= lip * std::sqrt(dist2) + 1e-12);
    }
  }
}

TEST_CASE("evaluation dim mismatch throws") {
  const auto lib = htreg::library_instances();
  CHECK_THROWS_AS(htreg::find_instance(lib, "gamma1-d3").evaluate({0.5}), std::invalid_argument);
  CHECK_THROWS_AS(htreg::find_instance(lib, "nope"), std::invalid_argument);
}
