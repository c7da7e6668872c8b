#include <catch2/catch_amalgamated.hpp>

#include "htreg/noise.hpp"

using htreg::NoiseModel;

TEST_CASE("trinomial spike: atoms and exact moment identity") {
  const auto m = NoiseModel::trinomial_spike(1024, 64, 2.0);
  // atoms are +-(n/S)^{1/2} = +-4 and 0
  REQUIRE(m.atoms().size() == 3);
  CHECK(m.atoms()[0] == -4.0);
  CHECK(m.atoms()[2] == 4.0);
  CHECK(m.probs()[0] == 64.0 / 2048.0);
  CHECK(m.moment(2.0) == 1.0);  // E|eps|^p = 2 (S/2n)(n/S) = 1, exactly
  CHECK(m.mean_discrete() == 0.0);
  CHECK(m.symmetric());
}

TEST_CASE("three-point bias: atoms from the theta table") {
  const auto m = NoiseModel::three_point_bias(2.0, 8.0);
  // theta = 2^{-p} tau^{1-p} = 1/32: atoms -1 (1/32), 16 (1/512), 0 (rest)
  REQUIRE(m.atoms().size() == 3);
  CHECK(m.atoms()[0] == -1.0);
  CHECK(m.atoms()[2] == 16.0);
  CHECK(m.probs()[0] == 1.0 / 32.0);
  CHECK(m.probs()[2] == 1.0 / 512.0);
  CHECK(m.probs()[1] == 1.0 - 1.0 / 32.0 - 1.0 / 512.0);
  CHECK(m.mean_discrete() == 0.0);
  CHECK_FALSE(m.symmetric());
  // moment(2) = theta (1 + 2 tau) = 17/32 <= 1
  CHECK(m.moment(2.0) == Catch::Approx(17.0 / 32.0).margin(1e-16));
  CHECK(m.moment(2.0) <= 1.0);
}

TEST_CASE("adversarial moment ceilings across parameters") {
  for (double p : {2.0, 3.0}) {
    for (double tau : {8.0, 16.0, 32.0, 64.0}) {
      const auto m = NoiseModel::three_point_bias(p, tau);
      CHECK(m.moment(p) <= 1.0);
    }
    for (std::size_t s : {16u, 64u, 256u}) {
      const auto m = NoiseModel::trinomial_spike(1024, s, p);
      CHECK(m.moment(p) == Catch::Approx(1.0).margin(1e-12));
    }
  }
}

TEST_CASE("symmetric two-point: first absolute moment is the hand sum") {
  const auto m = NoiseModel::symmetric_two_point(1.5);
  CHECK(m.moment(1.0) == 1.5);
  CHECK(m.symmetric());
}

TEST_CASE("gaussian: law of large numbers sanity") {
  const auto m = NoiseModel::gaussian(1.0);
  const auto draws = m.sample(1000000, 77);
  double mean = 0.0;
  for (double v : draws) mean += v;
  mean /= static_cast<double>(draws.size());
  CHECK(std::abs(mean) < 0.004);
  CHECK(m.moment(2.0) == Catch::Approx(1.0).margin(1e-12));
  CHECK(m.moment(4.0) == Catch::Approx(3.0).margin(1e-9));
  CHECK(m.moment(1.0) == Catch::Approx(std::sqrt(2.0 / M_PI)).margin(1e-12));
}

TEST_CASE("pareto: moments finite below the tail index, divergent beyond") {
  const auto m = NoiseModel::symmetric_pareto(2.5, 0.5);
  CHECK(m.moment(2.0) == Catch::Approx(2.5 * 0.25 / 0.5).margin(1e-12));
  CHECK_THROWS_AS(m.moment(2.5), std::domain_error);
  CHECK_THROWS_AS(m.moment(3.0), std::domain_error);
  // sampled magnitudes never fall below the scale
  for (double v : m.sample(1000, 5)) CHECK(std::abs(v) >= 0.5);
}

TEST_CASE("custom discrete: validation") {
  CHECK_THROWS_AS(NoiseModel::custom_discrete({1.0, -1.0}, {0.6, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel::custom_discrete({1.0, 2.0}, {0.5, 0.5}), std::invalid_argument);
  const auto m = NoiseModel::custom_discrete({-2.0, 0.0, 2.0}, {0.25, 0.5, 0.25});
  CHECK(m.symmetric());
}

TEST_CASE("sampling is deterministic per seed") {
  const auto m = NoiseModel::trinomial_spike(256, 16, 2.0);
  CHECK(m.sample(1000, 42) == m.sample(1000, 42));
  CHECK(m.sample(1000, 42) != m.sample(1000, 43));
}

TEST_CASE("sample frequencies match the spike probability (binomial SE)") {
  const std::size_t n = 1024, s = 64;
  const auto m = NoiseModel::trinomial_spike(n, s, 2.0);
  const std::size_t draws = 100000;
  const auto xs = m.sample(draws, 7);
  std::size_t nonzero = 0;
  for (double v : xs)
    if (v != 0.0) ++nonzero;
  const double frac = static_cast<double>(nonzero) / static_cast<double>(draws);
  const double p = static_cast<double>(s) / static_cast<double>(n);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(draws));
  CHECK(std::abs(frac - p) <= 3.0 * se);
}

TEST_CASE("make_dataset: point mass at zero reproduces f0 exactly") {
  const auto zero_noise = NoiseModel::custom_discrete({0.0}, {1.0});
  auto f0 = [](const std::vector<double>& x) { return 2.0 * x[0] - x[1]; };
  const htreg::Dataset data = htreg::make_dataset(f0, 2, 100, zero_noise, 3);
  std::vector<double> x(2);
  for (std::size_t i = 0; i < data.n; ++i) {
    data.row(i, x);
    CHECK(data.Y[i] == f0(x));
    CHECK(x[0] >= 0.0);
    CHECK(x[0] < 1.0);
  }
}

TEST_CASE("make_dataset: identical seeds give identical datasets") {
  const auto m = NoiseModel::gaussian(0.5);
  auto f0 = [](const std::vector<double>& x) { return x[0]; };
  const auto a = htreg::make_dataset(f0, 1, 200, m, 11);
  const auto b = htreg::make_dataset(f0, 1, 200, m, 11);
  CHECK(a.X == b.X);
  CHECK(a.Y == b.Y);
}

TEST_CASE("invalid parameters are contract violations") {
  CHECK_THROWS_AS(NoiseModel::trinomial_spike(64, 65, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel::gaussian(0.0), std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel::symmetric_pareto(1.0, 1.0), std::invalid_argument);
}
