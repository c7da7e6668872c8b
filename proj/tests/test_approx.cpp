#include <catch2/catch_amalgamated.hpp>

#include "htreg/approx.hpp"
#include "htreg/primitives.hpp"
#include "test_util.hpp"

using htreg::FitVariant;
using htreg::GridSpec;
using htreg::Network;

namespace {

double good_lo(std::size_t cell, std::size_t k) { return static_cast<double>(cell) / k; }
double good_hi(std::size_t cell, std::size_t k, double delta) {
  return (cell + 1 < k) ? static_cast<double>(cell + 1) / k - delta : 1.0;
}

}  // namespace

TEST_CASE("build_step: contract readback at K=4") {
  const Network net = htreg::build_step(4, 0.01);
  CHECK(net.evaluate({0.30})[0] == Catch::Approx(1.0).margin(1e-9));
  CHECK(net.evaluate({0.0})[0] == Catch::Approx(0.0).margin(1e-9));
  CHECK(net.evaluate({1.0})[0] == Catch::Approx(3.0).margin(1e-9));  // last cell has no sliver
}

TEST_CASE("build_step: exhaustive interior points match the floor(Kx) oracle") {
  const std::size_t k = 16;
  const double delta = 1.0 / 64.0;
  const Network net = htreg::build_step(k, delta, 5);
  for (std::size_t cell = 0; cell < k; ++cell) {
    const double lo = good_lo(cell, k), hi = good_hi(cell, k, delta);
    for (int t = 0; t < 5; ++t) {
      const double x = lo + (hi - lo) * (0.1 + 0.2 * t);
      const double want = std::floor(x * k);  // brute-force oracle on good regions
      CHECK(net.evaluate({x})[0] == Catch::Approx(want).margin(1e-9));
      CHECK(want == static_cast<double>(cell));
    }
  }
}

TEST_CASE("build_step: agrees with the naive wide oracle network on good regions") {
  htreg::Rng rng(6);
  for (std::size_t k : {3u, 7u, 12u, 32u}) {
    const double delta = 1.0 / (4.0 * k);
    const Network deep = htreg::build_step(k, delta, 3);
    const Network wide = htreg::build_step_wide(k, delta);
    for (int t = 0; t < 400; ++t) {
      const double x = rng.uniform();
      const double kx = std::floor(x * k);
      const auto cell = static_cast<std::size_t>(std::min<double>(kx, k - 1.0));
      if (x > good_hi(cell, k, delta)) continue;  // sliver: unconstrained
      CHECK(deep.evaluate({x})[0] == Catch::Approx(wide.evaluate({x})[0]).margin(1e-9));
    }
    // endpoints of every good interval
    for (std::size_t cell = 0; cell < k; ++cell) {
      for (double x : {good_lo(cell, k), good_hi(cell, k, delta)}) {
        CHECK(deep.evaluate({x})[0] == Catch::Approx(static_cast<double>(cell)).margin(1e-9));
      }
    }
  }
}

TEST_CASE("build_step_nl: recorded sizes within the stated budget") {
  for (std::size_t n : {1u, 2u, 4u, 9u}) {
    for (std::size_t l : {1u, 2u, 3u}) {
      const std::size_t d = 1;
      const auto m = static_cast<std::size_t>(std::floor(std::pow(double(n), 1.0 / d)));
      const Network net = htreg::build_step_nl(n, l, d, 1e-3 / (m * m * l * l + 1));
      CHECK(net.depth() <= 4 * l + 5);
      CHECK(net.width() <= 4 * m + 3);
    }
  }
}

TEST_CASE("build_step: delta out of range throws") {
  CHECK_THROWS_AS(htreg::build_step(4, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(htreg::build_step(4, 0.0), std::invalid_argument);
}

TEST_CASE("build_point_fit: all-zero and small patterns") {
  for (FitVariant v : {FitVariant::series, FitVariant::parallel}) {
    const Network zeros = htreg::build_point_fit(std::vector<int>(9, 0), 3, 1, v);
    for (int i = 0; i < 9; ++i)
      CHECK(zeros.evaluate({static_cast<double>(i)})[0] == Catch::Approx(0.0).margin(1e-12));
    const Network pat = htreg::build_point_fit({1, 0, 1, 0}, 2, 1, v);
    CHECK(pat.evaluate({2.0})[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(pat.evaluate({0.0})[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(pat.evaluate({1.0})[0] == Catch::Approx(0.0).margin(1e-12));
    CHECK(pat.evaluate({3.0})[0] == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("build_point_fit: exhaustive random sweep at S=(NL)^2, both variants") {
  htreg::Rng rng(321);
  const std::size_t n = 3, l = 3, s = 81;
  std::vector<int> theta(s);
  for (auto& t : theta) t = rng.uniform() < 0.5 ? 0 : 1;
  for (FitVariant v : {FitVariant::series, FitVariant::parallel}) {
    const Network net = htreg::build_point_fit(theta, n, l, v);
    CHECK(net.depth() <= 5 * l + 7);
    CHECK(net.width() <= 8 * n + 6);
    for (std::size_t i = 0; i < s; ++i) {
      const double got = net.evaluate({static_cast<double>(i)})[0];
      REQUIRE(got == Catch::Approx(static_cast<double>(theta[i])).margin(0.0));
    }
  }
}

TEST_CASE("build_point_fit: budget sweep over the parameter grid") {
  htreg::Rng rng(7);
  for (std::size_t n : {1u, 2u, 3u, 4u}) {
    for (std::size_t l : {1u, 2u, 3u, 4u}) {
      const std::size_t s = n * n * l * l;
      std::vector<int> theta(s);
      for (auto& t : theta) t = rng.uniform() < 0.5 ? 0 : 1;
      for (FitVariant v : {FitVariant::series, FitVariant::parallel}) {
        const Network net = htreg::build_point_fit(theta, n, l, v);
        CHECK(net.depth() <= 5 * l + 7);
        CHECK(net.width() <= 8 * n + 6);
        for (std::size_t i = 0; i < s; ++i)
          REQUIRE(net.evaluate({static_cast<double>(i)})[0] ==
                  Catch::Approx(static_cast<double>(theta[i])).margin(0.0));
      }
    }
  }
}

TEST_CASE("build_point_fit: S beyond (NL)^2 throws") {
  CHECK_THROWS_AS(htreg::build_point_fit(std::vector<int>(10, 0), 1, 3, FitVariant::series),
                  std::invalid_argument);
  CHECK_THROWS_AS(htreg::build_point_fit({0, 1, 2}, 2, 2, FitVariant::series),
                  std::invalid_argument);
}

TEST_CASE("build_piecewise_constant: constant dyadic value is reproduced exactly") {
  const GridSpec grid(1, 4, 0.01);  // K = 4 = 2^2 * 1^2 -> N=2, L=1
  const std::vector<double> values(4, 0.75);
  for (FitVariant v : {FitVariant::series, FitVariant::parallel}) {
    const Network net = htreg::build_piecewise_constant(grid, values, 0.0625, 2, 1, v);
    htreg::Rng rng(1);
    for (int t = 0; t < 300; ++t) {
      const double x = rng.uniform();
      std::size_t flat = 0;
      if (!grid.locate_good({x}, &flat)) continue;
      CHECK(net.evaluate({x})[0] == Catch::Approx(0.75).margin(0.0));
    }
  }
}

TEST_CASE("build_piecewise_constant: dyadic table is exact (tail clause)") {
  const GridSpec grid(1, 4, 0.01);
  const std::vector<double> values = {0.0, 0.5, 0.25, 1.0};  // all r <= 4 dyadics
  for (FitVariant v : {FitVariant::series, FitVariant::parallel}) {
    const Network net = htreg::build_piecewise_constant(grid, values, 1.0 / 16.0, 2, 1, v);
    for (std::size_t cell = 0; cell < 4; ++cell) {
      for (double frac : {0.0, 0.3, 0.6, 0.999}) {
        const double lo = good_lo(cell, 4), hi = good_hi(cell, 4, grid.delta);
        const double x = lo + (hi - lo) * frac;
        CHECK(net.evaluate({x})[0] == Catch::Approx(values[cell]).margin(0.0));
      }
    }
  }
}

TEST_CASE("build_piecewise_constant: d=2 random values within eps on a dense grid") {
  const std::size_t k = 4;  // N=4 -> m=2, L=1 -> lr=1
  const GridSpec grid(2, k, 0.01);
  htreg::Rng rng(99);
  std::vector<double> values(grid.cell_count());
  for (auto& v : values) v = rng.uniform();
  const double eps = 1.0 / 64.0;
  for (FitVariant v : {FitVariant::series, FitVariant::parallel}) {
    const Network net = htreg::build_piecewise_constant(grid, values, eps, 4, 1, v);
    double max_err = 0.0;
    for (int a = 0; a < 40; ++a) {
      for (int b = 0; b < 40; ++b) {
        const std::vector<double> x = {(a + 0.5) / 40.0, (b + 0.5) / 40.0};
        std::size_t flat = 0;
        if (!grid.locate_good(x, &flat)) continue;
        max_err = std::max(max_err, std::abs(net.evaluate(x)[0] - values[flat]));
      }
    }
    CHECK(max_err <= eps);
  }
}

TEST_CASE("build_piecewise_constant: lookup-table oracle agreement, d=1") {
  const std::size_t k = 16;  // N=2,L=2: m=2, lr=2 -> 4*4
  const GridSpec grid(1, k, 1.0 / 64.0);
  htreg::Rng rng(1000);
  std::vector<double> values(k);
  for (auto& v : values) v = rng.uniform();
  const double eps = 1.0 / 256.0;
  const Network net = htreg::build_piecewise_constant(grid, values, eps, 2, 2, FitVariant::series);
  std::size_t checked = 0;
  for (int t = 0; t < 10000; ++t) {
    const double x = rng.uniform();
    std::size_t flat = 0;
    if (!grid.locate_good({x}, &flat)) continue;
    ++checked;
    REQUIRE(std::abs(net.evaluate({x})[0] - values[flat]) <= eps);
  }
  CHECK(checked > 7000);
}

TEST_CASE("build_piecewise_constant: size grows at most linearly in log2(1/eps)") {
  const GridSpec grid(1, 4, 0.01);
  htreg::Rng rng(12);
  std::vector<double> values(4);
  for (auto& v : values) v = rng.uniform();
  for (FitVariant v : {FitVariant::series, FitVariant::parallel}) {
    std::vector<double> cost;
    std::vector<double> rr;
    for (double eps : {0.25, 0.0625, 1.0 / 256.0}) {
      const Network net = htreg::build_piecewise_constant(grid, values, eps, 2, 1, v);
      cost.push_back(static_cast<double>(net.depth() * net.width()));
      rr.push_back(std::ceil(std::log2(1.0 / eps)));
    }
    // depth*width growth bounded by a line in r: compare increments
    const double rate1 = (cost[1] - cost[0]) / (rr[1] - rr[0]);
    const double rate2 = (cost[2] - cost[1]) / (rr[2] - rr[1]);
    CHECK(rate2 <= rate1 * 1.5 + 64.0);
  }
}

TEST_CASE("build_piecewise_constant: budget forms of the two variants") {
  const std::size_t n = 2, l = 2, k = 16, d = 1;
  const GridSpec grid(d, k, 1e-3);
  htreg::Rng rng(5);
  std::vector<double> values(k);
  for (auto& v : values) v = rng.uniform();
  for (double eps : {0.25, 1.0 / 32.0}) {
    const auto r1 = static_cast<std::size_t>(std::ceil(std::log2(1.0 / eps)));
    const Network series = htreg::build_piecewise_constant(grid, values, eps, n, l, FitVariant::series);
    CHECK(series.depth() <= (5 * l + 7) * (r1 + 2));
    CHECK(series.width() <= std::max((4 * n + 3) * d, 8 * n + 10));
    const Network par = htreg::build_piecewise_constant(grid, values, eps, n, l, FitVariant::parallel);
    CHECK(par.depth() <= 9 * l + 12);
    CHECK(par.width() <= std::max((4 * n + 3) * d, (8 * n + 6) * (r1 + 1)));
  }
}

TEST_CASE("build_piecewise_constant: contract violations") {
  const GridSpec grid(1, 4, 0.01);
  const std::vector<double> ok(4, 0.5);
  CHECK_THROWS_AS(htreg::build_piecewise_constant(grid, ok, 1.5, 2, 1, FitVariant::series),
                  std::invalid_argument);
  CHECK_THROWS_AS(htreg::build_piecewise_constant(grid, {0.5, 0.5}, 0.25, 2, 1, FitVariant::series),
                  std::invalid_argument);
  CHECK_THROWS_AS(htreg::build_piecewise_constant(grid, ok, 0.25, 3, 1, FitVariant::series),
                  std::invalid_argument);  // K mismatch with (N, L)
  CHECK_THROWS_AS(htreg::build_piecewise_constant(grid, {0.5, 0.5, 0.5, 1.5}, 0.25, 2, 1,
                                                  FitVariant::series),
                  std::invalid_argument);
}

namespace {

htreg::SpikeSpec random_spike_spec(htreg::Rng& rng, std::size_t d, std::size_t k, double delta1,
                                   double delta2, std::size_t count, double u) {
  GridSpec grid(d, k, delta1);
  std::vector<std::size_t> cells(grid.cell_count());
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = i;
  for (std::size_t i = cells.size(); i > 1; --i)
    std::swap(cells[i - 1], cells[static_cast<std::size_t>(rng.uniform() * i)]);
  std::vector<htreg::SpikePoint> pts;
  for (std::size_t i = 0; i < count; ++i) {
    htreg::SpikePoint pt;
    pt.alpha = grid.unflatten(cells[i]);
    pt.x.resize(d);
    for (std::size_t c = 0; c < d; ++c) {
      const double lo = static_cast<double>(pt.alpha[c] - 1) / k;
      const double hi =
          (pt.alpha[c] < k) ? static_cast<double>(pt.alpha[c]) / k - delta1 : 1.0;
      pt.x[c] = lo + (hi - lo) * rng.uniform();
    }
    pt.y = rng.uniform() < 0.5 ? -1.0 : 1.0;
    pts.push_back(pt);
  }
  return htreg::SpikeSpec(grid, delta2, pts, u);
}

}  // namespace

TEST_CASE("build_spike_fitter: empty point set is the plateau on Q") {
  const GridSpec grid(1, 4, 0.01);
  const htreg::SpikeSpec spec(grid, 0.01, {}, 0.0);
  const Network net = htreg::build_spike_fitter(spec, 2, 1, FitVariant::parallel);
  htreg::Rng rng(2);
  for (int t = 0; t < 300; ++t) {
    const double x = rng.uniform();
    std::size_t flat = 0;
    if (!grid.locate_good({x}, &flat)) continue;
    CHECK(net.evaluate({x})[0] == 0.0);
  }
}

TEST_CASE("build_spike_fitter: single +1 point, zero plateau elsewhere") {
  const GridSpec grid(1, 4, 0.01);
  htreg::SpikePoint pt;
  pt.alpha = {2};
  pt.x = {0.30};
  pt.y = 1.0;
  const htreg::SpikeSpec spec(grid, 0.02, {pt}, 0.0);
  const Network net = htreg::build_spike_fitter(spec, 2, 1, FitVariant::series);
  CHECK(net.evaluate({0.30})[0] == 1.0);
  // test points in every other cube's good region, far from the anchor
  for (double x : {0.05, 0.12, 0.6, 0.7, 0.8, 0.95, 1.0}) {
    std::size_t flat = 0;
    REQUIRE(grid.locate_good({x}, &flat));
    CHECK(net.evaluate({x})[0] == 0.0);
  }
}

TEST_CASE("build_spike_fitter: interpolation and plateau are exact (d=1, K=16)") {
  htreg::Rng rng(2718);
  const std::size_t k = 16;
  const double n_scale = 32.0;  // Delta_2 = 1/(2 n^3) with n = 32
  const double delta2 = 1.0 / (2.0 * n_scale * n_scale * n_scale);
  const double delta1 = 1.0 / (3.1 * k);
  const double u = 0.0884;
  const auto spec = random_spike_spec(rng, 1, k, delta1, delta2, 10, u);
  for (FitVariant v : {FitVariant::series, FitVariant::parallel}) {
    htreg::SpikeBuildReport report;
    const Network net = htreg::build_spike_fitter(spec, 2, 2, v, &report);
    CHECK(report.depth == net.depth());
    CHECK(report.c_depth > 0.0);
    for (const auto& pt : spec.points)
      REQUIRE(net.evaluate(pt.x)[0] == pt.y);
    std::size_t plateau_checked = 0;
    while (plateau_checked < 200) {
      const double x = rng.uniform();
      std::size_t flat = 0;
      if (!spec.grid.locate_good({x}, &flat)) continue;
      bool near = false;
      for (const auto& pt : spec.points)
        if (std::abs(x - pt.x[0]) < delta2) near = true;
      if (near) continue;
      ++plateau_checked;
      REQUIRE(net.evaluate({x})[0] == u);
    }
  }
}

TEST_CASE("build_spike_fitter: output range is [-1,1] with no tolerance") {
  htreg::Rng rng(31337);
  const auto spec = random_spike_spec(rng, 1, 16, 1e-3, 1e-3, 8, -0.4);
  const Network net = htreg::build_spike_fitter(spec, 2, 2, FitVariant::parallel);
  for (int t = 0; t < 2000; ++t) {
    const double x = rng.uniform();  // includes slivers and bump shoulders
    const double y = net.evaluate({x})[0];
    CHECK(y >= -1.0);
    CHECK(y <= 1.0);
  }
}

TEST_CASE("build_spike_fitter: d=2 anchors and plateau") {
  htreg::Rng rng(777);
  const auto spec = random_spike_spec(rng, 2, 4, 1e-3, 1e-3, 6, 0.25);
  const Network net = htreg::build_spike_fitter(spec, 4, 1, FitVariant::parallel);
  for (const auto& pt : spec.points) REQUIRE(net.evaluate(pt.x)[0] == pt.y);
  std::size_t plateau_checked = 0;
  while (plateau_checked < 100) {
    const std::vector<double> x = {rng.uniform(), rng.uniform()};
    std::size_t flat = 0;
    if (!spec.grid.locate_good(x, &flat)) continue;
    bool near = false;
    for (const auto& pt : spec.points) {
      const double dist = std::max(std::abs(x[0] - pt.x[0]), std::abs(x[1] - pt.x[1]));
      if (dist < 2.0 * spec.delta2) near = true;
    }
    if (near) continue;
    ++plateau_checked;
    REQUIRE(net.evaluate(x)[0] == 0.25);
  }
}

TEST_CASE("build_spike_fitter: variant size shapes and measured constants") {
  htreg::Rng rng(404);
  const double delta2 = 1.0 / 4096.0;
  const auto spec = random_spike_spec(rng, 1, 16, 1e-3, delta2, 5, 0.1);
  htreg::SpikeBuildReport rep_series, rep_parallel;
  const Network ns = htreg::build_spike_fitter(spec, 2, 2, FitVariant::series, &rep_series);
  const Network np = htreg::build_spike_fitter(spec, 2, 2, FitVariant::parallel, &rep_parallel);
  // series: log(1/Delta2) rides on depth; parallel: on width
  CHECK(ns.depth() > np.depth());
  CHECK(np.width() > ns.width());
  CHECK(rep_series.c_depth > 0.0);
  CHECK(rep_parallel.c_width > 0.0);
}

TEST_CASE("SpikeSpec: contract violations") {
  const GridSpec grid(1, 4, 0.01);
  htreg::SpikePoint bad_y;
  bad_y.alpha = {1};
  bad_y.x = {0.1};
  bad_y.y = 0.5;
  CHECK_THROWS_AS(htreg::SpikeSpec(grid, 0.01, {bad_y}, 0.0), std::invalid_argument);
  htreg::SpikePoint off_cell;
  off_cell.alpha = {1};
  off_cell.x = {0.9};  // lives in cell 4, not 1
  off_cell.y = 1.0;
  CHECK_THROWS_AS(htreg::SpikeSpec(grid, 0.01, {off_cell}, 0.0), std::invalid_argument);
  htreg::SpikePoint a1, a2;
  a1.alpha = {2};
  a1.x = {0.3};
  a1.y = 1.0;
  a2.alpha = {2};
  a2.x = {0.31};
  a2.y = -1.0;
  CHECK_THROWS_AS(htreg::SpikeSpec(grid, 0.01, {a1, a2}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(htreg::SpikeSpec(grid, 0.01, {}, 1.5), std::invalid_argument);
}
