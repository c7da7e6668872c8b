#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "htreg/approx.hpp"
#include "htreg/csv.hpp"
#include "htreg/hcm.hpp"
#include "htreg/loss.hpp"
#include "htreg/noise.hpp"
#include "htreg/robust.hpp"
#include "htreg/schedule.hpp"
#include "htreg/trainer.hpp"

namespace htreg {

using json = nlohmann::json;

/// Shared configuration of the experiment drivers. Defaults reproduce the
/// acceptance-scale runs; everything is overridable from the TOML config.
struct ExperimentSpec {
  std::string experiment = "rate_sweep";
  std::vector<std::size_t> n_grid = {512, 1024, 2048, 4096, 8192};
  double p = 2.0;
  NoiseModel model = NoiseModel::trinomial_spike(1024, 4, 2.0);
  std::string f0_preset = "linear-d1";
  std::vector<Regime> regimes = {Regime::symmetric_huber, Regime::least_squares};
  std::size_t seeds = 10;
  std::uint64_t master_seed = 1;
  double c_tau = 4.0;
  double c_nl = 48.0;
  std::size_t threads = 1;

  // training knobs
  std::size_t epochs = 200;
  std::size_t restarts = 2;
  double lr = 0.02;
  std::size_t mc_budget = 20000;

  // bias demo
  std::vector<double> tau_grid = {8.0, 16.0, 32.0, 64.0};

  // lower-bound demo
  std::size_t lb_n = 1024;
  std::size_t lb_s = 64;
  double lb_tau = 32.0;
  std::size_t lb_d = 1;
  std::size_t lb_runs = 50;
  std::size_t lb_retry_cap = 8;

  // convexity audit
  std::vector<double> delta_grid = {0.125, 0.25, 0.5, 1.0};
  std::size_t gap_budget = 100000;

  void validate() const {
    for (std::size_t i = 1; i < n_grid.size(); ++i)
      if (n_grid[i] <= n_grid[i - 1]) contract_violation("ExperimentSpec: n-grid must be strictly increasing");
    if (experiment == "rate_sweep" && seeds < 3)
      contract_violation("ExperimentSpec: statistical criteria need >= 3 seeds");
  }
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

/// Least-squares log-log slope with its standard error (>= 4 points).
inline SlopeFit fit_loglog_slope(const std::vector<double>& ns, const std::vector<double>& errs) {
  if (ns.size() != errs.size() || ns.size() < 4)
    contract_violation("fit_loglog_slope: need >= 4 points");
  const std::size_t m = ns.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std::log(ns[i]), y = std::log(std::max(errs[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dm = static_cast<double>(m);
  const double denom = dm * sxx - sx * sx;
  SlopeFit f;
  f.slope = (dm * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / dm;
  double ss = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std::log(ns[i]), y = std::log(std::max(errs[i], 1e-300));
    const double r = y - (f.intercept + f.slope * x);
    ss += r * r;
  }
  const double var = ss / std::max(1.0, dm - 2.0);
  f.stderr_slope = std::sqrt(var * dm / denom);
  return f;
}

struct ExperimentResult {
  std::vector<ResultRow> rows;
  json summary;
  bool hard_failure = false;  // drives the CLI exit code
};

namespace detail {

/// Fans independent cells over `threads` workers; cell seeds are derived
/// from labels, so the result is independent of scheduling order.
inline void run_cells(std::size_t count, std::size_t threads,
                      const std::function<void(std::size_t)>& work) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const std::size_t tcount = std::min(threads, count);
  pool.reserve(tcount);
  for (std::size_t t = 0; t < tcount; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        work(i);
      }
    });
  for (auto& th : pool) th.join();
}

inline void sort_rows(std::vector<ResultRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.experiment, a.regime, a.n, a.seed) <
           std::tie(b.experiment, b.regime, b.n, b.seed);
  });
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

inline std::function<double(const std::vector<double>&)> resolve_f0(const std::string& preset,
                                                                    std::size_t* dim);
inline double resolve_gamma(const std::string& preset);

}  // namespace detail

/// Ground-truth presets addressable by name in experiment configs: "zero",
/// "linear-d1", and the composition-bench instances.
inline std::function<double(const std::vector<double>&)> f0_by_name(const std::string& preset,
                                                                    std::size_t* dim) {
  if (preset == "zero") {
    if (*dim == 0) *dim = 1;
    return [](const std::vector<double>&) { return 0.0; };
  }
  if (preset == "linear-d1") {
    *dim = 1;
    return [](const std::vector<double>& x) { return x[0]; };
  }
  static const std::vector<HcmFunction> lib = library_instances();
  const HcmFunction& h = find_instance(lib, preset);
  *dim = h.input_dim();
  return h.as_fn();
}

inline double gamma_by_name(const std::string& preset) {
  if (preset == "zero" || preset == "linear-d1") return 1.0;
  static const std::vector<HcmFunction> lib = library_instances();
  return find_instance(lib, preset).gamma_star();
}

namespace detail {

inline std::function<double(const std::vector<double>&)> resolve_f0(const std::string& preset,
                                                                    std::size_t* dim) {
  return f0_by_name(preset, dim);
}
inline double resolve_gamma(const std::string& preset) { return gamma_by_name(preset); }

}  // namespace detail

/// Rate-separation sweep: for each (regime, n, seed) cell build the
/// schedule, draw a dataset, train, and record the Monte Carlo L2 error;
/// then fit the log-log slope per regime over the per-n seed medians.
inline ExperimentResult run_rate_sweep(const ExperimentSpec& spec) {
  spec.validate();
  std::size_t dim = 0;
  auto f0 = detail::resolve_f0(spec.f0_preset, &dim);
  const double gamma = detail::resolve_gamma(spec.f0_preset);

  struct Cell {
    Regime regime;
    std::size_t n;
    std::size_t seed;
  };
  std::vector<Cell> cells;
  for (Regime r : spec.regimes)
    for (std::size_t n : spec.n_grid)
      for (std::size_t s = 0; s < spec.seeds; ++s) cells.push_back({r, n, s});

  std::vector<ResultRow> rows(cells.size());
  detail::run_cells(cells.size(), spec.threads, [&](std::size_t ci) {
    const Cell& c = cells[ci];
    const auto t0 = std::chrono::steady_clock::now();
    ResultRow row;
    row.experiment = spec.experiment;
    row.regime = to_string(c.regime);
    row.n = c.n;
    row.seed = static_cast<long long>(c.seed);
    const Schedule sch = make_schedule(c.n, spec.p, gamma, c.regime, spec.c_tau, spec.c_nl);
    row.tau = sch.tau;
    row.nl = static_cast<double>(sch.arch_depth * sch.arch_width);
    const std::uint64_t cell_seed =
        Rng::derive(spec.master_seed, static_cast<std::uint64_t>(c.regime) + 1, c.n, c.seed);
    const Dataset data = make_dataset(f0, dim, c.n, spec.model, cell_seed);
    TrainConfig tc;
    tc.depth = sch.arch_depth;
    tc.width = sch.arch_width;
    tc.loss = HuberConfig(sch.tau, 1.0, LossKind::huber);
    tc.opt.epochs = spec.epochs;
    tc.opt.lr = spec.lr;
    tc.restarts = spec.restarts;
    tc.seed = Rng::derive(cell_seed, 2);
    try {
      auto [fit, rep] = train(data, tc);
      const L2Estimate l2 = l2_error(fit, f0, spec.mc_budget, Rng::derive(cell_seed, 3));
      row.l2_error = l2.value;
      row.l2_se = l2.se;
      row.emp_risk = rep.final_risk;
      row.delta_opt = rep.delta_opt;
    } catch (const std::runtime_error&) {
      row.l2_error = std::nan("");  // divergence: flag the row, keep sweeping
      row.l2_se = std::nan("");
    }
    row.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    rows[ci] = row;
  });
  detail::sort_rows(rows);

  ExperimentResult out;
  out.rows = rows;
  out.summary["experiment"] = spec.experiment;
  out.summary["f0"] = spec.f0_preset;
  out.summary["gamma_star"] = gamma;
  out.summary["noise"] = spec.model.name();
  for (Regime r : spec.regimes) {
    std::vector<double> ns, meds;
    for (std::size_t n : spec.n_grid) {
      std::vector<double> errs;
      for (const auto& row : rows)
        if (row.regime == to_string(r) && row.n == n && std::isfinite(row.l2_error))
          errs.push_back(row.l2_error);
      if (!errs.empty()) {
        ns.push_back(static_cast<double>(n));
        meds.push_back(detail::median(errs));
      }
    }
    json jr;
    jr["n"] = ns;
    jr["median_l2"] = meds;
    if (ns.size() >= 4) {
      const SlopeFit f = fit_loglog_slope(ns, meds);
      jr["slope"] = f.slope;
      jr["slope_se"] = f.stderr_slope;
    }
    out.summary["regimes"][to_string(r)] = jr;
  }
  // paired comparison at the largest n (one block per seed)
  if (spec.regimes.size() == 2) {
    const std::size_t n_big = spec.n_grid.back();
    std::size_t wins = 0, blocks = 0;
    for (std::size_t s = 0; s < spec.seeds; ++s) {
      std::optional<double> a, b;
      for (const auto& row : rows) {
        if (row.n != n_big || row.seed != static_cast<long long>(s)) continue;
        if (row.regime == to_string(spec.regimes[0])) a = row.l2_error;
        if (row.regime == to_string(spec.regimes[1])) b = row.l2_error;
      }
      if (a && b && std::isfinite(*a) && std::isfinite(*b)) {
        ++blocks;
        if (*a <= *b) ++wins;
      }
    }
    out.summary["comparison"] = {{"first", to_string(spec.regimes[0])},
                                 {"second", to_string(spec.regimes[1])},
                                 {"n", n_big},
                                 {"first_wins", wins},
                                 {"blocks", blocks}};
  }
  return out;
}

/// Bias demonstration: sweep tau, record the analytic Huberization bias of
/// the noise model next to the trained estimator's signed mean error on
/// f0 = 0, so the tau^{1-p} bias floor is visible in one table.
inline ExperimentResult run_bias_demo(const ExperimentSpec& spec) {
  if (spec.model.symmetric())
    contract_violation("run_bias_demo: asymmetric model required (symmetric bias is identically 0)");
  std::size_t dim = 1;
  auto f0 = detail::resolve_f0("zero", &dim);
  const double p = spec.model.p_order();

  ExperimentResult out;
  out.summary["experiment"] = "bias_demo";
  out.summary["noise"] = spec.model.name();
  json curve = json::array();

  struct Cell {
    double tau;
    std::size_t seed;
  };
  std::vector<Cell> cells;
  for (double tau : spec.tau_grid)
    for (std::size_t s = 0; s < spec.seeds; ++s) cells.push_back({tau, s});
  std::vector<ResultRow> rows(cells.size());

  const std::size_t n = spec.n_grid.empty() ? 4096 : spec.n_grid.back();
  detail::run_cells(cells.size(), spec.threads, [&](std::size_t ci) {
    const auto [tau, s] = cells[ci];
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t cell_seed = Rng::derive(spec.master_seed, 77, static_cast<std::uint64_t>(tau), s);
    // the model ties its own tau parameter; the sweep reuses its noise as-is
    const NoiseModel model =
        spec.model.kind() == NoiseModel::Kind::three_point_bias
            ? NoiseModel::three_point_bias(p, tau)
            : spec.model;
    const Dataset data = make_dataset(f0, dim, n, model, cell_seed);
    TrainConfig tc;
    tc.depth = 1;
    tc.width = 4;
    tc.loss = HuberConfig(tau, 1.0, LossKind::huber);
    tc.opt.epochs = spec.epochs;
    tc.opt.lr = spec.lr;
    tc.restarts = spec.restarts;
    tc.seed = Rng::derive(cell_seed, 2);
    auto [fit, rep] = train(data, tc);
    // signed mean error E[fhat - f0] over a fresh uniform sample
    Rng rng(Rng::derive(cell_seed, 3));
    double mean = 0.0;
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < spec.mc_budget; ++i) {
      for (auto& v : x) v = rng.uniform();
      mean += evaluate_truncated(fit, x);
    }
    mean /= static_cast<double>(spec.mc_budget);
    ResultRow row;
    row.experiment = "bias_demo";
    row.regime = "huber";
    row.n = n;
    row.seed = static_cast<long long>(s);
    row.tau = tau;
    row.l2_error = mean;  // signed mean error (f0 = 0)
    row.l2_se = 0.0;
    row.emp_risk = rep.final_risk;
    row.delta_opt = rep.delta_opt;
    row.nl = static_cast<double>(tc.depth * tc.width);
    row.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    rows[ci] = row;
  });
  detail::sort_rows(rows);
  out.rows = rows;

  for (double tau : spec.tau_grid) {
    const NoiseModel model =
        spec.model.kind() == NoiseModel::Kind::three_point_bias
            ? NoiseModel::three_point_bias(p, tau)
            : spec.model;
    const BiasResult bias = huberization_bias(model, tau);
    const double vp = model.moment(p);
    json pt;
    pt["tau"] = tau;
    pt["delta_tau"] = bias.delta;
    pt["residual"] = bias.residual;
    pt["floor"] = std::pow(2.0, -p - 1.0) * std::pow(tau, 1.0 - p);  // theta/2
    pt["ceiling"] = 4.0 * vp * std::pow(tau, 1.0 - p);
    curve.push_back(pt);
  }
  out.summary["analytic"] = curve;
  return out;
}

/// Result of one lower-bound replication.
struct LowerBoundRun {
  bool good_event = false;
  std::size_t retries = 0;
  std::size_t m1 = 0;  // spike count
  std::size_t m2 = 0;  // occupied-cube count
  double min_pair_dist = 0.0;
  double risk_spike = 0.0;
  double risk_truth = 0.0;
  double l2 = 0.0;
  double l2_se = 0.0;
  double u = 0.0;
};

/// One replication of the adversarial construction: trinomial spike data on
/// f0 = 0, spike fitter through the occupied cubes, plateau
/// u = sqrt((S/(32 n)) * min(tau, (n/S)^{1/p})).
inline LowerBoundRun lowerbound_once(std::size_t n, std::size_t s_spikes, double p, double tau,
                                     std::size_t d, std::uint64_t seed, std::size_t retry_cap,
                                     std::size_t mc_budget, Network* built = nullptr) {
  LowerBoundRun run;
  const double spike_mag = std::pow(static_cast<double>(n) / static_cast<double>(s_spikes), 1.0 / p);
  run.u = std::sqrt(static_cast<double>(s_spikes) / (32.0 * static_cast<double>(n)) *
                    std::min(tau, spike_mag));

  // grid: K^d = S cells, Delta_1 = 1/(n^2 K), Delta_2 = 1/(2 n^3)
  const auto k = static_cast<std::size_t>(
      std::llround(std::pow(static_cast<double>(s_spikes), 1.0 / static_cast<double>(d))));
  std::size_t kd = 1;
  for (std::size_t i = 0; i < d; ++i) kd *= k;
  if (kd != s_spikes) contract_violation("lowerbound: S must be a d-th power of an integer K");
  // builder parameters with floor(N^{1/d})^2 floor(L^{1/d})^2 == K
  const auto nl_root = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(k))));
  if (nl_root * nl_root != k)
    contract_violation("lowerbound: K must be a perfect square for the builder parameters");
  std::size_t l_axis = (nl_root % 2 == 0) ? 2 : 1;
  std::size_t n_axis = nl_root / l_axis;
  std::size_t bn = 1, bl = 1;
  for (std::size_t i = 0; i < d; ++i) {
    bn *= n_axis;
    bl *= l_axis;
  }
  const double dn = static_cast<double>(n);
  const double delta1 = 1.0 / (dn * dn * static_cast<double>(k));
  const double delta2 = 1.0 / (2.0 * dn * dn * dn);
  const NoiseModel model = NoiseModel::trinomial_spike(n, s_spikes, p);

  auto f0 = [](const std::vector<double>&) { return 0.0; };
  for (std::size_t attempt = 0; attempt <= retry_cap; ++attempt) {
    const std::uint64_t sub = Rng::derive(seed, 0x10b0, attempt);
    const Dataset data = make_dataset(f0, d, n, model, sub);
    GridSpec grid(d, k, delta1);

    // good-event diagnostics
    std::vector<std::size_t> spike_idx;
    for (std::size_t i = 0; i < data.n; ++i)
      if (data.Y[i] != 0.0) spike_idx.push_back(i);
    run.m1 = spike_idx.size();

    bool all_good = true;
    std::vector<double> xi(d);
    std::vector<long long> cube_of(data.n, -1);
    for (std::size_t i = 0; i < data.n && all_good; ++i) {
      data.row(i, xi);
      std::size_t flat = 0;
      if (!grid.locate_good(xi, &flat))
        all_good = false;
      else
        cube_of[i] = static_cast<long long>(flat);
    }

    double min_dist = std::numeric_limits<double>::infinity();
    if (all_good) {
      std::vector<double> xj(d);
      for (std::size_t i = 0; i < data.n; ++i) {
        data.row(i, xi);
        for (std::size_t j = i + 1; j < data.n; ++j) {
          double dist = 0.0;
          for (std::size_t c = 0; c < d; ++c)
            dist = std::max(dist, std::abs(xi[c] - data.X[j * d + c]));
          min_dist = std::min(min_dist, dist);
        }
      }
    }
    run.min_pair_dist = min_dist;

    // one anchor per occupied cube: first spike seen
    std::vector<SpikePoint> points;
    {
      std::vector<char> used(kd, 0);
      for (std::size_t i : spike_idx) {
        const long long cube = cube_of[i];
        if (cube < 0 || used[static_cast<std::size_t>(cube)]) continue;
        used[static_cast<std::size_t>(cube)] = 1;
        SpikePoint pt;
        pt.alpha = grid.unflatten(static_cast<std::size_t>(cube));
        data.row(i, pt.x);
        pt.y = data.Y[i] > 0.0 ? 1.0 : -1.0;
        points.push_back(pt);
      }
    }
    run.m2 = points.size();

    run.good_event = all_good &&
                     2 * run.m1 >= s_spikes && 2 * run.m1 <= 3 * s_spikes &&
                     8 * run.m2 >= s_spikes && min_dist >= delta2;
    run.retries = attempt;
    if (!run.good_event && attempt < retry_cap) continue;

    SpikeSpec sp(grid, delta2, points, run.u);
    Network net = build_spike_fitter(sp, bn, bl, FitVariant::series);
    auto eval = [&](const std::vector<double>& x) { return net.evaluate_scalar(x); };
    run.risk_spike = empirical_risk_fn(eval, data, tau);
    run.risk_truth = empirical_risk_fn([](const std::vector<double>&) { return 0.0; }, data, tau);
    const L2Estimate l2 = l2_error(eval, [](const std::vector<double>&) { return 0.0; }, d,
                                   mc_budget, Rng::derive(sub, 5));
    run.l2 = l2.value;
    run.l2_se = l2.se;
    if (built) *built = std::move(net);
    return run;
  }
  return run;
}

/// Lower-bound demonstration over seeds; checks R_tau(f~) <= R_tau(f0) and
/// ||f~||_2 >= 0.5 u per replication.
inline ExperimentResult run_lowerbound_demo(const ExperimentSpec& spec, Network* last_net = nullptr) {
  const double frac = static_cast<double>(spec.lb_s) / static_cast<double>(spec.lb_n);
  if (frac > 0.5) contract_violation("run_lowerbound_demo: S/n too large");
  ExperimentResult out;
  std::vector<ResultRow> rows(spec.lb_runs);
  std::atomic<std::size_t> ok_risk{0}, ok_l2{0}, ok_event{0};

  detail::run_cells(spec.lb_runs, spec.threads, [&](std::size_t r) {
    const auto t0 = std::chrono::steady_clock::now();
    Network* sink = (r + 1 == spec.lb_runs) ? last_net : nullptr;
    const LowerBoundRun res =
        lowerbound_once(spec.lb_n, spec.lb_s, spec.p, spec.lb_tau, spec.lb_d,
                        Rng::derive(spec.master_seed, 0xdead, r), spec.lb_retry_cap,
                        std::max<std::size_t>(spec.mc_budget / 4, 2000), sink);
    ResultRow row;
    row.experiment = "lowerbound_demo";
    row.regime = res.good_event ? "spike" : "spike_bad_event";
    row.n = spec.lb_n;
    row.seed = static_cast<long long>(r);
    row.l2_error = res.l2;
    row.l2_se = res.l2_se;
    row.emp_risk = res.risk_spike - res.risk_truth;
    row.delta_opt = res.u;
    row.tau = spec.lb_tau;
    row.nl = static_cast<double>(res.m2);
    row.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    rows[r] = row;
    if (res.good_event) ++ok_event;
    if (res.risk_spike <= res.risk_truth) ++ok_risk;
    if (res.l2 >= 0.5 * res.u) ++ok_l2;
  });
  detail::sort_rows(rows);
  out.rows = rows;
  out.summary["experiment"] = "lowerbound_demo";
  out.summary["n"] = spec.lb_n;
  out.summary["S"] = spec.lb_s;
  out.summary["tau"] = spec.lb_tau;
  out.summary["d"] = spec.lb_d;
  out.summary["runs"] = spec.lb_runs;
  out.summary["u"] = rows.empty() ? 0.0 : rows.front().delta_opt;
  out.summary["risk_inequality_ok"] = ok_risk.load();
  out.summary["l2_lower_ok"] = ok_l2.load();
  out.summary["good_event_ok"] = ok_event.load();
  return out;
}

struct ConvexityCell {
  std::string noise;
  double tau = 0.0;
  double delta = 0.0;
  double gap = 0.0;
  double se = 0.0;
  double required = 0.0;  // delta^2/8 or delta^2/4
  bool in_validity_region = false;
  bool violated = false;
};

/// Strong-convexity audit over a (noise, tau, delta) grid: Monte Carlo gap
/// against delta^2/8 (asymmetric, within the locality condition) or
/// delta^2/4 (symmetric), with 3-sigma slack. Any violation inside the
/// validity region is a hard failure.
inline ExperimentResult run_convexity_audit(const ExperimentSpec& spec,
                                            const std::vector<NoiseModel>& models,
                                            std::vector<ConvexityCell>* cells_out = nullptr) {
  ExperimentResult out;
  std::vector<ConvexityCell> cells;
  std::vector<ResultRow> rows;
  bool any_violation = false;
  const double level_m = 1.0;
  long long seed_counter = 0;
  for (const auto& model : models) {
    const double p = model.p_order();
    const double vp = model.moment(p);
    const double c1 = c1_floor(model, level_m);
    for (double tau : spec.tau_grid) {
      for (double delta : spec.delta_grid) {
        ConvexityCell cell;
        cell.noise = model.name();
        cell.tau = tau;
        cell.delta = delta;
        const GapEstimate g = excess_risk_gap(model, delta, tau, spec.gap_budget,
                                              Rng::derive(spec.master_seed, 0xc0, ++seed_counter));
        cell.gap = g.gap;
        cell.se = g.se;
        const bool tau_ok = tau >= c1;
        const bool delta_ok = delta <= 2.0 * level_m;
        if (model.symmetric()) {
          cell.required = delta * delta / 4.0;
          cell.in_validity_region = tau_ok && delta_ok;
        } else {
          cell.required = delta * delta / 8.0;
          const double locality = 8.0 * vp * std::pow(tau, 1.0 - p);
          cell.in_validity_region = tau_ok && delta_ok && delta >= locality;
        }
        cell.violated = cell.in_validity_region && cell.gap < cell.required - 3.0 * cell.se;
        any_violation = any_violation || cell.violated;
        cells.push_back(cell);

        ResultRow row;
        row.experiment = "convexity_audit";
        row.regime = model.name();
        row.n = spec.gap_budget;
        row.seed = seed_counter;
        row.l2_error = cell.gap;
        row.l2_se = cell.se;
        row.emp_risk = delta * delta;
        row.delta_opt = cell.required;
        row.tau = tau;
        row.nl = cell.in_validity_region ? 1.0 : 0.0;
        rows.push_back(row);
      }
    }
  }
  detail::sort_rows(rows);
  out.rows = rows;
  out.hard_failure = any_violation;
  out.summary["experiment"] = "convexity_audit";
  out.summary["violations"] = any_violation;
  if (cells_out) *cells_out = cells;
  return out;
}

}  // namespace htreg
