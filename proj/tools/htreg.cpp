// Command-line surface: schedule inspection, network import/export, the
// constructive builders, training runs, and the experiment drivers.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "htreg/approx.hpp"
#include "htreg/chart.hpp"
#include "htreg/experiments.hpp"
#include "htreg/hcm.hpp"
#include "htreg/net_io.hpp"
#include "htreg/noise.hpp"
#include "htreg/primitives.hpp"
#include "htreg/schedule.hpp"
#include "htreg/tomlmini.hpp"
#include "htreg/trainer.hpp"

namespace {

using htreg::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

htreg::NoiseModel noise_from_toml(const htreg::TomlDoc& doc, const std::string& prefix) {
  const std::string kind = doc.get_string(prefix + ".kind", "gaussian");
  if (kind == "gaussian") return htreg::NoiseModel::gaussian(doc.get_double(prefix + ".sigma", 1.0));
  if (kind == "trinomial_spike")
    return htreg::NoiseModel::trinomial_spike(
        static_cast<std::size_t>(doc.get_int(prefix + ".n", 4096)),
        static_cast<std::size_t>(doc.get_int(prefix + ".S", 4)), doc.get_double(prefix + ".p", 2.0));
  if (kind == "three_point_bias")
    return htreg::NoiseModel::three_point_bias(doc.get_double(prefix + ".p", 2.0),
                                               doc.get_double(prefix + ".tau", 8.0));
  if (kind == "symmetric_two_point")
    return htreg::NoiseModel::symmetric_two_point(doc.get_double(prefix + ".a", 1.0));
  if (kind == "symmetric_pareto")
    return htreg::NoiseModel::symmetric_pareto(doc.get_double(prefix + ".p_tail", 2.5),
                                               doc.get_double(prefix + ".scale", 0.5));
  throw std::runtime_error("unknown noise kind '" + kind + "'");
}

htreg::ExperimentSpec spec_from_toml(const htreg::TomlDoc& doc) {
  htreg::ExperimentSpec spec;
  spec.experiment = doc.get_string("experiment.id", spec.experiment);
  if (doc.has("experiment.n_grid")) {
    spec.n_grid.clear();
    for (double v : doc.get_double_array("experiment.n_grid"))
      spec.n_grid.push_back(static_cast<std::size_t>(v));
  }
  spec.p = doc.get_double("experiment.p", spec.p);
  spec.f0_preset = doc.get_string("experiment.f0", spec.f0_preset);
  if (doc.has("experiment.regimes")) {
    spec.regimes.clear();
    for (const auto& r : doc.get_string_array("experiment.regimes"))
      spec.regimes.push_back(htreg::regime_from_string(r));
  }
  spec.seeds = static_cast<std::size_t>(doc.get_int("experiment.seeds", static_cast<long>(spec.seeds)));
  spec.master_seed = static_cast<std::uint64_t>(doc.get_int("experiment.seed", 1));
  spec.c_tau = doc.get_double("schedule.c_tau", spec.c_tau);
  spec.c_nl = doc.get_double("schedule.c_nl", spec.c_nl);
  spec.epochs = static_cast<std::size_t>(doc.get_int("train.epochs", static_cast<long>(spec.epochs)));
  spec.restarts = static_cast<std::size_t>(doc.get_int("train.restarts", static_cast<long>(spec.restarts)));
  spec.lr = doc.get_double("train.lr", spec.lr);
  spec.mc_budget = static_cast<std::size_t>(doc.get_int("experiment.mc_budget", static_cast<long>(spec.mc_budget)));
  if (doc.has("experiment.tau_grid")) spec.tau_grid = doc.get_double_array("experiment.tau_grid");
  if (doc.has("experiment.delta_grid")) spec.delta_grid = doc.get_double_array("experiment.delta_grid");
  if (doc.has("noise.kind")) spec.model = noise_from_toml(doc, "noise");
  spec.lb_n = static_cast<std::size_t>(doc.get_int("lowerbound.n", static_cast<long>(spec.lb_n)));
  spec.lb_s = static_cast<std::size_t>(doc.get_int("lowerbound.S", static_cast<long>(spec.lb_s)));
  spec.lb_tau = doc.get_double("lowerbound.tau", spec.lb_tau);
  spec.lb_d = static_cast<std::size_t>(doc.get_int("lowerbound.d", static_cast<long>(spec.lb_d)));
  spec.lb_runs = static_cast<std::size_t>(doc.get_int("lowerbound.runs", static_cast<long>(spec.lb_runs)));
  spec.gap_budget = static_cast<std::size_t>(doc.get_int("convexity.budget", static_cast<long>(spec.gap_budget)));
  return spec;
}

json net_info(const htreg::Network& net) {
  json j;
  j["input_dim"] = net.input_dim();
  j["output_dim"] = net.output_dim();
  j["depth"] = net.depth();
  j["width"] = net.width();
  j["parameters"] = net.parameter_count();
  return j;
}

// randomized good-region sweep used by the approx subcommands' reports
json contract_report(const htreg::Network& net, const htreg::GridSpec& grid,
                     const std::vector<double>& values, std::uint64_t seed) {
  htreg::Rng rng(seed);
  double max_err = 0.0;
  std::size_t checked = 0;
  std::vector<double> x(grid.d);
  for (std::size_t it = 0; it < 20000; ++it) {
    for (auto& v : x) v = rng.uniform();
    std::size_t flat = 0;
    if (!grid.locate_good(x, &flat)) continue;
    ++checked;
    max_err = std::max(max_err, std::abs(net.evaluate_scalar(x) - values[flat]));
  }
  json j;
  j["good_region_points"] = checked;
  j["max_good_region_error"] = max_err;
  j["sizes"] = net_info(net);
  return j;
}

int cmd_schedule(std::size_t n, double p, double gamma, const std::string& regime, double c_tau,
                 double c_nl) {
  const htreg::Schedule s =
      htreg::make_schedule(n, p, gamma, htreg::regime_from_string(regime), c_tau, c_nl);
  json j;
  j["n"] = s.n;
  j["p"] = s.p;
  j["gamma_star"] = s.gamma_star;
  j["regime"] = htreg::to_string(s.regime);
  j["nu"] = s.nu;
  j["NL_product"] = s.nl_product;
  j["tau_n"] = std::isfinite(s.tau) ? json(s.tau) : json("inf");
  j["V_n"] = s.v_n;
  j["delta_n"] = s.delta_n;
  j["exponents"] = {{"NL", s.exponent_nl}, {"tau", s.exponent_tau}, {"delta", s.exponent_delta}};
  j["arch"] = {{"depth", s.arch_depth}, {"width", s.arch_width}};
  j["constants"] = {{"c_tau", s.c_tau}, {"c_NL", s.c_nl}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heavy-tailed ReLU regression lab"};
  app.require_subcommand(1);

  // ---- schedule show
  auto* sched = app.add_subcommand("schedule", "hyper-parameter schedules");
  auto* sched_show = sched->add_subcommand("show", "print the derived schedule as JSON");
  std::size_t sh_n = 1024;
  double sh_p = 2.0, sh_gamma = 1.0, sh_ctau = 1.0, sh_cnl = 1.0;
  std::string sh_regime = "adaptive_huber";
  sched_show->add_option("--n", sh_n, "sample size")->required();
  sched_show->add_option("--p", sh_p, "moment order")->required();
  sched_show->add_option("--gamma", sh_gamma, "gamma*")->required();
  sched_show->add_option("--regime", sh_regime, "adaptive_huber|least_squares|symmetric_huber")->required();
  sched_show->add_option("--c-tau", sh_ctau, "tau multiplier");
  sched_show->add_option("--c-nl", sh_cnl, "NL multiplier");

  // ---- net export/import
  auto* net = app.add_subcommand("net", "network file utilities");
  auto* net_export = net->add_subcommand("export", "build a primitive and write its network file");
  std::string ne_kind = "abs", ne_out = "net.htnet";
  std::size_t ne_d = 1, ne_k = 4;
  double ne_delta2 = 0.1, ne_delta = 0.01;
  net_export->add_option("--kind", ne_kind, "identity|abs|min|max|sup-norm|bump|step")->required();
  net_export->add_option("--out", ne_out, "output path")->required();
  net_export->add_option("--d", ne_d, "dimension (sup-norm/bump)");
  net_export->add_option("--k", ne_k, "pieces (step)");
  net_export->add_option("--delta", ne_delta, "step sliver");
  net_export->add_option("--delta2", ne_delta2, "bump radius");
  auto* net_import = net->add_subcommand("import", "parse a network file and print its summary");
  std::string ni_in, ni_reexport;
  net_import->add_option("--in", ni_in, "input path")->required();
  net_import->add_option("--reexport", ni_reexport, "write the parsed network back out");

  // ---- approx builders
  auto* approx = app.add_subcommand("approx", "constructive approximators");
  auto* bp = approx->add_subcommand("build-piecewise", "piecewise-constant network");
  std::size_t bp_d = 1, bp_n = 2, bp_l = 2;
  double bp_delta = 0.01, bp_eps = 0.0625;
  std::string bp_values, bp_out = "piecewise.htnet", bp_report, bp_variant;
  std::uint64_t bp_seed = 1;
  bp->add_option("--d", bp_d, "dimension");
  bp->add_option("--n", bp_n, "width parameter N")->required();
  bp->add_option("--l", bp_l, "depth parameter L")->required();
  bp->add_option("--delta", bp_delta, "grid sliver Delta");
  bp->add_option("--eps", bp_eps, "target accuracy");
  bp->add_option("--variant", bp_variant, "series|parallel")->required();
  bp->add_option("--values", bp_values, "comma-separated cell values in [0,1]; random if omitted");
  bp->add_option("--seed", bp_seed, "seed for random values/report sweep");
  bp->add_option("--out", bp_out, "network file");
  bp->add_option("--report", bp_report, "JSON contract report path");

  auto* bs = approx->add_subcommand("build-spike", "spike-fitting network");
  std::size_t bs_d = 1, bs_n = 2, bs_l = 2, bs_count = 6;
  double bs_delta1 = 0.002, bs_delta2 = 0.01, bs_u = 0.0884;
  std::string bs_out = "spike.htnet", bs_report, bs_variant;
  std::uint64_t bs_seed = 1;
  bs->add_option("--d", bs_d, "dimension");
  bs->add_option("--n", bs_n, "width parameter N")->required();
  bs->add_option("--l", bs_l, "depth parameter L")->required();
  bs->add_option("--delta1", bs_delta1, "grid sliver Delta_1");
  bs->add_option("--delta2", bs_delta2, "bump radius Delta_2");
  bs->add_option("--u", bs_u, "plateau level in [-1,1]");
  bs->add_option("--count", bs_count, "number of random +-1 anchors");
  bs->add_option("--seed", bs_seed, "anchor seed");
  bs->add_option("--variant", bs_variant, "series|parallel")->required();
  bs->add_option("--out", bs_out, "network file");
  bs->add_option("--report", bs_report, "JSON contract report path");

  // ---- train
  auto* tr = app.add_subcommand("train", "fit a truncated ReLU net by approximate ERM");
  std::string tr_config, tr_out, tr_net_out;
  tr->add_option("--config", tr_config, "TOML config")->required();
  tr->add_option("--out", tr_out, "JSON training report path");
  tr->add_option("--net-out", tr_net_out, "fitted network file path");

  // ---- experiments
  auto* exp = app.add_subcommand("exp", "experiment drivers");
  std::string exp_config, exp_out = "exp";
  std::uint64_t exp_seed = 0;
  std::size_t exp_threads = 1;
  std::string exp_kind;
  for (const char* name : {"rate", "bias", "lowerbound", "convexity"}) {
    auto* sub = exp->add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", exp_config, "TOML config");
    sub->add_option("--out", exp_out, "output path prefix");
    sub->add_option("--seed", exp_seed, "master seed override");
    sub->add_option("--threads", exp_threads, "worker threads");
    sub->callback([name, &exp_kind] { exp_kind = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (sched_show->parsed()) return cmd_schedule(sh_n, sh_p, sh_gamma, sh_regime, sh_ctau, sh_cnl);

    if (net_export->parsed()) {
      htreg::Network out = [&]() -> htreg::Network {
        if (ne_kind == "identity") return htreg::build_identity();
        if (ne_kind == "abs") return htreg::build_abs();
        if (ne_kind == "min") return htreg::build_min();
        if (ne_kind == "max") return htreg::build_max();
        if (ne_kind == "sup-norm") return htreg::build_sup_norm(ne_d);
        if (ne_kind == "bump") return htreg::build_bump(ne_d, ne_delta2);
        if (ne_kind == "step") return htreg::build_step(ne_k, ne_delta);
        throw std::runtime_error("unknown kind '" + ne_kind + "'");
      }();
      write_file(ne_out, htreg::serialize(out));
      std::cout << net_info(out).dump(2) << "\n";
      return 0;
    }
    if (net_import->parsed()) {
      const htreg::Network parsed = htreg::deserialize(read_file(ni_in));
      if (!ni_reexport.empty()) write_file(ni_reexport, htreg::serialize(parsed));
      std::cout << net_info(parsed).dump(2) << "\n";
      return 0;
    }

    if (bp->parsed()) {
      const htreg::FitVariant variant = bp_variant == "series" ? htreg::FitVariant::series
                                                               : htreg::FitVariant::parallel;
      if (bp_variant != "series" && bp_variant != "parallel")
        throw std::runtime_error("--variant must be series or parallel");
      const auto m = static_cast<std::size_t>(std::floor(std::pow(double(bp_n), 1.0 / double(bp_d))));
      const auto lr = static_cast<std::size_t>(std::floor(std::pow(double(bp_l), 1.0 / double(bp_d))));
      const std::size_t k = m * m * lr * lr;
      htreg::GridSpec grid(bp_d, k, bp_delta);
      std::vector<double> values;
      if (!bp_values.empty()) {
        std::istringstream ss(bp_values);
        std::string tok;
        while (std::getline(ss, tok, ',')) values.push_back(std::stod(tok));
      } else {
        htreg::Rng rng(bp_seed);
        values.resize(grid.cell_count());
        for (auto& v : values) v = rng.uniform();
      }
      const htreg::Network netv =
          htreg::build_piecewise_constant(grid, values, bp_eps, bp_n, bp_l, variant);
      write_file(bp_out, htreg::serialize(netv));
      json rep = contract_report(netv, grid, values, bp_seed + 17);
      rep["eps"] = bp_eps;
      rep["variant"] = bp_variant;
      if (!bp_report.empty()) write_file(bp_report, rep.dump(2));
      std::cout << rep.dump(2) << "\n";
      return 0;
    }
    if (bs->parsed()) {
      const htreg::FitVariant variant = bs_variant == "series" ? htreg::FitVariant::series
                                                               : htreg::FitVariant::parallel;
      if (bs_variant != "series" && bs_variant != "parallel")
        throw std::runtime_error("--variant must be series or parallel");
      const auto m = static_cast<std::size_t>(std::floor(std::pow(double(bs_n), 1.0 / double(bs_d))));
      const auto lr = static_cast<std::size_t>(std::floor(std::pow(double(bs_l), 1.0 / double(bs_d))));
      const std::size_t k = m * m * lr * lr;
      htreg::GridSpec grid(bs_d, k, bs_delta1);
      htreg::Rng rng(bs_seed);
      std::vector<htreg::SpikePoint> pts;
      std::vector<std::size_t> cells(grid.cell_count());
      for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = i;
      for (std::size_t i = cells.size(); i > 1; --i)
        std::swap(cells[i - 1], cells[static_cast<std::size_t>(rng.uniform() * i)]);
      const std::size_t take = std::min<std::size_t>(bs_count, cells.size());
      for (std::size_t i = 0; i < take; ++i) {
        htreg::SpikePoint pt;
        pt.alpha = grid.unflatten(cells[i]);
        pt.x.resize(bs_d);
        for (std::size_t c = 0; c < bs_d; ++c) {
          const double lo = double(pt.alpha[c] - 1) / double(k);
          const double hi = (pt.alpha[c] < k) ? double(pt.alpha[c]) / double(k) - bs_delta1 : 1.0;
          pt.x[c] = lo + (hi - lo) * rng.uniform();
        }
        pt.y = rng.uniform() < 0.5 ? -1.0 : 1.0;
        pts.push_back(pt);
      }
      htreg::SpikeSpec sp(grid, bs_delta2, pts, bs_u);
      htreg::SpikeBuildReport sizes;
      const htreg::Network netv = htreg::build_spike_fitter(sp, bs_n, bs_l, variant, &sizes);
      write_file(bs_out, htreg::serialize(netv));
      json rep;
      rep["sizes"] = net_info(netv);
      rep["variant"] = bs_variant;
      rep["anchors"] = take;
      rep["measured_constants"] = {{"c_depth", sizes.c_depth}, {"c_width", sizes.c_width}};
      double max_anchor_err = 0.0;
      for (const auto& pt : pts)
        max_anchor_err = std::max(max_anchor_err, std::abs(netv.evaluate_scalar(pt.x) - pt.y));
      rep["max_anchor_error"] = max_anchor_err;
      if (!bs_report.empty()) write_file(bs_report, rep.dump(2));
      std::cout << rep.dump(2) << "\n";
      return 0;
    }

    if (tr->parsed()) {
      const htreg::TomlDoc doc = htreg::TomlDoc::parse(read_file(tr_config));
      std::size_t dim = static_cast<std::size_t>(doc.get_int("data.d", 0));
      auto f0 = htreg::f0_by_name(doc.get_string("data.f0", "zero"), &dim);
      const htreg::NoiseModel model =
          doc.has("noise.kind") ? noise_from_toml(doc, "noise") : htreg::NoiseModel::gaussian(1.0);
      const auto n = static_cast<std::size_t>(doc.get_int("data.n", 512));
      const auto seed = static_cast<std::uint64_t>(doc.get_int("data.seed", 1));
      const htreg::Dataset data = htreg::make_dataset(f0, dim, n, model, seed);
      htreg::TrainConfig tc;
      tc.depth = static_cast<std::size_t>(doc.get_int("arch.depth", 2));
      tc.width = static_cast<std::size_t>(doc.get_int("arch.width", 8));
      const double tau = doc.get_double("loss.tau", 0.0);
      const std::string kind = doc.get_string("loss.kind", tau > 0.0 ? "huber" : "squared");
      tc.loss = htreg::HuberConfig(kind == "squared" || tau <= 0.0 ? htreg::kInfTau : tau,
                                   doc.get_double("loss.M", 1.0),
                                   kind == "squared" ? htreg::LossKind::squared : htreg::LossKind::huber);
      tc.opt.epochs = static_cast<std::size_t>(doc.get_int("optimizer.epochs", 200));
      tc.opt.lr = doc.get_double("optimizer.lr", 0.02);
      tc.opt.batch = static_cast<std::size_t>(doc.get_int("optimizer.batch", 0));
      tc.restarts = static_cast<std::size_t>(doc.get_int("optimizer.restarts", 3));
      tc.seed = static_cast<std::uint64_t>(doc.get_int("optimizer.seed", 1));
      auto [fit, rep] = htreg::train(data, tc);
      json j;
      j["final_risk"] = rep.final_risk;
      j["delta_opt"] = rep.delta_opt;
      j["grad_norm"] = rep.grad_norm;
      j["wall_ms"] = rep.wall_ms;
      j["risk_trace"] = rep.risk_trace;
      const htreg::L2Estimate l2 =
          htreg::l2_error(fit, f0, static_cast<std::size_t>(doc.get_int("report.mc_budget", 20000)),
                          htreg::Rng::derive(seed, 9));
      j["l2_error"] = l2.value;
      j["l2_se"] = l2.se;
      if (!tr_net_out.empty()) write_file(tr_net_out, htreg::serialize(fit.inner));
      const std::string text = j.dump(2);
      if (!tr_out.empty()) write_file(tr_out, text);
      std::cout << text << "\n";
      return 0;
    }

    if (!exp_kind.empty()) {
      htreg::ExperimentSpec spec;
      if (!exp_config.empty()) spec = spec_from_toml(htreg::TomlDoc::parse(read_file(exp_config)));
      if (exp_seed != 0) spec.master_seed = exp_seed;
      spec.threads = exp_threads;
      htreg::ExperimentResult res;
      if (exp_kind == "rate") {
        spec.experiment = "rate_sweep";
        res = htreg::run_rate_sweep(spec);
        std::vector<htreg::ChartSeries> series;
        for (htreg::Regime r : spec.regimes) {
          const auto& jr = res.summary["regimes"][htreg::to_string(r)];
          htreg::ChartSeries s;
          s.label = htreg::to_string(r);
          for (const auto& v : jr["n"]) s.x.push_back(v.get<double>());
          for (const auto& v : jr["median_l2"]) s.y.push_back(v.get<double>());
          series.push_back(std::move(s));
        }
        write_file(exp_out + "_chart.svg",
                   htreg::svg_loglog_chart("median L2 error vs n", "n", "L2 error", series));
      } else if (exp_kind == "bias") {
        if (!exp_config.empty() && spec.model.symmetric())
          throw std::runtime_error("bias demo needs an asymmetric noise model");
        if (exp_config.empty()) spec.model = htreg::NoiseModel::three_point_bias(spec.p, 8.0);
        res = htreg::run_bias_demo(spec);
        htreg::ChartSeries analytic, floor_s;
        analytic.label = "analytic |Delta_tau|";
        floor_s.label = "floor 2^{-p-1} tau^{1-p}";
        for (const auto& pt : res.summary["analytic"]) {
          analytic.x.push_back(pt["tau"].get<double>());
          analytic.y.push_back(std::abs(pt["delta_tau"].get<double>()));
          floor_s.x.push_back(pt["tau"].get<double>());
          floor_s.y.push_back(pt["floor"].get<double>());
        }
        write_file(exp_out + "_chart.svg",
                   htreg::svg_loglog_chart("Huberization bias vs tau", "tau", "bias",
                                           {analytic, floor_s}));
      } else if (exp_kind == "lowerbound") {
        htreg::Network last = htreg::build_identity();
        res = htreg::run_lowerbound_demo(spec, &last);
        write_file(exp_out + "_spike.htnet", htreg::serialize(last));
      } else {
        std::vector<htreg::NoiseModel> models = {
            htreg::NoiseModel::gaussian(1.0),
            htreg::NoiseModel::symmetric_two_point(1.0),
            htreg::NoiseModel::three_point_bias(spec.p, 8.0),
        };
        res = htreg::run_convexity_audit(spec, models);
      }
      write_file(exp_out + ".csv", htreg::rows_to_csv(res.rows));
      write_file(exp_out + ".json", res.summary.dump(2));
      std::cout << res.summary.dump(2) << "\n";
      if (res.hard_failure) {
        std::cerr << "hard assertion failure in experiment\n";
        return 2;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
