#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "htreg/dataset.hpp"
#include "htreg/loss.hpp"
#include "htreg/net.hpp"
#include "htreg/rng.hpp"

namespace htreg {

/// Flat-parameter MLP over F_n(d, depth, width, M): `depth` hidden ReLU
/// layers of `width` units, scalar output, truncated at M during the loss.
/// Parameters are stored flat so the optimizer and the finite-difference
/// tests can treat them as one vector.
struct Mlp {
  std::size_t d = 1;
  std::size_t depth = 2;
  std::size_t width = 8;
  std::vector<double> params;

  Mlp(std::size_t d_, std::size_t depth_, std::size_t width_) : d(d_), depth(depth_), width(width_) {
    if (depth < 1 || width < 1) contract_violation("Mlp: depth and width must be >= 1");
    params.assign(param_count(), 0.0);
  }

  std::size_t param_count() const {
    std::size_t c = width * d + width;                       // input layer
    c += (depth - 1) * (width * width + width);              // hidden layers
    c += width + 1;                                          // output layer
    return c;
  }

  // layer l in [0, depth]: weight block then bias block
  std::size_t layer_offset(std::size_t l) const {
    if (l == 0) return 0;
    std::size_t off = width * d + width;
    if (l >= 1) off += (l - 1) * (width * width + width);
    return off;
  }
  std::size_t layer_in(std::size_t l) const { return l == 0 ? d : width; }
  std::size_t layer_out(std::size_t l) const { return l == depth ? 1 : width; }

  void init_fan_in(Rng& rng) {
    for (std::size_t l = 0; l <= depth; ++l) {
      const std::size_t in = layer_in(l), out = layer_out(l);
      double* w = &params[layer_offset(l)];
      const double scale = std::sqrt(2.0 / static_cast<double>(in));
      for (std::size_t i = 0; i < out * in; ++i) w[i] = scale * rng.normal();
      for (std::size_t i = 0; i < out; ++i) w[out * in + i] = 0.0;
    }
  }

  /// Forward pass; when `cache` is given, stores the post-activation vector
  /// of every layer (input first) for backprop.
  double forward(const double* x, std::vector<std::vector<double>>* cache = nullptr) const {
    std::vector<double> cur(x, x + d), next;
    if (cache) {
      cache->clear();
      cache->push_back(cur);
    }
    for (std::size_t l = 0; l <= depth; ++l) {
      const std::size_t in = layer_in(l), out = layer_out(l);
      const double* w = &params[layer_offset(l)];
      const double* b = w + out * in;
      next.assign(out, 0.0);
      for (std::size_t i = 0; i < out; ++i) {
        double acc = b[i];
        const double* wi = w + i * in;
        for (std::size_t j = 0; j < in; ++j) acc += wi[j] * cur[j];
        next[i] = (l < depth && acc < 0.0) ? 0.0 : acc;
      }
      cur.swap(next);
      if (cache && l < depth) cache->push_back(cur);
    }
    return cur[0];
  }

  /// Network view of the current parameters (for serialization and the
  /// shared evaluation path).
  Network to_network() const {
    std::vector<AffineLayer> layers;
    for (std::size_t l = 0; l <= depth; ++l) {
      const std::size_t in = layer_in(l), out = layer_out(l);
      AffineLayer al(out, in);
      const double* w = &params[layer_offset(l)];
      for (std::size_t i = 0; i < out * in; ++i) al.w[i] = w[i];
      for (std::size_t i = 0; i < out; ++i) al.b[i] = w[out * in + i];
      layers.push_back(std::move(al));
    }
    return Network(std::move(layers));
  }
};

struct OptimizerConfig {
  double lr = 0.02;
  std::size_t epochs = 200;
  std::size_t batch = 0;  // 0 = full batch
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  bool cosine = true;
};

struct TrainConfig {
  std::size_t depth = 2;  // hidden layers L-bar
  std::size_t width = 8;  // N-bar
  HuberConfig loss;
  OptimizerConfig opt;
  std::size_t restarts = 3;
  std::uint64_t seed = 1;
};

struct TrainReport {
  double final_risk = 0.0;
  std::vector<double> risk_trace;  // per epoch, selected restart
  double delta_opt = 0.0;          // final risk minus best risk seen anywhere
  double grad_norm = 0.0;
  double wall_ms = 0.0;
  std::size_t restarts = 0;
};

namespace detail {

/// Accumulates the analytic gradient of the empirical Huber risk over the
/// given sample indices. Subgradient conventions: ReLU'(0) = 0 and the
/// truncation is pass-through on [-M, M], zero outside.
inline void accumulate_gradient(const Mlp& net, const Dataset& data, const HuberConfig& cfg,
                                const std::size_t* idx, std::size_t count,
                                std::vector<double>& grad) {
  grad.assign(net.params.size(), 0.0);
  const double tau = cfg.effective_tau();
  const double m = cfg.level;
  std::vector<std::vector<double>> acts;
  std::vector<double> delta, delta_next;
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t i = idx ? idx[s] : s;
    const double o = net.forward(&data.X[i * data.d], &acts);
    const double to = std::clamp(o, -m, m);
    const double r = data.Y[i] - to;
    double dout = -huber_score(r, tau);
    if (o < -m || o > m) dout = 0.0;  // truncation kills the gradient outside
    delta.assign(1, dout);
    for (std::size_t l = net.depth + 1; l-- > 0;) {
      const std::size_t in = net.layer_in(l), out = net.layer_out(l);
      const double* w = &net.params[net.layer_offset(l)];
      double* gw = &grad[net.layer_offset(l)];
      const std::vector<double>& a = acts[l];
      for (std::size_t r2 = 0; r2 < out; ++r2) {
        const double dl = delta[r2];
        if (dl == 0.0) continue;
        double* gwr = gw + r2 * in;
        for (std::size_t j = 0; j < in; ++j) gwr[j] += dl * a[j];
        gw[out * in + r2] += dl;
      }
      if (l == 0) break;
      delta_next.assign(in, 0.0);
      for (std::size_t j = 0; j < in; ++j) {
        if (a[j] <= 0.0) continue;  // ReLU' = 1{z > 0}; acts store post-ReLU
        double acc = 0.0;
        for (std::size_t r2 = 0; r2 < out; ++r2) acc += w[r2 * in + j] * delta[r2];
        delta_next[j] = acc;
      }
      delta.swap(delta_next);
    }
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (double& g : grad) g *= inv;
}

}  // namespace detail

/// Analytic gradient of the full-sample empirical risk w.r.t. all weights
/// and biases (flat, same layout as Mlp::params).
inline std::vector<double> gradient(const Mlp& net, const Dataset& data, const HuberConfig& cfg) {
  if (data.n == 0) contract_violation("gradient: empty dataset");
  if (data.d != net.d) contract_violation("gradient: dataset dim != network input dim");
  std::vector<double> g;
  detail::accumulate_gradient(net, data, cfg, nullptr, data.n, g);
  return g;
}

inline double empirical_risk_mlp(const Mlp& net, const Dataset& data, const HuberConfig& cfg) {
  const double tau = cfg.effective_tau();
  double acc = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    const double o = std::clamp(net.forward(&data.X[i * data.d]), -cfg.level, cfg.level);
    acc += huber_loss(data.Y[i] - o, tau);
  }
  return acc / static_cast<double>(data.n);
}

/// Approximate empirical risk minimization over F_n(d, depth, width, M):
/// Adam with a cosine step schedule, multiple restarts, best-risk selection.
/// delta_opt is measured (final selected risk minus the best risk observed
/// across all restarts and epochs), matching the approximate-minimizer
/// framing: the bound is conditional on whatever optimization error the
/// run achieved. Deterministic for a fixed seed.
inline std::pair<TruncatedNetwork, TrainReport> train(const Dataset& data, const TrainConfig& tc) {
  if (data.n == 0) contract_violation("train: empty dataset");
  const auto t0 = std::chrono::steady_clock::now();

  Mlp best(data.d, tc.depth, tc.width);
  TrainReport report;
  report.restarts = tc.restarts;
  double best_final = std::numeric_limits<double>::infinity();
  double best_seen = std::numeric_limits<double>::infinity();
  std::vector<double> best_trace;

  const std::size_t nb = tc.opt.batch == 0 ? data.n : tc.opt.batch;
  std::vector<std::size_t> order(data.n);
  for (std::size_t i = 0; i < data.n; ++i) order[i] = i;

  for (std::size_t rs = 0; rs < std::max<std::size_t>(1, tc.restarts); ++rs) {
    Rng rng(Rng::derive(tc.seed, 0x7261696e, rs));
    Mlp net(data.d, tc.depth, tc.width);
    net.init_fan_in(rng);
    std::vector<double> mom(net.params.size(), 0.0), vel(net.params.size(), 0.0), grad;
    std::vector<double> trace;
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < tc.opt.epochs; ++epoch) {
      // deterministic shuffle for minibatch mode
      if (nb < data.n)
        for (std::size_t i = data.n; i > 1; --i)
          std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform() * i)]);
      const double sched =
          tc.opt.cosine
              ? 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(epoch) /
                                      std::max<double>(1.0, static_cast<double>(tc.opt.epochs))))
              : 1.0;
      for (std::size_t off = 0; off < data.n; off += nb) {
        const std::size_t cnt = std::min(nb, data.n - off);
        detail::accumulate_gradient(net, data, tc.loss, order.data() + off, cnt, grad);
        ++step;
        const double bc1 = 1.0 - std::pow(tc.opt.beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(tc.opt.beta2, static_cast<double>(step));
        const double lr = tc.opt.lr * sched;
        for (std::size_t k = 0; k < net.params.size(); ++k) {
          mom[k] = tc.opt.beta1 * mom[k] + (1.0 - tc.opt.beta1) * grad[k];
          vel[k] = tc.opt.beta2 * vel[k] + (1.0 - tc.opt.beta2) * grad[k] * grad[k];
          net.params[k] -= lr * (mom[k] / bc1) / (std::sqrt(vel[k] / bc2) + tc.opt.adam_eps);
        }
      }
      const double risk = empirical_risk_mlp(net, data, tc.loss);
      if (!std::isfinite(risk))
        throw std::runtime_error("train: non-finite empirical risk at epoch " +
                                 std::to_string(epoch) + " (restart " + std::to_string(rs) + ")");
      trace.push_back(risk);
      best_seen = std::min(best_seen, risk);
    }
    const double final_risk = trace.empty() ? empirical_risk_mlp(net, data, tc.loss) : trace.back();
    if (final_risk < best_final) {
      best_final = final_risk;
      best = net;
      best_trace = trace;
    }
  }

  report.final_risk = best_final;
  report.risk_trace = std::move(best_trace);
  report.delta_opt = best_final - best_seen;
  {
    std::vector<double> g = gradient(best, data, tc.loss);
    double s = 0.0;
    for (double v : g) s += v * v;
    report.grad_norm = std::sqrt(s);
  }
  report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return {truncate(best.to_network(), tc.loss.level), report};
}

/// Monte Carlo L2 distance || f - f0 ||_2 over Uniform[0,1]^d with a
/// delta-method standard error; deterministic per seed.
struct L2Estimate {
  double value = 0.0;
  double se = 0.0;
};

inline L2Estimate l2_error(const std::function<double(const std::vector<double>&)>& f,
                           const std::function<double(const std::vector<double>&)>& f0,
                           std::size_t d, std::size_t budget, std::uint64_t seed) {
  if (budget < 1000) contract_violation("l2_error: budget must be >= 1e3");
  Rng rng(seed);
  std::vector<double> x(d);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < budget; ++i) {
    for (auto& v : x) v = rng.uniform();
    const double diff = f(x) - f0(x);
    const double sq = diff * diff;
    const double d1 = sq - mean;
    mean += d1 / static_cast<double>(i + 1);
    m2 += d1 * (sq - mean);
  }
  const double var_mean = m2 / static_cast<double>(budget - 1) / static_cast<double>(budget);
  const double value = std::sqrt(mean);
  const double se = value > 1e-12 ? 0.5 * std::sqrt(var_mean) / value : std::sqrt(std::sqrt(var_mean));
  return {value, se};
}

inline L2Estimate l2_error(const TruncatedNetwork& f,
                           const std::function<double(const std::vector<double>&)>& f0,
                           std::size_t budget, std::uint64_t seed) {
  return l2_error([&](const std::vector<double>& x) { return evaluate_truncated(f, x); }, f0,
                  f.inner.input_dim(), budget, seed);
}

}  // namespace htreg
