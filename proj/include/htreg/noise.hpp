#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "htreg/dataset.hpp"
#include "htreg/net.hpp"
#include "htreg/rng.hpp"

namespace htreg {

/// Sampleable, moment-auditable noise distributions, covering both
/// adversarial lower-bound constructions plus standard test models.
/// Discrete models keep their atoms/probabilities in closed form (the
/// parameters used in tests make them exact dyadics), so mean-zero and
/// moment identities audit exactly.
class NoiseModel {
 public:
  enum class Kind {
    trinomial_spike,     // +-(n/S)^{1/p} w.p. S/2n each, else 0
    three_point_bias,    // -1 w.p. theta, 2*tau w.p. theta/(2 tau), else 0
    symmetric_two_point, // +-a w.p. 1/2
    gaussian,            // N(0, sigma^2)
    symmetric_pareto,    // sign * scale * U^{-1/p_tail}
    custom_discrete,
  };

  static NoiseModel trinomial_spike(std::size_t n, std::size_t s, double p) {
    if (s < 1 || s > n) contract_violation("trinomial_spike: need 1 <= S <= n");
    if (!(p >= 1.0)) contract_violation("trinomial_spike: p must be >= 1");
    NoiseModel m;
    m.kind_ = Kind::trinomial_spike;
    m.p_order_ = p;
    m.symmetric_ = true;
    const double spike = std::pow(static_cast<double>(n) / static_cast<double>(s), 1.0 / p);
    const double pr = static_cast<double>(s) / (2.0 * static_cast<double>(n));
    m.atoms_ = {-spike, 0.0, spike};
    m.probs_ = {pr, 1.0 - 2.0 * pr, pr};
    m.name_ = "trinomial_spike(n=" + std::to_string(n) + ",S=" + std::to_string(s) + ")";
    return m;
  }

  static NoiseModel three_point_bias(double p, double tau) {
    if (!(p >= 1.0)) contract_violation("three_point_bias: p must be >= 1");
    if (!(tau >= 1.0)) contract_violation("three_point_bias: tau must be >= 1");
    NoiseModel m;
    m.kind_ = Kind::three_point_bias;
    m.p_order_ = p;
    m.symmetric_ = false;
    const double theta = std::pow(2.0, -p) * std::pow(tau, 1.0 - p);
    m.atoms_ = {-1.0, 0.0, 2.0 * tau};
    m.probs_ = {theta, 1.0 - theta * (1.0 + 1.0 / (2.0 * tau)), theta / (2.0 * tau)};
    m.name_ = "three_point_bias(p=" + std::to_string(p) + ",tau=" + std::to_string(tau) + ")";
    m.theta_ = theta;
    m.tau_param_ = tau;
    return m;
  }

  static NoiseModel symmetric_two_point(double a) {
    if (!(a > 0.0)) contract_violation("symmetric_two_point: a must be > 0");
    NoiseModel m;
    m.kind_ = Kind::symmetric_two_point;
    m.p_order_ = 2.0;
    m.symmetric_ = true;
    m.atoms_ = {-a, a};
    m.probs_ = {0.5, 0.5};
    m.name_ = "symmetric_two_point(" + std::to_string(a) + ")";
    return m;
  }

  static NoiseModel gaussian(double sigma) {
    if (!(sigma > 0.0)) contract_violation("gaussian: sigma must be > 0");
    NoiseModel m;
    m.kind_ = Kind::gaussian;
    m.p_order_ = 2.0;
    m.symmetric_ = true;
    m.sigma_ = sigma;
    m.name_ = "gaussian(" + std::to_string(sigma) + ")";
    return m;
  }

  static NoiseModel symmetric_pareto(double p_tail, double scale) {
    if (!(p_tail > 1.0)) contract_violation("symmetric_pareto: p_tail must be > 1");
    if (!(scale > 0.0)) contract_violation("symmetric_pareto: scale must be > 0");
    NoiseModel m;
    m.kind_ = Kind::symmetric_pareto;
    m.p_order_ = p_tail;
    m.symmetric_ = true;
    m.p_tail_ = p_tail;
    m.scale_ = scale;
    m.name_ = "symmetric_pareto(p=" + std::to_string(p_tail) + ",scale=" + std::to_string(scale) + ")";
    return m;
  }

  static NoiseModel custom_discrete(std::vector<double> atoms, std::vector<double> probs,
                                    double p_order = 2.0) {
    if (atoms.empty() || atoms.size() != probs.size())
      contract_violation("custom_discrete: atoms/probs size mismatch");
    double psum = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (probs[i] < 0.0) contract_violation("custom_discrete: negative probability");
      psum += probs[i];
      mean += probs[i] * atoms[i];
    }
    if (std::abs(psum - 1.0) > 1e-12) contract_violation("custom_discrete: probabilities must sum to 1");
    if (std::abs(mean) > 1e-12) contract_violation("custom_discrete: mean must be 0");
    NoiseModel m;
    m.kind_ = Kind::custom_discrete;
    m.p_order_ = p_order;
    m.atoms_ = std::move(atoms);
    m.probs_ = std::move(probs);
    m.symmetric_ = m.check_atom_symmetry();
    m.name_ = "custom_discrete";
    return m;
  }

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  bool discrete() const { return !atoms_.empty(); }
  bool symmetric() const { return symmetric_; }
  double p_order() const { return p_order_; }
  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& probs() const { return probs_; }

  /// sum_i p_i a_i for discrete models (exact audit target).
  double mean_discrete() const {
    double m = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) m += probs_[i] * atoms_[i];
    return m;
  }

  /// E|eps|^q: exact atom sums for discrete kinds, closed forms for the
  /// continuous ones. Throws on divergent moments rather than returning NaN.
  double moment(double q) const {
    if (!(q >= 1.0)) contract_violation("moment: q must be >= 1");
    if (discrete()) {
      double acc = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i)
        if (atoms_[i] != 0.0) acc += probs_[i] * pow_abs(atoms_[i], q);
      return acc;
    }
    if (kind_ == Kind::gaussian) {
      // E|Z|^q = sigma^q 2^{q/2} Gamma((q+1)/2) / sqrt(pi)
      const double log_m = q * std::log(sigma_) + 0.5 * q * std::log(2.0) +
                           std::lgamma(0.5 * (q + 1.0)) - 0.5 * std::log(M_PI);
      return std::exp(log_m);
    }
    // symmetric pareto: E|eps|^q = p_tail scale^q / (p_tail - q), q < p_tail
    if (!(q < p_tail_))
      throw std::domain_error("moment: E|eps|^" + std::to_string(q) + " diverges for " + name_);
    return p_tail_ * std::pow(scale_, q) / (p_tail_ - q);
  }

  /// Density for the continuous kinds (used by quadrature).
  double density(double x) const {
    if (kind_ == Kind::gaussian) {
      const double z = x / sigma_;
      return std::exp(-0.5 * z * z) / (sigma_ * std::sqrt(2.0 * M_PI));
    }
    if (kind_ == Kind::symmetric_pareto) {
      const double a = std::abs(x);
      if (a < scale_) return 0.0;
      return 0.5 * p_tail_ * std::pow(scale_ / a, p_tail_) / a;
    }
    contract_violation("density: discrete model");
    return 0.0;
  }

  /// P(eps <= x) for the continuous kinds.
  double cdf(double x) const {
    if (kind_ == Kind::gaussian) return 0.5 * std::erfc(-x / (sigma_ * std::sqrt(2.0)));
    if (kind_ == Kind::symmetric_pareto) {
      if (x <= -scale_) return 0.5 * std::pow(scale_ / -x, p_tail_);
      if (x >= scale_) return 1.0 - 0.5 * std::pow(scale_ / x, p_tail_);
      return 0.5;
    }
    contract_violation("cdf: discrete model");
    return 0.0;
  }

  double sample_one(Rng& rng) const {
    switch (kind_) {
      case Kind::gaussian:
        return sigma_ * rng.normal();
      case Kind::symmetric_pareto: {
        double u = rng.uniform();
        while (u == 0.0) u = rng.uniform();
        const double mag = scale_ * std::pow(u, -1.0 / p_tail_);
        return rng.uniform() < 0.5 ? -mag : mag;
      }
      default: {
        const double u = rng.uniform();
        double c = 0.0;
        for (std::size_t i = 0; i + 1 < atoms_.size(); ++i) {
          c += probs_[i];
          if (u < c) return atoms_[i];
        }
        return atoms_.back();
      }
    }
  }

  std::vector<double> sample(std::size_t count, std::uint64_t seed) const {
    if (count < 1) contract_violation("sample: count must be >= 1");
    Rng rng(seed);
    std::vector<double> out(count);
    for (auto& v : out) v = sample_one(rng);
    return out;
  }

  /// Closed-form parameters of the asymmetric construction, when applicable.
  double theta_param() const { return theta_; }
  double tau_param() const { return tau_param_; }

 private:
  NoiseModel() = default;

  bool check_atom_symmetry() const {
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      bool found = false;
      for (std::size_t j = 0; j < atoms_.size(); ++j)
        if (atoms_[j] == -atoms_[i] && std::abs(probs_[j] - probs_[i]) <= 1e-15) found = true;
      if (!found) return false;
    }
    return true;
  }

  static double pow_abs(double a, double q) {
    const double qa = std::abs(a);
    const auto qi = static_cast<long long>(q);
    if (static_cast<double>(qi) == q && qi <= 64) {
      double r = 1.0;
      for (long long i = 0; i < qi; ++i) r *= qa;
      return r;
    }
    return std::pow(qa, q);
  }

  Kind kind_ = Kind::gaussian;
  std::string name_;
  double p_order_ = 2.0;
  bool symmetric_ = true;
  std::vector<double> atoms_;
  std::vector<double> probs_;
  double sigma_ = 1.0;
  double p_tail_ = 2.0;
  double scale_ = 1.0;
  double theta_ = 0.0;
  double tau_param_ = 0.0;
};

/// Y = f0(X) + eps with X ~ Uniform[0,1]^d i.i.d. and eps independent of X.
inline Dataset make_dataset(const std::function<double(const std::vector<double>&)>& f0,
                            std::size_t d, std::size_t n, const NoiseModel& model,
                            std::uint64_t seed) {
  if (n < 1) contract_violation("make_dataset: n must be >= 1");
  Dataset data(n, d);
  Rng rng(seed);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double u = rng.uniform();
      data.x(i, j) = u;
      x[j] = u;
    }
    data.Y[i] = f0(x) + model.sample_one(rng);
  }
  return data;
}

}  // namespace htreg
