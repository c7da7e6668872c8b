#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "htreg/dataset.hpp"
#include "htreg/net.hpp"

namespace htreg {

constexpr double kInfTau = std::numeric_limits<double>::infinity();

/// Huber loss: x^2/2 for |x| <= tau, tau|x| - tau^2/2 beyond. tau = infinity
/// is the squared loss x^2/2.
inline double huber_loss(double x, double tau) {
  if (!(tau > 0.0)) contract_violation("huber_loss: tau must be > 0");
  const double a = std::abs(x);
  if (a <= tau) return 0.5 * x * x;
  return tau * a - 0.5 * tau * tau;
}

/// Huber score psi_tau(x) = clamp(x, -tau, tau) = d/dx huber_loss.
inline double huber_score(double x, double tau) {
  if (!(tau > 0.0)) contract_violation("huber_score: tau must be > 0");
  return std::clamp(x, -tau, tau);
}

enum class LossKind { huber, squared };

/// (tau, M, loss kind) bundle defining the empirical risk being minimized.
/// squared is definitionally Huber with tau = infinity.
struct HuberConfig {
  double tau = kInfTau;
  double level = 1.0;  // truncation level M
  LossKind kind = LossKind::huber;

  HuberConfig() = default;
  HuberConfig(double t, double m, LossKind k) : tau(t), level(m), kind(k) {
    if (!(tau > 0.0)) contract_violation("HuberConfig: tau must be > 0");
    if (!(level >= 1.0)) contract_violation("HuberConfig: M must be >= 1");
  }

  double effective_tau() const { return kind == LossKind::squared ? kInfTau : tau; }
};

/// Empirical Huber risk (1/n) sum_i l_tau(Y_i - f(X_i)) of a truncated net.
inline double empirical_risk(const TruncatedNetwork& f, const Dataset& data,
                             const HuberConfig& cfg) {
  if (data.n == 0) contract_violation("empirical_risk: empty dataset");
  if (data.d != f.inner.input_dim())
    contract_violation("empirical_risk: dataset dim != network input dim");
  const double tau = cfg.effective_tau();
  double acc = 0.0;
  std::vector<double> x(data.d);
  for (std::size_t i = 0; i < data.n; ++i) {
    data.row(i, x);
    acc += huber_loss(data.Y[i] - evaluate_truncated(f, x), tau);
  }
  return acc / static_cast<double>(data.n);
}

/// Same risk for an arbitrary callable regression function.
template <typename F>
double empirical_risk_fn(F&& f, const Dataset& data, double tau) {
  if (data.n == 0) contract_violation("empirical_risk_fn: empty dataset");
  double acc = 0.0;
  std::vector<double> x(data.d);
  for (std::size_t i = 0; i < data.n; ++i) {
    data.row(i, x);
    acc += huber_loss(data.Y[i] - f(x), tau);
  }
  return acc / static_cast<double>(data.n);
}

}  // namespace htreg
