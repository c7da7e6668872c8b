#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include "htreg/loss.hpp"
#include "htreg/noise.hpp"
#include "htreg/rng.hpp"

namespace htreg {

namespace detail {

/// Adaptive Simpson on [a,b] (tolerances tuned for the smooth truncated-score
/// integrands this file produces).
inline double simpson(const std::function<double(double)>& f, double a, double b) {
  struct Rec {
    static double run(const std::function<double(double)>& f, double a, double m, double b,
                      double fa, double fm, double fb, double whole, double tol, int depth) {
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
      return run(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
             run(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
  };
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return Rec::run(f, a, m, b, fa, fm, fb, whole, 1e-13, 48);
}

}  // namespace detail

/// E[psi_tau(eps + shift)]: exact atom sums for discrete models; for density
/// models, quadrature over the interior where psi is the identity plus the
/// analytically clipped tails.
inline double expected_score(const NoiseModel& model, double tau, double shift) {
  if (!(tau > 0.0)) contract_violation("expected_score: tau must be > 0");
  if (model.discrete()) {
    double acc = 0.0;
    const auto& a = model.atoms();
    const auto& p = model.probs();
    for (std::size_t i = 0; i < a.size(); ++i) acc += p[i] * huber_score(a[i] + shift, tau);
    return acc;
  }
  const double lo = -tau - shift;  // eps below lo clips to -tau
  const double hi = tau - shift;   // eps above hi clips to +tau
  const double tails = tau * (1.0 - model.cdf(hi)) - tau * model.cdf(lo);
  auto integrand = [&](double x) { return (x + shift) * model.density(x); };
  return tails + detail::simpson(integrand, lo, hi);
}

/// Population excess Huber risk of a constant perturbation:
/// E[l_tau(eps - delta) - l_tau(eps)], exact for discrete models,
/// quadrature (piecewise over the kinks) for density models.
inline double expected_excess_risk(const NoiseModel& model, double delta, double tau) {
  auto diff = [&](double e) { return huber_loss(e - delta, tau) - huber_loss(e, tau); };
  if (model.discrete()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < model.atoms().size(); ++i)
      acc += model.probs()[i] * diff(model.atoms()[i]);
    return acc;
  }
  if (!std::isfinite(tau)) {
    // squared loss: E[(eps-delta)^2 - eps^2]/2 = delta^2/2 (mean-zero eps)
    return 0.5 * delta * delta;
  }
  // integrate the bounded difference; tails where both branches are linear
  // contribute tau*delta*(P upper) - ... handled analytically
  const double lo = std::min(-tau, -tau + delta) - 1.0;
  const double hi = std::max(tau, tau + delta) + 1.0;
  // above hi both losses are in the linear regime: diff = tau*delta... sign:
  // l(e-delta) - l(e) = tau(e-delta) - tau e = -tau delta for e >> 0
  const double upper = -tau * delta * (1.0 - model.cdf(hi));
  const double lower = tau * delta * model.cdf(lo);
  auto integrand = [&](double x) { return diff(x) * model.density(x); };
  return upper + lower + detail::simpson(integrand, lo, hi);
}

/// Huberization bias: the root Delta of E[psi_tau(eps + Delta)] = 0, i.e.
/// f_0 - f_{0,tau} for X-independent noise. Bisection on an expanding
/// bracket; the residual at the returned root is below 1e-10 for discrete
/// models. Throws with the computed endpoint expectations if no sign change
/// is found.
struct BiasResult {
  double delta = 0.0;
  double residual = 0.0;
};

inline BiasResult huberization_bias(const NoiseModel& model, double tau, double bracket = 1.0) {
  if (!(tau > 0.0)) contract_violation("huberization_bias: tau must be > 0");
  if (!(bracket > 0.0)) contract_violation("huberization_bias: bracket must be > 0");
  auto g = [&](double s) { return expected_score(model, tau, s); };

  double lo = -bracket, hi = bracket;
  double glo = g(lo), ghi = g(hi);
  for (int attempts = 0; (glo > 0.0 || ghi < 0.0) && attempts < 24; ++attempts) {
    lo *= 2.0;
    hi *= 2.0;
    glo = g(lo);
    ghi = g(hi);
  }
  // g is nondecreasing in the shift; need g(lo) <= 0 <= g(hi)
  if (glo > 0.0 || ghi < 0.0)
    throw std::runtime_error("huberization_bias: no sign change; E[psi(eps+lo)]=" +
                             std::to_string(glo) + ", E[psi(eps+hi)]=" + std::to_string(ghi));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double gm = g(mid);
    if (gm < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double root = 0.5 * (lo + hi);
  return {root, g(root)};
}

/// Validity floor c_1 = 2 max{2M, (2 v_p)^{1/p}} below which the strong
/// convexity and bias bounds are not guaranteed.
inline double c1_floor(const NoiseModel& model, double level_m) {
  const double p = model.p_order();
  const double vp = model.moment(p);
  return 2.0 * std::max(2.0 * level_m, std::pow(2.0 * vp, 1.0 / p));
}

/// Monte Carlo estimate of the excess-risk gap R_tau(f0+delta) - R_tau(f0)
/// for a constant perturbation delta, with its standard error and delta^2.
/// Deterministic for a fixed seed.
struct GapEstimate {
  double gap = 0.0;
  double se = 0.0;
  double l2sq = 0.0;
};

inline GapEstimate excess_risk_gap(const NoiseModel& model, double f_minus_f0, double tau,
                                   std::size_t mc_budget, std::uint64_t seed) {
  if (mc_budget < 10000) contract_violation("excess_risk_gap: Monte Carlo budget must be >= 1e4");
  Rng rng(seed);
  const double delta = f_minus_f0;
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < mc_budget; ++i) {
    const double e = model.sample_one(rng);
    const double v = huber_loss(e - delta, tau) - huber_loss(e, tau);
    const double d1 = v - mean;
    mean += d1 / static_cast<double>(i + 1);
    m2 += d1 * (v - mean);
  }
  const double var = m2 / static_cast<double>(mc_budget - 1);
  return {mean, std::sqrt(var / static_cast<double>(mc_budget)), delta * delta};
}

}  // namespace htreg
