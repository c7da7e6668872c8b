#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "htreg/loss.hpp"
#include "htreg/net.hpp"

namespace htreg {

enum class Regime { adaptive_huber, least_squares, symmetric_huber };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::adaptive_huber: return "adaptive_huber";
    case Regime::least_squares: return "least_squares";
    case Regime::symmetric_huber: return "symmetric_huber";
  }
  return "?";
}

inline Regime regime_from_string(const std::string& s) {
  if (s == "adaptive_huber") return Regime::adaptive_huber;
  if (s == "least_squares") return Regime::least_squares;
  if (s == "symmetric_huber") return Regime::symmetric_huber;
  contract_violation("unknown regime '" + s + "'");
  return Regime::adaptive_huber;
}

/// Tail-discount exponents: nu* = 1 - 1/(2p-1) (adaptive Huber),
/// nu-dagger = 1 - 1/p (least squares).
inline double nu_star(double p) { return 1.0 - 1.0 / (2.0 * p - 1.0); }
inline double nu_dagger(double p) { return 1.0 - 1.0 / p; }

/// Derived hyper-parameters for one (n, p, gamma*, regime) cell. The rate
/// statements fix levels only up to constants, so the testable content is
/// the exponents; c_tau and c_nl are user-tunable multipliers (default 1).
struct Schedule {
  std::size_t n = 0;
  double p = 2.0;
  double gamma_star = 1.0;
  Regime regime = Regime::adaptive_huber;
  double c_tau = 1.0;
  double c_nl = 1.0;

  double nu = 0.0;            // nu*, nu-dagger, or 1 (symmetric)
  double nl_product = 0.0;    // c_nl * (n/log^6 n)^{exponent_nl}
  double tau = kInfTau;       // c_tau * (n/log^6 n)^{exponent_tau}; inf for LS
  double v_n = 0.0;           // n^{-1} (NL)^2 log(NL) log n at the suggested arch
  double delta_n = 0.0;       // target rate (log^6 n / n)^{exponent_delta}
  double exponent_nl = 0.0;
  double exponent_tau = 0.0;
  double exponent_delta = 0.0;

  // suggested architecture: fixed hidden depth, width from the NL product
  std::size_t arch_depth = 2;
  std::size_t arch_width = 3;
};

inline Schedule make_schedule(std::size_t n, double p, double gamma_star, Regime regime,
                              double c_tau = 1.0, double c_nl = 1.0) {
  if (n < 3) contract_violation("make_schedule: n must be >= 3");
  if (!(p >= 2.0)) contract_violation("make_schedule: p must be >= 2");
  if (!(gamma_star > 0.0)) contract_violation("make_schedule: gamma* must be > 0");
  Schedule s;
  s.n = n;
  s.p = p;
  s.gamma_star = gamma_star;
  s.regime = regime;
  s.c_tau = c_tau;
  s.c_nl = c_nl;

  const double g = gamma_star;
  const double logn = std::log(static_cast<double>(n));
  const double base = static_cast<double>(n) / std::pow(logn, 6.0);

  switch (regime) {
    case Regime::adaptive_huber: {
      s.nu = nu_star(p);
      s.exponent_nl = s.nu / (2.0 * (2.0 * g + s.nu));
      s.exponent_tau = 2.0 * g * (1.0 - s.nu) / (2.0 * g + s.nu);
      s.exponent_delta = g * s.nu / (2.0 * g + s.nu);
      s.tau = c_tau * std::pow(base, s.exponent_tau);
      break;
    }
    case Regime::least_squares: {
      s.nu = nu_dagger(p);
      s.exponent_nl = s.nu / (2.0 * (2.0 * g + s.nu));
      s.exponent_tau = 0.0;
      s.exponent_delta = g * s.nu / (2.0 * g + s.nu);
      s.tau = kInfTau;
      break;
    }
    case Regime::symmetric_huber: {
      s.nu = 1.0;
      s.exponent_nl = 1.0 / (4.0 * g + 2.0);
      s.exponent_tau = 0.0;
      s.exponent_delta = g / (2.0 * g + 1.0);
      s.tau = c_tau;  // constant robustification level
      break;
    }
  }
  s.nl_product = c_nl * std::pow(base, s.exponent_nl);
  s.delta_n = std::pow(1.0 / base, s.exponent_delta);

  s.arch_depth = 2;
  s.arch_width = static_cast<std::size_t>(
      std::max(3.0, std::round(s.nl_product / static_cast<double>(s.arch_depth))));
  const double nl_bar = static_cast<double>(s.arch_depth * s.arch_width);
  s.v_n = nl_bar * nl_bar * std::log(nl_bar) * logn / static_cast<double>(n);
  return s;
}

}  // namespace htreg
