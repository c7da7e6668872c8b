#pragma once

#include <cstddef>
#include <vector>

#include "htreg/net.hpp"

namespace htreg {

/// Exact ReLU realizations of the simple functions used as building blocks
/// by the constructive approximators: identity, |x|, min, max (each with the
/// stated exact sizes), the sup-norm tournament, and the bump indicator.

/// f(x) = x, in F(1,1,2,1): x = sigma(x) - sigma(-x).
inline Network build_identity() {
  AffineLayer h(2, 1);
  h.at(0, 0) = 1.0;
  h.at(1, 0) = -1.0;
  AffineLayer o(1, 2);
  o.at(0, 0) = 1.0;
  o.at(0, 1) = -1.0;
  return Network({h, o});
}

/// f(x) = |x|, in F(1,1,2,1): |x| = sigma(x) + sigma(-x).
inline Network build_abs() {
  AffineLayer h(2, 1);
  h.at(0, 0) = 1.0;
  h.at(1, 0) = -1.0;
  AffineLayer o(1, 2);
  o.at(0, 0) = 1.0;
  o.at(0, 1) = 1.0;
  return Network({h, o});
}

namespace detail {

// min(x,y) = (sigma(x+y) - sigma(-x-y) - sigma(x-y) - sigma(y-x)) / 2
// max(x,y) = (sigma(x+y) - sigma(-x-y) + sigma(x-y) + sigma(y-x)) / 2
inline Network build_minmax(double sign) {
  AffineLayer h(4, 2);
  h.at(0, 0) = 1.0;  h.at(0, 1) = 1.0;
  h.at(1, 0) = -1.0; h.at(1, 1) = -1.0;
  h.at(2, 0) = 1.0;  h.at(2, 1) = -1.0;
  h.at(3, 0) = -1.0; h.at(3, 1) = 1.0;
  AffineLayer o(1, 4);
  o.at(0, 0) = 0.5;
  o.at(0, 1) = -0.5;
  o.at(0, 2) = 0.5 * sign;
  o.at(0, 3) = 0.5 * sign;
  return Network({h, o});
}

}  // namespace detail

/// min(x,y) in F(2,1,4,1).
inline Network build_min() { return detail::build_minmax(-1.0); }

/// max(x,y) in F(2,1,4,1).
inline Network build_max() { return detail::build_minmax(+1.0); }

/// f(x) = ||x||_inf on R^d, depth <= ceil(log2 d)+1, width <= 2d.
/// First layer takes per-coordinate |.| pairs, then a left-to-right
/// tournament of pairwise maxes; an odd leftover passes through identity.
inline Network build_sup_norm(std::size_t d) {
  if (d < 1) contract_violation("build_sup_norm: d must be >= 1");
  if (d == 1) return build_abs();

  std::vector<ParallelPart> abs_parts;
  for (std::size_t i = 0; i < d; ++i) abs_parts.push_back({build_abs(), {i}});
  Network cur = parallel(abs_parts, d);

  std::size_t m = d;
  while (m > 1) {
    std::vector<ParallelPart> round;
    std::size_t i = 0;
    for (; i + 1 < m; i += 2) round.push_back({build_max(), {i, i + 1}});
    if (i < m) round.push_back({build_identity(), {i}});
    cur = compose(parallel(round, m), cur);
    m = (m + 1) / 2;
  }
  return cur;
}

/// The bump h(x,y) = min(sigma(2 - (3/delta2)*||x-y||_inf), 1) on R^{2d}:
/// exactly 1 when ||x-y||_inf <= delta2/3, exactly 0 when >= 2*delta2/3.
/// Depth <= ceil(log2 d)+3, width <= 4d. The final min-with-1 uses
/// a - sigma(a-1), which is exact in floating point on [1,2].
inline Network build_bump(std::size_t d, double delta2) {
  if (d < 1) contract_violation("build_bump: d must be >= 1");
  if (!(delta2 > 0.0)) contract_violation("build_bump: delta2 must be > 0");

  // ||x - y||_inf on R^{2d}: per-coordinate |x_i - y_i| via a 2-unit split,
  // then the same tournament as build_sup_norm.
  AffineLayer diff(2 * d, 2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    diff.at(2 * i, i) = 1.0;
    diff.at(2 * i, d + i) = -1.0;
    diff.at(2 * i + 1, i) = -1.0;
    diff.at(2 * i + 1, d + i) = 1.0;
  }
  AffineLayer comb(d, 2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    comb.at(i, 2 * i) = 1.0;
    comb.at(i, 2 * i + 1) = 1.0;
  }
  Network sup = Network({diff, comb});
  std::size_t m = d;
  while (m > 1) {
    std::vector<ParallelPart> round;
    std::size_t i = 0;
    for (; i + 1 < m; i += 2) round.push_back({build_max(), {i, i + 1}});
    if (i < m) round.push_back({build_identity(), {i}});
    sup = compose(parallel(round, m), sup);
    m = (m + 1) / 2;
  }

  // a = sigma(2 - (3/delta2) * t)
  AffineLayer ramp(1, 1);
  ramp.at(0, 0) = -3.0 / delta2;
  ramp.b[0] = 2.0;
  // out = a - sigma(a - 1); needs one more hidden layer carrying (a, a-1).
  AffineLayer carry(2, 1);
  carry.at(0, 0) = 1.0;  // sigma(a) = a, a >= 0
  carry.at(1, 0) = 1.0;
  carry.b[1] = -1.0;  // sigma(a - 1)
  AffineLayer out(1, 2);
  out.at(0, 0) = 1.0;
  out.at(0, 1) = -1.0;
  Network clamp01 = Network({ramp, carry, out});
  return compose(clamp01, sup);
}

/// Naive one-hidden-layer staircase oracle: K-1 ramp pairs of slope 1/delta,
/// width 2(K-1), computing floor(K x) exactly on every good interval
/// [k/K, (k+1)/K - delta). Used as the independent cross-check for the deep
/// step builders.
inline Network build_step_wide(std::size_t pieces, double delta) {
  if (pieces < 1) contract_violation("build_step_wide: pieces must be >= 1");
  if (!(delta > 0.0) || delta > 1.0 / (3.0 * static_cast<double>(pieces)))
    contract_violation("build_step_wide: delta outside (0, 1/(3K)]");
  if (pieces == 1) {
    AffineLayer o(1, 1);
    return Network({o});  // constant 0
  }
  const double k = static_cast<double>(pieces);
  AffineLayer h(2 * (pieces - 1), 1);
  for (std::size_t j = 1; j < pieces; ++j) {
    const double thr = static_cast<double>(j) / k;
    // sigma((x - thr)/delta + 1) - sigma((x - thr)/delta)
    h.at(2 * (j - 1), 0) = 1.0 / delta;
    h.b[2 * (j - 1)] = -(thr / delta) + 1.0;
    h.at(2 * (j - 1) + 1, 0) = 1.0 / delta;
    h.b[2 * (j - 1) + 1] = -(thr / delta);
  }
  AffineLayer o(1, 2 * (pieces - 1));
  for (std::size_t j = 0; j + 1 < pieces; ++j) {
    o.at(0, 2 * j) = 1.0;
    o.at(0, 2 * j + 1) = -1.0;
  }
  return Network({h, o});
}

}  // namespace htreg
