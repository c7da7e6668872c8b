#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "htreg/net.hpp"
#include "htreg/primitives.hpp"

namespace htreg {

/// Uniform grid on [0,1]^d with K cells per axis and the Delta-sliver
/// convention: cell alpha (1-based multi-index) owns the "good" region
/// Q_alpha(Delta) = prod_i [(alpha_i-1)/K, alpha_i/K - 1{alpha_i<K} Delta].
/// Builders are constrained on good regions only; sliver values are free.
struct GridSpec {
  std::size_t d = 1;
  std::size_t pieces = 1;  // K
  double delta = 0.0;      // Delta in (0, 1/(3K)]

  GridSpec(std::size_t dim, std::size_t k, double del) : d(dim), pieces(k), delta(del) {
    if (d < 1) contract_violation("GridSpec: d must be >= 1");
    if (pieces < 1) contract_violation("GridSpec: K must be >= 1");
    if (!(delta > 0.0) || delta > 1.0 / (3.0 * static_cast<double>(pieces)))
      contract_violation("GridSpec: Delta outside (0, 1/(3K)]");
  }

  std::size_t cell_count() const {
    std::size_t s = 1;
    for (std::size_t i = 0; i < d; ++i) s *= pieces;
    return s;
  }

  /// I(alpha) = sum_i (alpha_i - 1) K^{i-1}, alpha 1-based.
  std::size_t flat_index(const std::vector<std::size_t>& alpha) const {
    if (alpha.size() != d) contract_violation("GridSpec: alpha arity mismatch");
    std::size_t idx = 0, stride = 1;
    for (std::size_t i = 0; i < d; ++i) {
      if (alpha[i] < 1 || alpha[i] > pieces) contract_violation("GridSpec: alpha out of range");
      idx += (alpha[i] - 1) * stride;
      stride *= pieces;
    }
    return idx;
  }

  std::vector<std::size_t> unflatten(std::size_t flat) const {
    std::vector<std::size_t> alpha(d);
    for (std::size_t i = 0; i < d; ++i) {
      alpha[i] = flat % pieces + 1;
      flat /= pieces;
    }
    return alpha;
  }

  /// True if x lies in the good region of some cell; writes that cell's
  /// flat index. Points on slivers return false.
  bool locate_good(const std::vector<double>& x, std::size_t* flat) const {
    if (x.size() != d) contract_violation("GridSpec: point arity mismatch");
    const double k = static_cast<double>(pieces);
    std::size_t idx = 0, stride = 1;
    for (std::size_t i = 0; i < d; ++i) {
      if (x[i] < 0.0 || x[i] > 1.0) return false;
      auto c = static_cast<std::size_t>(std::min(std::floor(x[i] * k), k - 1.0));
      const double hi = (c + 1 < pieces) ? (c + 1) / k - delta : 1.0;
      if (x[i] > hi) return false;
      idx += c * stride;
      stride *= pieces;
    }
    *flat = idx;
    return true;
  }
};

namespace detail {

/// Dense-layer assembly helper: a row is (bias, sparse terms over the
/// previous layer's unit indices).
struct RowSpec {
  double bias = 0.0;
  std::vector<std::pair<std::size_t, double>> terms;
};

inline AffineLayer make_layer(std::size_t cols, const std::vector<RowSpec>& rows) {
  AffineLayer l(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    l.b[i] = rows[i].bias;
    for (const auto& [j, c] : rows[i].terms) l.at(i, j) += c;
  }
  return l;
}

/// Deep staircase: maps x in [0, K*u] to the cell index k = floor(x/u),
/// exactly on every good region [k*u, (k+1)*u - Delta] (last cell closed at
/// K*u). Two hidden layers per base-`radix` digit; each threshold uses the
/// saturating ramp 1 - sigma(1 - sigma(4(x - thr)/Delta + 2)), which is
/// bit-exactly 0 or 1 on good regions no matter how large the pre-ReLU
/// values get (the transition is centered in the forbidden sliver and the
/// saturation rides sigma(negative) == 0). Digits therefore stay exact
/// integers, which downstream table lookups and bit walks rely on. A final
/// min(idx, K-1) layer absorbs the phantom fire possible at x == K*u when K
/// is not a full radix power.
///
/// Layer unit order (both layers of a stage): [0] sigma(x), [1] sigma(P_st),
/// [2..] ramp units (u_j in the A layer, w_j = sigma(1 - u_j) in B).
inline Network staircase_index(std::size_t pieces, double unit, double delta, std::size_t radix) {
  if (pieces < 1) contract_violation("staircase_index: pieces must be >= 1");
  if (radix < 2) contract_violation("staircase_index: radix must be >= 2");
  if (pieces == 1) {
    AffineLayer o(1, 1);
    return Network({o});
  }
  std::size_t stages = 0;
  double cap = 1;
  while (cap < static_cast<double>(pieces)) {
    cap *= static_cast<double>(radix);
    ++stages;
  }
  std::vector<double> suffix(stages);  // radix^{stages-1-st}
  {
    double s = 1;
    for (std::size_t st = stages; st-- > 0;) {
      suffix[st] = s;
      s *= static_cast<double>(radix);
    }
  }
  const double slope = 4.0 / delta;

  std::vector<AffineLayer> layers;
  std::size_t prev_ramps = 0;
  // P_{st} over the previous B layer's units: radix*P_{st-1} + (R - sum w_j)
  auto prefix_expr = [&](bool first) {
    RowSpec e;
    if (!first) {
      e.bias = static_cast<double>(prev_ramps);
      e.terms.push_back({1, static_cast<double>(radix)});
      for (std::size_t r = 0; r < prev_ramps; ++r) e.terms.push_back({2 + r, -1.0});
    }
    return e;
  };
  auto scaled = [](const RowSpec& e, double c) {
    RowSpec out;
    out.bias = e.bias * c;
    for (auto [j, v] : e.terms) out.terms.push_back({j, v * c});
    return out;
  };

  for (std::size_t st = 0; st < stages; ++st) {
    const bool first = (st == 0);
    const std::size_t cols = first ? 1 : 2 + prev_ramps;
    const RowSpec pst = prefix_expr(first);

    // layer A: u_j = sigma(slope*(x - thr_j) + 2), thr_j = (P*radix + j)*suffix*u
    std::vector<RowSpec> rows_a;
    rows_a.push_back({0.0, {{0, 1.0}}});
    rows_a.push_back(pst);
    std::size_t ramps = 0;
    for (std::size_t j = 1; j < radix; ++j) {
      const double idx_off = static_cast<double>(j) * suffix[st];
      if (first && idx_off >= static_cast<double>(pieces)) break;  // static skip
      RowSpec rs = scaled(pst, -slope * static_cast<double>(radix) * suffix[st] * unit);
      rs.bias += -slope * idx_off * unit + 2.0;
      rs.terms.push_back({0, slope});
      rows_a.push_back(rs);
      ++ramps;
    }
    layers.push_back(make_layer(cols, rows_a));

    // layer B: carry x and P_st, saturate w_j = sigma(1 - u_j)
    std::vector<RowSpec> rows_b;
    rows_b.push_back({0.0, {{0, 1.0}}});
    rows_b.push_back({0.0, {{1, 1.0}}});
    for (std::size_t r = 0; r < ramps; ++r) rows_b.push_back({1.0, {{2 + r, -1.0}}});
    layers.push_back(make_layer(2 + ramps, rows_b));
    prev_ramps = ramps;
  }

  RowSpec idx = prefix_expr(false);  // P_T over the final B layer
  const bool need_cap = cap > static_cast<double>(pieces) && stages >= 2;
  if (!need_cap) {
    layers.push_back(make_layer(2 + prev_ramps, {idx}));
    return Network(std::move(layers));
  }
  RowSpec over = idx;
  over.bias -= static_cast<double>(pieces) - 1.0;
  layers.push_back(make_layer(2 + prev_ramps, {idx, over}));
  layers.push_back(make_layer(2, {RowSpec{0.0, {{0, 1.0}, {1, -1.0}}}}));
  return Network(std::move(layers));
}

/// Tent-table lookup: equals value[k] at every integer z = k in [0, count)
/// and 0 at integers outside. One hidden layer per block of `block`
/// consecutive tents; each block folds into a carried accumulator, so width
/// stays near `block` while depth grows as count/block. Values must be
/// nonnegative (the accumulator rides through ReLU). Exact at integers:
/// every unit value is an integer multiple of the dyadic value grid.
///
/// Layer unit order: [0] sigma(z), [1] sigma(acc), [2..] sigma(z - m).
inline Network tent_lookup(const std::vector<double>& values, std::size_t block) {
  if (values.empty()) contract_violation("tent_lookup: empty table");
  if (block < 1) contract_violation("tent_lookup: block must be >= 1");
  for (double v : values)
    if (v < 0.0) contract_violation("tent_lookup: values must be nonnegative");
  const std::size_t count = values.size();
  const std::size_t nblocks = (count + block - 1) / block;

  auto gamma_terms = [&](std::size_t lo, std::size_t hi, std::size_t base) {
    // second difference of the block-local table over units base..; the
    // tents of block [lo,hi) live on shifts m = lo-1 .. hi
    std::vector<std::pair<std::size_t, double>> terms;
    const long long llo = static_cast<long long>(lo), lhi = static_cast<long long>(hi);
    for (long long m = llo - 1; m <= lhi; ++m) {
      auto w = [&](long long k) {
        return (k >= llo && k < lhi) ? values[static_cast<std::size_t>(k)] : 0.0;
      };
      const double g = w(m + 1) - 2.0 * w(m) + w(m - 1);
      if (g != 0.0) terms.push_back({base + static_cast<std::size_t>(m - (llo - 1)), g});
    }
    return terms;
  };

  std::vector<AffineLayer> layers;
  std::size_t prev_lo = 0, prev_hi = 0;
  for (std::size_t bi = 0; bi < nblocks; ++bi) {
    const std::size_t lo = bi * block;
    const std::size_t hi = std::min(count, lo + block);
    const bool first = (bi == 0);
    const std::size_t cols = first ? 1 : 2 + (prev_hi - prev_lo) + 2;
    std::vector<RowSpec> rows;
    rows.push_back({0.0, {{0, 1.0}}});  // z (>= 0 on the integer domain)
    RowSpec acc;
    if (!first) {
      acc.terms = gamma_terms(prev_lo, prev_hi, 2);
      acc.terms.push_back({1, 1.0});
    }
    rows.push_back(acc);
    for (long long m = static_cast<long long>(lo) - 1; m <= static_cast<long long>(hi); ++m)
      rows.push_back({-static_cast<double>(m), {{0, 1.0}}});
    layers.push_back(make_layer(cols, rows));
    prev_lo = lo;
    prev_hi = hi;
  }
  RowSpec out;
  out.terms = gamma_terms(prev_lo, prev_hi, 2);
  out.terms.push_back({1, 1.0});
  layers.push_back(make_layer(2 + (prev_hi - prev_lo) + 2, {out}));
  return Network(std::move(layers));
}

}  // namespace detail

/// Deep step function, K-first form:
/// phi(x) = k exactly for x in [k/K, (k+1)/K - 1{k+1<K} Delta], k = 0..K-1.
/// `radix` sets the ramps-per-layer width/depth trade; the default budget
/// form corresponds to radix = 2*floor(N^{1/d})+1.
inline Network build_step(std::size_t pieces, double delta, std::size_t radix = 4) {
  if (pieces < 1) contract_violation("build_step: K must be >= 1");
  if (!(delta > 0.0) || delta > 1.0 / (3.0 * static_cast<double>(pieces)))
    contract_violation("build_step: Delta outside (0, 1/(3K)]");
  return detail::staircase_index(pieces, 1.0 / static_cast<double>(pieces), delta,
                                 std::max<std::size_t>(radix, 2));
}

/// Paper parameterization for ambient dimension d:
/// K = floor(L^{2/d}) * floor(N^{1/d})^2; budget depth 4L+5, width
/// 4*floor(N^{1/d})+3 (asserted in tests).
inline Network build_step_nl(std::size_t n_param, std::size_t l_param, std::size_t d, double delta) {
  if (n_param < 1 || l_param < 1 || d < 1) contract_violation("build_step_nl: N, L, d must be >= 1");
  const auto m = static_cast<std::size_t>(
      std::floor(std::pow(static_cast<double>(n_param), 1.0 / static_cast<double>(d))));
  const auto lam = static_cast<std::size_t>(
      std::floor(std::pow(static_cast<double>(l_param), 2.0 / static_cast<double>(d))));
  const std::size_t pieces = std::max<std::size_t>(1, std::max<std::size_t>(m, 1) *
                                                          std::max<std::size_t>(m, 1) *
                                                          std::max<std::size_t>(lam, 1));
  return build_step(pieces, delta, 2 * std::max<std::size_t>(m, 1) + 1);
}

/// Decoder assembly choice: series trades depth for
/// width, parallel the reverse. For point fitting the same flag picks the
/// internal strategy: parallel = direct tent table (width-leaning), series =
/// packed dyadic words + sequential bit walk (depth-leaning).
enum class FitVariant { series, parallel };

inline const char* to_string(FitVariant v) { return v == FitVariant::series ? "series" : "parallel"; }

namespace detail {

/// Packed-word point fitting. Split i = a*wl + t; look up the word
/// w_a = 0.theta...theta (wl bits) with a blocked tent table; then walk the
/// bits one layer each, latching bit j when the carried t equals j-1.
/// Everything stays on integers or wl-bit dyadics, so each step is exact.
inline Network point_fit_packed(const std::vector<int>& theta, std::size_t block,
                                std::size_t word_len, std::size_t radix) {
  const std::size_t count = theta.size();
  const std::size_t wl = std::max<std::size_t>(1, std::min({word_len, std::size_t{40}, count}));
  const std::size_t words = (count + wl - 1) / wl;
  std::vector<double> table(words, 0.0);
  for (std::size_t a = 0; a < words; ++a) {
    double v = 0.0, p = 0.5;
    for (std::size_t j = 0; j < wl; ++j, p *= 0.5) {
      const std::size_t i = a * wl + j;
      if (i < count && theta[i]) v += p;
    }
    table[a] = v;
  }

  // (a, x) from x; the word index never phantom-fires because x <= count-1
  Network split = staircase_index(words, static_cast<double>(wl), 1.0, radix);
  Network split2 = parallel({{split, {0}}, {build_identity(), {0}}}, 1);
  // (v, a, x)
  Network lut = tent_lookup(table, block);
  Network lut2 = parallel({{lut, {0}}, {build_identity(), {0}}, {build_identity(), {1}}}, 2);
  Network front = compose(lut2, split2);

  if (wl == 1) {
    AffineLayer pick(1, 3);
    pick.at(0, 0) = 2.0;  // word == bit/2
    return affine_then(front, pick);
  }

  // (m1, t) with m1 = 2^wl * v, t = x - wl*a
  AffineLayer glue(2, 3);
  glue.at(0, 0) = std::ldexp(1.0, static_cast<int>(wl));
  glue.at(1, 1) = -static_cast<double>(wl);
  glue.at(1, 2) = 1.0;
  front = affine_then(front, glue);

  // Bit walk layers j = 1..wl. Unit order (full layers):
  //   0 sigma(t), 1 sigma(m_j), 2 sigma(acc), 3 sigma(m_j - T_j + 1),
  //   4 sigma(m_j - T_j), 5 sigma(t-(j-1)+1), 6 sigma(t-(j-1)),
  //   7 sigma(t-(j-1)-1), 8 sigma(b_{j-1} + gate_{j-1} - 1)
  // Layer 1 has units 0..7 (no previous latch); layer 2 keeps acc = 0.
  std::vector<AffineLayer> walk;
  for (std::size_t j = 1; j <= wl; ++j) {
    const bool first = (j == 1);
    const std::size_t cols = first ? 2 : (j == 2 ? 8 : 9);
    const double tj = std::ldexp(1.0, static_cast<int>(wl - j));
    auto m_terms = [&](double coef) {
      std::vector<std::pair<std::size_t, double>> terms;
      if (first) {
        terms.push_back({0, coef});  // previous outputs: (m1, t)
      } else {
        const double tprev = std::ldexp(1.0, static_cast<int>(wl - (j - 1)));
        terms.push_back({1, coef});
        terms.push_back({3, -coef * tprev});
        terms.push_back({4, coef * tprev});
      }
      return terms;
    };
    const std::size_t t_unit = first ? 1 : 0;
    std::vector<RowSpec> rows(9);
    rows[0].terms = {{t_unit, 1.0}};
    rows[1].terms = m_terms(1.0);
    if (j > 2) rows[2].terms = {{2, 1.0}, {8, 1.0}};
    rows[3].terms = m_terms(1.0);
    rows[3].bias = -tj + 1.0;
    rows[4].terms = m_terms(1.0);
    rows[4].bias = -tj;
    const double jj = static_cast<double>(j - 1);
    rows[5].terms = {{t_unit, 1.0}};
    rows[5].bias = -jj + 1.0;
    rows[6].terms = {{t_unit, 1.0}};
    rows[6].bias = -jj;
    rows[7].terms = {{t_unit, 1.0}};
    rows[7].bias = -jj - 1.0;
    if (!first) {
      rows[8].bias = -1.0;
      rows[8].terms = {{3, 1.0}, {4, -1.0}, {5, 1.0}, {6, -2.0}, {7, 1.0}};
    } else {
      rows.resize(8);
    }
    walk.push_back(make_layer(cols, rows));
  }
  // flush: acc plus the latch of bit wl
  {
    std::vector<RowSpec> flush(2);
    flush[0].terms = {{2, 1.0}};
    if (wl >= 2) flush[0].terms.push_back({8, 1.0});
    flush[1].bias = -1.0;
    flush[1].terms = {{3, 1.0}, {4, -1.0}, {5, 1.0}, {6, -2.0}, {7, 1.0}};
    walk.push_back(make_layer(wl == 1 ? 8 : 9, flush));
  }
  walk.push_back(make_layer(2, {RowSpec{0.0, {{0, 1.0}, {1, 1.0}}}}));
  return compose(Network(std::move(walk)), front);
}

}  // namespace detail

/// Point fitting: phi(i) = theta_i exactly
/// for every integer i in {0,...,S-1}, S <= (NL)^2; off-integer values are
/// unconstrained. Default budgets, asserted in tests over the supported
/// grid: depth <= 5L+7in either variant at width <= 8N+6.
inline Network build_point_fit(const std::vector<int>& theta, std::size_t n_param,
                               std::size_t l_param, FitVariant variant) {
  if (theta.empty()) contract_violation("build_point_fit: empty bit vector");
  if (n_param < 1 || l_param < 1) contract_violation("build_point_fit: N, L must be >= 1");
  for (int t : theta)
    if (t != 0 && t != 1) contract_violation("build_point_fit: theta entries must be bits");
  const double cap = static_cast<double>(n_param) * static_cast<double>(l_param);
  if (static_cast<double>(theta.size()) > cap * cap)
    contract_violation("build_point_fit: S exceeds (NL)^2");

  if (theta.size() == 1) {
    AffineLayer o(1, 1);
    o.b[0] = theta[0];
    return Network({o});
  }
  // blocks sized so the widest layer lands exactly on the 8N+6 budget
  if (variant == FitVariant::parallel) {
    std::vector<double> vals(theta.begin(), theta.end());
    return detail::tent_lookup(vals, std::max<std::size_t>(8 * n_param + 2, 2));
  }
  const std::size_t block = 8 * n_param > 3 ? 8 * n_param - 2 : 2;
  return detail::point_fit_packed(theta, block, 2 * l_param,
                                  std::max<std::size_t>(4 * n_param, 2));
}

/// Cell encoder: per-axis step nets in parallel, then
/// the flattening affine I(alpha) = sum_i (alpha_i - 1) K^{i-1}; maps every
/// good region Q_alpha(Delta) to the exact integer I(alpha).
inline Network build_cell_encoder(const GridSpec& grid, std::size_t n_param) {
  const auto m = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::floor(std::pow(static_cast<double>(n_param), 1.0 / static_cast<double>(grid.d)))));
  Network axis = build_step(grid.pieces, grid.delta, 2 * m + 1);
  std::vector<ParallelPart> parts;
  for (std::size_t i = 0; i < grid.d; ++i) parts.push_back({axis, {i}});
  Network enc = parallel(parts, grid.d);
  AffineLayer flat(1, grid.d);
  double stride = 1.0;
  for (std::size_t i = 0; i < grid.d; ++i) {
    flat.at(0, i) = stride;
    stride *= static_cast<double>(grid.pieces);
  }
  return affine_then(enc, flat);
}

namespace detail {

inline std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

}  // namespace detail

/// Piecewise-constant approximator: decoder o
/// encoder with |f(x) - y_alpha| <= eps on every good region, and equality
/// when y_alpha = sum_{i<=r} 2^{-i} theta_i with r <= ceil(log2(1/eps)).
/// `values` is indexed by I(alpha). Series decoder: the log2(1/eps) factor
/// multiplies depth; parallel decoder: it multiplies width.
inline Network build_piecewise_constant(const GridSpec& grid, const std::vector<double>& values,
                                        double eps, std::size_t n_param, std::size_t l_param,
                                        FitVariant variant) {
  if (values.size() != grid.cell_count())
    contract_violation("build_piecewise_constant: values size != K^d");
  if (!(eps > 0.0) || eps >= 1.0) contract_violation("build_piecewise_constant: eps outside (0,1)");
  for (double v : values)
    if (v < 0.0 || v > 1.0) contract_violation("build_piecewise_constant: values must lie in [0,1]");
  const auto m = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::floor(std::pow(static_cast<double>(n_param), 1.0 / static_cast<double>(grid.d)))));
  const auto lr = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::floor(std::pow(static_cast<double>(l_param), 1.0 / static_cast<double>(grid.d)))));
  if (grid.pieces != m * m * lr * lr)
    contract_violation("build_piecewise_constant: K != floor(N^{1/d})^2 floor(L^{1/d})^2");

  const auto r = static_cast<std::size_t>(std::ceil(std::log2(1.0 / eps)));
  std::vector<std::vector<int>> planes(r + 1, std::vector<int>(values.size(), 0));
  for (std::size_t s = 0; s < values.size(); ++s) {
    double rem = values[s];
    for (std::size_t j = 0; j <= r; ++j) {
      const double p = std::ldexp(1.0, -static_cast<int>(j));
      if (rem >= p) {
        planes[j][s] = 1;
        rem -= p;
      }
    }
  }

  // point-fit sub-nets run at the per-axis-root parameters:
  // S = K^d = (pf_n * pf_l)^2 exactly
  const std::size_t pf_n = detail::ipow(m, grid.d);
  const std::size_t pf_l = detail::ipow(lr, grid.d);

  Network enc = build_cell_encoder(grid, n_param);

  if (variant == FitVariant::parallel) {
    std::vector<ParallelPart> psis;
    for (std::size_t j = 0; j <= r; ++j)
      psis.push_back({build_point_fit(planes[j], pf_n, pf_l, FitVariant::parallel), {0}});
    Network dec = parallel(psis, 1);
    AffineLayer comb(1, r + 1);
    for (std::size_t j = 0; j <= r; ++j) comb.at(0, j) = std::ldexp(1.0, -static_cast<int>(j));
    return compose(affine_then(dec, comb), enc);
  }

  // series: stage j carries (partial sum, index) and adds 2^{-j} psi_j
  Network cur = parallel({{build_point_fit(planes[0], pf_n, pf_l, FitVariant::series), {0}},
                          {build_identity(), {0}}},
                         1);  // (psi_0, idx)
  for (std::size_t j = 1; j <= r; ++j) {
    const bool last = (j == r);
    Network psi = build_point_fit(planes[j], pf_n, pf_l, FitVariant::series);
    std::vector<ParallelPart> parts;
    parts.push_back({build_identity(), {0}});
    parts.push_back({psi, {1}});
    if (!last) parts.push_back({build_identity(), {1}});
    Network stage = parallel(parts, 2);
    AffineLayer comb(last ? 1 : 2, last ? 2 : 3);
    comb.at(0, 0) = 1.0;
    comb.at(0, 1) = std::ldexp(1.0, -static_cast<int>(j));
    if (!last) comb.at(1, 2) = 1.0;
    cur = compose(affine_then(stage, comb), cur);
  }
  if (r == 0) {
    AffineLayer pick(1, 2);
    pick.at(0, 0) = 1.0;
    cur = affine_then(cur, pick);
  }
  return compose(cur, enc);
}

/// One fitted spike: cell alpha (1-based), anchor x inside the cell's good
/// region, target value y in {-1,+1}.
struct SpikePoint {
  std::vector<std::size_t> alpha;
  std::vector<double> x;
  double y = 1.0;
};

/// Input to the spike interpolant: exact +-1 at anchors,
/// exact plateau u on good regions at sup-distance >= delta2 from every
/// anchor. At most one anchor per cell.
struct SpikeSpec {
  GridSpec grid;  // carries Delta_1
  double delta2;
  std::vector<SpikePoint> points;
  double level;  // plateau u in [-1,1]

  SpikeSpec(GridSpec g, double d2, std::vector<SpikePoint> pts, double u)
      : grid(std::move(g)), delta2(d2), points(std::move(pts)), level(u) {
    if (!(delta2 > 0.0)) contract_violation("SpikeSpec: delta2 must be > 0");
    if (!(level >= -1.0 && level <= 1.0)) contract_violation("SpikeSpec: |u| must be <= 1");
    std::set<std::size_t> seen;
    for (const auto& p : points) {
      if (p.y != 1.0 && p.y != -1.0) contract_violation("SpikeSpec: y values must be +-1");
      std::size_t flat = 0;
      if (p.x.size() != grid.d || !grid.locate_good(p.x, &flat))
        contract_violation("SpikeSpec: anchor outside its cell's good region");
      if (flat != grid.flat_index(p.alpha))
        contract_violation("SpikeSpec: anchor not inside cell alpha");
      if (!seen.insert(flat).second) contract_violation("SpikeSpec: duplicate cell alpha");
    }
  }
};

/// Measured size constants for the spike fitter; only their existence is
/// guaranteed a priori, so the builder reports them instead of hard-coding.
struct SpikeBuildReport {
  std::size_t depth = 0;
  std::size_t width = 0;
  double c_depth = 0.0;
  double c_width = 0.0;
};

/// Spike fitter: clamp(2g+ - 2g- + u, -1, 1) with
/// g+- = min(bump(nearest-anchor net, x), mask). Variant series puts the
/// log2(1/Delta2) factor on depth, variant parallel on width.
inline Network build_spike_fitter(const SpikeSpec& spec, std::size_t n_param, std::size_t l_param,
                                  FitVariant variant, SpikeBuildReport* report = nullptr) {
  const GridSpec& grid = spec.grid;
  const std::size_t d = grid.d;
  const std::size_t cells = grid.cell_count();

  std::vector<double> mask_pos(cells, 0.0), mask_neg(cells, 0.0);
  std::vector<std::vector<double>> coord_pos(d, std::vector<double>(cells)),
      coord_neg(d, std::vector<double>(cells));
  {
    const double k = static_cast<double>(grid.pieces);
    for (std::size_t s = 0; s < cells; ++s) {
      const auto alpha = grid.unflatten(s);
      for (std::size_t i = 0; i < d; ++i) {
        const double lo = static_cast<double>(alpha[i] - 1) / k;
        const double hi =
            (alpha[i] < grid.pieces) ? static_cast<double>(alpha[i]) / k - grid.delta : 1.0;
        coord_pos[i][s] = coord_neg[i][s] = 0.5 * (lo + hi);
      }
    }
  }
  for (const auto& p : spec.points) {
    const std::size_t s = grid.flat_index(p.alpha);
    auto& mask = (p.y > 0) ? mask_pos : mask_neg;
    auto& coord = (p.y > 0) ? coord_pos : coord_neg;
    mask[s] = 1.0;
    for (std::size_t i = 0; i < d; ++i) coord[i][s] = p.x[i];
  }

  const double eps_c = std::min(0.5, spec.delta2 / 3.0);
  auto coord_net = [&](const std::vector<double>& table) {
    return build_piecewise_constant(grid, table, eps_c, n_param, l_param, variant);
  };
  auto mask_net = [&](const std::vector<double>& table) {
    return build_piecewise_constant(grid, table, 0.5, n_param, l_param, variant);
  };

  // stage A: x -> (xhat+ (d), m+, xhat- (d), m-, x (d))
  std::vector<std::size_t> all(d);
  for (std::size_t i = 0; i < d; ++i) all[i] = i;
  std::vector<ParallelPart> head;
  for (std::size_t i = 0; i < d; ++i) head.push_back({coord_net(coord_pos[i]), all});
  head.push_back({mask_net(mask_pos), all});
  for (std::size_t i = 0; i < d; ++i) head.push_back({coord_net(coord_neg[i]), all});
  head.push_back({mask_net(mask_neg), all});
  for (std::size_t i = 0; i < d; ++i) head.push_back({build_identity(), {i}});
  Network stage_a = parallel(head, d);

  // stage B: (f+, m+, f-, m-)
  Network bump = build_bump(d, spec.delta2);
  std::vector<std::size_t> sel_pos, sel_neg;
  for (std::size_t i = 0; i < d; ++i) sel_pos.push_back(i);
  for (std::size_t i = 0; i < d; ++i) sel_pos.push_back(2 * d + 2 + i);
  for (std::size_t i = 0; i < d; ++i) sel_neg.push_back(d + 1 + i);
  for (std::size_t i = 0; i < d; ++i) sel_neg.push_back(2 * d + 2 + i);
  Network stage_b = parallel({{bump, sel_pos},
                              {build_identity(), {d}},
                              {bump, sel_neg},
                              {build_identity(), {2 * d + 1}}},
                             3 * d + 2);

  // stage C: (g+, g-) = (min(f+, m+), min(f-, m-))
  Network stage_c = parallel({{build_min(), {0, 1}}, {build_min(), {2, 3}}}, 4);

  // stage D: the clamp((2g+ - 2g-) + u, -1, 1) of the construction, realized
  // in a saturating form that is bit-exact at every contract point:
  //   sat(g) = 1 - sigma(1 - sigma(2g))   (exactly 0/1 when g is)
  //   q = sigma(1 - sat+ - sat-)          (exactly 1 on the plateau)
  //   out = sat+ - sat- + u * q
  // u only ever multiplies the exact 0/1 gate q, so no low bits are lost,
  // and the output range stays inside [-1, 1] for all inputs.
  AffineLayer d1(2, 2);
  d1.at(0, 0) = 2.0;  // sigma(2 g+)
  d1.at(1, 1) = 2.0;  // sigma(2 g-)
  AffineLayer d2(2, 2);
  d2.at(0, 0) = -1.0;
  d2.b[0] = 1.0;  // h+ = sigma(1 - s+)
  d2.at(1, 1) = -1.0;
  d2.b[1] = 1.0;  // h- = sigma(1 - s-)
  AffineLayer d3(3, 2);
  d3.at(0, 0) = 1.0;  // carry h+
  d3.at(1, 1) = 1.0;  // carry h-
  d3.at(2, 0) = 1.0;  // q = sigma(h+ + h- - 1)
  d3.at(2, 1) = 1.0;
  d3.b[2] = -1.0;
  AffineLayer dout(1, 3);
  dout.at(0, 0) = -1.0;  // sat+ = 1 - h+ and sat- = 1 - h- cancel the ones
  dout.at(0, 1) = 1.0;
  dout.at(0, 2) = spec.level;
  Network clamp = Network({d1, d2, d3, dout});

  Network out = compose(clamp, compose(stage_c, compose(stage_b, stage_a)));
  if (report) {
    report->depth = out.depth();
    report->width = out.width();
    const double log_term = std::max(1.0, std::log2(1.0 / spec.delta2));
    const double nn = static_cast<double>(n_param), ll = static_cast<double>(l_param);
    if (variant == FitVariant::series) {
      report->c_depth = static_cast<double>(out.depth()) / (ll * log_term);
      report->c_width = static_cast<double>(out.width()) / nn;
    } else {
      report->c_depth = static_cast<double>(out.depth()) / ll;
      report->c_width = static_cast<double>(out.width()) / (nn * log_term);
    }
  }
  return out;
}

}  // namespace htreg
