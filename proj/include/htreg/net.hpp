#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace htreg {

inline void contract_violation(const std::string& what) {
  throw std::invalid_argument(what);
}

/// One affine map x -> W x + b, stored row-major.
struct AffineLayer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> w;  // rows*cols, row-major
  std::vector<double> b;  // rows

  AffineLayer() = default;
  AffineLayer(std::size_t r, std::size_t c)
      : rows(r), cols(c), w(r * c, 0.0), b(r, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return w[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return w[i * cols + j]; }
};

/// Fully-connected ReLU network: f = A_{L+1} o sigma o A_L o ... o sigma o A_1.
/// depth() is the number of ReLU applications (= layers-1); a single affine
/// map is a valid network of depth 0. Immutable after construction; evaluate
/// is pure and safe to call concurrently. The constructive builders emit
/// very sparse layers, so evaluation runs over a compressed-row view built
/// once here; skipping exact-zero terms leaves every partial sum bit-equal
/// to the dense loop.
class Network {
 public:
  explicit Network(std::vector<AffineLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) contract_violation("Network: needs at least one affine layer");
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
      if (layers_[i + 1].cols != layers_[i].rows)
        contract_violation("Network: layer " + std::to_string(i + 1) +
                           " expects input dim " + std::to_string(layers_[i + 1].cols) +
                           " but previous layer outputs " + std::to_string(layers_[i].rows));
    }
    for (const auto& l : layers_) {
      for (double v : l.w)
        if (!std::isfinite(v)) contract_violation("Network: non-finite weight");
      for (double v : l.b)
        if (!std::isfinite(v)) contract_violation("Network: non-finite bias");
    }
    sparse_.reserve(layers_.size());
    for (const auto& l : layers_) {
      SparseLayer s;
      s.row_ptr.reserve(l.rows + 1);
      s.row_ptr.push_back(0);
      for (std::size_t i = 0; i < l.rows; ++i) {
        for (std::size_t j = 0; j < l.cols; ++j) {
          const double v = l.w[i * l.cols + j];
          if (v != 0.0) {
            s.col.push_back(j);
            s.val.push_back(v);
          }
        }
        s.row_ptr.push_back(s.col.size());
      }
      sparse_.push_back(std::move(s));
    }
  }

  std::size_t input_dim() const { return layers_.front().cols; }
  std::size_t output_dim() const { return layers_.back().rows; }
  std::size_t depth() const { return layers_.size() - 1; }

  /// Max hidden dimension (0 for a pure affine map).
  std::size_t width() const {
    std::size_t w = 0;
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) w = std::max(w, layers_[i].rows);
    return w;
  }

  const std::vector<AffineLayer>& layers() const { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.w.size() + l.b.size();
    return n;
  }

  std::vector<double> evaluate(const std::vector<double>& x) const {
    if (x.size() != input_dim())
      contract_violation("evaluate: expected input length " + std::to_string(input_dim()) +
                         ", got " + std::to_string(x.size()));
    std::vector<double> cur = x, next;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const AffineLayer& l = layers_[i];
      const SparseLayer& s = sparse_[i];
      next.assign(l.rows, 0.0);
      for (std::size_t r = 0; r < l.rows; ++r) {
        double acc = l.b[r];
        for (std::size_t k = s.row_ptr[r]; k < s.row_ptr[r + 1]; ++k)
          acc += s.val[k] * cur[s.col[k]];
        next[r] = (i + 1 < layers_.size() && acc < 0.0) ? 0.0 : acc;
      }
      cur.swap(next);
    }
    return cur;
  }

  double evaluate_scalar(const std::vector<double>& x) const {
    if (output_dim() != 1) contract_violation("evaluate_scalar: output_dim != 1");
    return evaluate(x)[0];
  }

  bool structurally_equal(const Network& o) const {
    if (layers_.size() != o.layers_.size()) return false;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto &a = layers_[i], &b = o.layers_[i];
      if (a.rows != b.rows || a.cols != b.cols || a.w != b.w || a.b != b.b) return false;
    }
    return true;
  }

 private:
  struct SparseLayer {
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col;
    std::vector<double> val;
  };

  std::vector<AffineLayer> layers_;
  std::vector<SparseLayer> sparse_;
};

/// Output truncation T_M u = sgn(u)(|u| ^ M) as a wrapper around a scalar net.
struct TruncatedNetwork {
  Network inner;
  double level;

  TruncatedNetwork(Network net, double m) : inner(std::move(net)), level(m) {
    if (inner.output_dim() != 1) contract_violation("TruncatedNetwork: output_dim != 1");
    if (!(m > 0.0)) contract_violation("TruncatedNetwork: level M must be > 0");
  }
};

inline double evaluate_truncated(const TruncatedNetwork& tn, const std::vector<double>& x) {
  const double u = tn.inner.evaluate_scalar(x);
  return std::clamp(u, -tn.level, tn.level);
}

inline TruncatedNetwork truncate(Network net, double m) { return TruncatedNetwork(std::move(net), m); }

/// Expanded form of T_M: appends sigma(2M - sigma(M - u)) - M as two extra
/// ReLU layers, so truncation stays inside the network class.
inline Network truncate_expanded(const Network& net, double m) {
  if (net.output_dim() != 1) contract_violation("truncate_expanded: output_dim != 1");
  if (!(m > 0.0)) contract_violation("truncate_expanded: level M must be > 0");
  auto layers = net.layers();
  AffineLayer& out = layers.back();
  // v = M - u becomes the new hidden unit feeding sigma.
  for (double& v : out.w) v = -v;
  out.b[0] = m - out.b[0];
  AffineLayer mid(1, 1);
  mid.at(0, 0) = -1.0;
  mid.b[0] = 2.0 * m;
  AffineLayer last(1, 1);
  last.at(0, 0) = 1.0;
  last.b[0] = -m;
  layers.push_back(std::move(mid));
  layers.push_back(std::move(last));
  return Network(std::move(layers));
}

namespace detail {

/// Lifts a depth-0 affine map A to an equivalent depth-1 network via the
/// [A; -A] split, usable where a hidden layer is structurally required.
inline Network lift_affine(const Network& net) {
  if (net.depth() != 0) contract_violation("lift_affine: expects depth 0");
  const AffineLayer& a = net.layers()[0];
  AffineLayer h(2 * a.rows, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) {
      h.at(i, j) = a.at(i, j);
      h.at(a.rows + i, j) = -a.at(i, j);
    }
  for (std::size_t i = 0; i < a.rows; ++i) {
    h.b[i] = a.b[i];
    h.b[a.rows + i] = -a.b[i];
  }
  AffineLayer o(a.rows, 2 * a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    o.at(i, i) = 1.0;
    o.at(i, a.rows + i) = -1.0;
  }
  return Network({std::move(h), std::move(o)});
}

}  // namespace detail

/// Pads a network to exactly (target_depth, target_width) without changing
/// the function it computes. Depth is added as identity layers right after
/// the first hidden layer; each identity channel uses the two-unit
/// sigma(x)-sigma(-x) gadget when the target width allows, and otherwise the
/// one-unit sigma(x) form, which is exact there because post-ReLU activations
/// are nonnegative. Width is padded with dead units on every hidden layer.
inline Network pad(const Network& net, std::size_t target_depth, std::size_t target_width) {
  if (net.depth() < 1) contract_violation("pad: network depth must be >= 1");
  if (target_depth < net.depth()) contract_violation("pad: target_depth below current depth");
  if (target_width < net.width()) contract_violation("pad: target_width below current width");

  std::vector<AffineLayer> layers = net.layers();
  const std::size_t extra = target_depth - net.depth();
  if (extra > 0) {
    const std::size_t c = layers[0].rows;  // channels after the first hidden layer
    const bool two_unit = 2 * c <= target_width;
    const std::size_t g = two_unit ? 2 * c : c;
    std::vector<AffineLayer> inserted;
    for (std::size_t k = 0; k < extra; ++k) {
      const std::size_t in = (k == 0) ? c : g;
      AffineLayer id(g, in);
      for (std::size_t i = 0; i < c; ++i) {
        if (k == 0) {
          id.at(i, i) = 1.0;
          if (two_unit) id.at(c + i, i) = -1.0;
        } else {
          // recombine previous gadget pair, then split again
          id.at(i, i) = 1.0;
          if (two_unit) {
            id.at(i, c + i) = -1.0;
            id.at(c + i, i) = -1.0;
            id.at(c + i, c + i) = 1.0;
          }
        }
      }
      inserted.push_back(std::move(id));
    }
    // successor layer must recombine the last inserted gadget
    AffineLayer& succ = layers[1];
    AffineLayer merged(succ.rows, g);
    for (std::size_t i = 0; i < succ.rows; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        merged.at(i, j) = succ.at(i, j);
        if (two_unit) merged.at(i, c + j) = -succ.at(i, j);
      }
      merged.b[i] = succ.b[i];
    }
    layers[1] = std::move(merged);
    layers.insert(layers.begin() + 1, inserted.begin(), inserted.end());
  }

  // width padding: grow every hidden layer to target_width with dead units
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    const std::size_t r = layers[i].rows;
    if (r == target_width) continue;
    AffineLayer grown(target_width, layers[i].cols);
    for (std::size_t a = 0; a < r; ++a) {
      for (std::size_t j = 0; j < layers[i].cols; ++j) grown.at(a, j) = layers[i].at(a, j);
      grown.b[a] = layers[i].b[a];
    }
    layers[i] = std::move(grown);
    AffineLayer& nxt = layers[i + 1];
    AffineLayer fixed(nxt.rows, target_width);
    for (std::size_t a = 0; a < nxt.rows; ++a) {
      for (std::size_t j = 0; j < r; ++j) fixed.at(a, j) = nxt.at(a, j);
      fixed.b[a] = nxt.b[a];
    }
    layers[i + 1] = std::move(fixed);
  }
  return Network(std::move(layers));
}

/// Network composition g o f with the boundary affine maps merged:
/// W'_1 = W^g_1 W^f_{L+1}, b'_1 = W^g_1 b^f_{L+1} + b^g_1.
inline Network compose(const Network& g, const Network& f) {
  if (f.output_dim() != g.input_dim())
    contract_violation("compose: f.output_dim " + std::to_string(f.output_dim()) +
                       " != g.input_dim " + std::to_string(g.input_dim()));
  const auto& fl = f.layers();
  const auto& gl = g.layers();
  const AffineLayer& fo = fl.back();
  const AffineLayer& g1 = gl.front();
  AffineLayer merged(g1.rows, fo.cols);
  for (std::size_t i = 0; i < g1.rows; ++i) {
    for (std::size_t j = 0; j < fo.cols; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < fo.rows; ++k) acc += g1.at(i, k) * fo.at(k, j);
      merged.at(i, j) = acc;
    }
    double acc = g1.b[i];
    for (std::size_t k = 0; k < fo.rows; ++k) acc += g1.at(i, k) * fo.b[k];
    merged.b[i] = acc;
  }
  std::vector<AffineLayer> layers(fl.begin(), fl.end() - 1);
  layers.push_back(std::move(merged));
  layers.insert(layers.end(), gl.begin() + 1, gl.end());
  return Network(std::move(layers));
}

/// A part of a parallel stack: a network plus the indices of the shared
/// input it reads (part.input_dim() == selection.size()).
struct ParallelPart {
  Network net;
  std::vector<std::size_t> selection;
};

/// Network parallelization over a shared input of dimension `input_dim`.
/// All parts are padded to a common depth first; outputs are concatenated in
/// part order. Depth is the max part depth, width at most the sum of part
/// widths (plus identity-gadget slack from depth padding).
inline Network parallel(const std::vector<ParallelPart>& parts, std::size_t input_dim) {
  if (parts.empty()) contract_violation("parallel: empty parts list");
  std::size_t common_depth = 1;
  for (const auto& p : parts) {
    if (p.net.input_dim() != p.selection.size())
      contract_violation("parallel: selection length != part input_dim");
    for (std::size_t idx : p.selection)
      if (idx >= input_dim) contract_violation("parallel: selection index out of range");
    common_depth = std::max(common_depth, p.net.depth());
  }
  std::vector<Network> padded;
  padded.reserve(parts.size());
  for (const auto& p : parts) {
    Network n = p.net.depth() == 0 ? detail::lift_affine(p.net) : p.net;
    if (n.depth() < common_depth) n = pad(n, common_depth, n.width());
    padded.push_back(std::move(n));
  }

  std::vector<AffineLayer> layers;
  for (std::size_t li = 0; li <= common_depth; ++li) {
    std::size_t rows = 0;
    for (const auto& n : padded) rows += n.layers()[li].rows;
    std::size_t cols;
    if (li == 0) {
      cols = input_dim;
    } else {
      cols = 0;
      for (const auto& n : padded) cols += n.layers()[li].cols;
    }
    AffineLayer L(rows, cols);
    std::size_t ro = 0, co = 0;
    for (std::size_t pi = 0; pi < padded.size(); ++pi) {
      const AffineLayer& pl = padded[pi].layers()[li];
      for (std::size_t i = 0; i < pl.rows; ++i) {
        L.b[ro + i] = pl.b[i];
        for (std::size_t j = 0; j < pl.cols; ++j) {
          const std::size_t col = (li == 0) ? parts[pi].selection[j] : co + j;
          L.at(ro + i, col) += pl.at(i, j);  // += so repeated selections accumulate
        }
      }
      ro += pl.rows;
      if (li != 0) co += pl.cols;
    }
    layers.push_back(std::move(L));
  }
  return Network(std::move(layers));
}

/// Applies an affine map to the outputs of a network without adding depth.
inline Network affine_then(const Network& net, const AffineLayer& post) {
  AffineLayer out(post.rows, post.cols);
  out = post;
  std::vector<AffineLayer> single{std::move(out)};
  return compose(Network(std::move(single)), net);
}

/// Applies an affine map to the inputs of a network without adding depth.
inline Network then_affine(const Network& net, const AffineLayer& pre) {
  std::vector<AffineLayer> single{pre};
  return compose(net, Network(std::move(single)));
}

}  // namespace htreg
