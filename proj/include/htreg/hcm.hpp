#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "htreg/net.hpp"

namespace htreg {

/// One (beta, C)-smooth building block with a hand-declared certificate:
/// smoothness beta, arity t, a sup bound on its output over the declared
/// input box, and a Lipschitz constant there. Certificates come from the
/// closed forms, not estimation, which keeps gamma* = min beta/t truthful.
struct SmoothComponent {
  std::string id;
  std::size_t arity = 1;
  double beta = 1.0;
  double lipschitz = 1.0;
  double sup_bound = 1.0;
  std::function<double(const std::vector<double>&)> eval;
};

inline SmoothComponent comp_square() {
  return {"square", 1, 2.0, 2.0, 1.0, [](const std::vector<double>& z) { return z[0] * z[0]; }};
}

inline SmoothComponent comp_sin_half() {
  // sin(pi z)/2; third derivative bounded, declared beta = 3
  return {"sin_half", 1, 3.0, M_PI / 2.0, 0.5,
          [](const std::vector<double>& z) { return 0.5 * std::sin(M_PI * z[0]); }};
}

inline SmoothComponent comp_product2() {
  return {"product2", 2, 2.0, std::sqrt(2.0), 1.0,
          [](const std::vector<double>& z) { return z[0] * z[1]; }};
}

inline SmoothComponent comp_mean2() {
  return {"mean2", 2, 2.0, std::sqrt(0.5), 1.0,
          [](const std::vector<double>& z) { return 0.5 * (z[0] + z[1]); }};
}

inline SmoothComponent comp_absdiff_half() {
  // |a-b|/2 is (1,C)-smooth and nothing more
  return {"absdiff_half", 2, 1.0, std::sqrt(0.5), 1.0,
          [](const std::vector<double>& z) { return 0.5 * std::abs(z[0] - z[1]); }};
}

/// One node of the composition DAG: a component applied to either input
/// coordinates (level 0) or to the previous level's node outputs.
struct HcmNode {
  SmoothComponent component;
  std::vector<std::size_t> inputs;  // indices into x (level 0) or previous level
};

/// Hierarchical composition model instance with a known gamma*.
class HcmFunction {
 public:
  HcmFunction(std::string name, std::size_t input_dim, std::vector<std::vector<HcmNode>> levels,
              double sup_bound)
      : name_(std::move(name)), d_(input_dim), levels_(std::move(levels)), bound_(sup_bound) {
    if (levels_.empty() || levels_.back().size() != 1)
      contract_violation("HcmFunction: final level must have exactly one node");
    std::size_t prev = d_;
    for (const auto& level : levels_) {
      for (const auto& node : level) {
        if (node.inputs.size() != node.component.arity)
          contract_violation("HcmFunction: node arity mismatch");
        for (std::size_t idx : node.inputs)
          if (idx >= prev) contract_violation("HcmFunction: node input index out of range");
      }
      prev = level.size();
    }
  }

  const std::string& name() const { return name_; }
  std::size_t input_dim() const { return d_; }
  double sup_bound() const { return bound_; }

  /// gamma* = min over components of beta/arity.
  double gamma_star() const {
    double g = std::numeric_limits<double>::infinity();
    for (const auto& level : levels_)
      for (const auto& node : level)
        g = std::min(g, node.component.beta / static_cast<double>(node.component.arity));
    return g;
  }

  double evaluate(const std::vector<double>& x) const {
    if (x.size() != d_) contract_violation("HcmFunction: input dim mismatch");
    std::vector<double> cur = x, next;
    for (const auto& level : levels_) {
      next.clear();
      for (const auto& node : level) {
        std::vector<double> z(node.inputs.size());
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = cur[node.inputs[i]];
        next.push_back(node.component.eval(z));
      }
      cur = next;
    }
    return cur[0];
  }

  std::function<double(const std::vector<double>&)> as_fn() const {
    return [self = *this](const std::vector<double>& x) { return self.evaluate(x); };
  }

  const std::vector<std::vector<HcmNode>>& levels() const { return levels_; }

 private:
  std::string name_;
  std::size_t d_;
  std::vector<std::vector<HcmNode>> levels_;
  double bound_;
};

inline double evaluate_hcm(const HcmFunction& h, const std::vector<double>& x) {
  return h.evaluate(x);
}

/// Named ground-truth presets spanning gamma* in {0.5, 1, 2} and d in
/// {1, 3, 5}, each with a closed form documented in the README.
inline std::vector<HcmFunction> library_instances() {
  std::vector<HcmFunction> out;
  // gamma05-d1: |x^2 - sin(pi x)/2| / 2; gamma* = min(2, 3, 1/2) = 1/2
  out.emplace_back("gamma05-d1", 1,
                   std::vector<std::vector<HcmNode>>{
                       {{comp_square(), {0}}, {comp_sin_half(), {0}}},
                       {{comp_absdiff_half(), {0, 1}}},
                   },
                   1.0);
  // gamma1-d3: (x1 x2 + sin(pi x3)/2) / 2; gamma* = min(1, 3, 1) = 1
  out.emplace_back("gamma1-d3", 3,
                   std::vector<std::vector<HcmNode>>{
                       {{comp_product2(), {0, 1}}, {comp_sin_half(), {2}}},
                       {{comp_mean2(), {0, 1}}},
                   },
                   1.0);
  // gamma2-d5: sin(pi x3^2)/2; gamma* = min(2, 3) = 2
  out.emplace_back("gamma2-d5", 5,
                   std::vector<std::vector<HcmNode>>{
                       {{comp_square(), {2}}},
                       {{comp_sin_half(), {0}}},
                   },
                   1.0);
  return out;
}

inline const HcmFunction& find_instance(const std::vector<HcmFunction>& lib,
                                        const std::string& name) {
  for (const auto& h : lib)
    if (h.name() == name) return h;
  contract_violation("unknown f0 preset '" + name + "'");
  return lib.front();
}

}  // namespace htreg
