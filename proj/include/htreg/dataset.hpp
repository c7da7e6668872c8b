#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace htreg {

/// Supervised sample {(X_i, Y_i)} with X in [0,1]^d, row-major storage.
struct Dataset {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> X;  // n*d
  std::vector<double> Y;  // n

  Dataset() = default;
  Dataset(std::size_t n_, std::size_t d_) : n(n_), d(d_), X(n_ * d_, 0.0), Y(n_, 0.0) {}

  double x(std::size_t i, std::size_t j) const { return X[i * d + j]; }
  double& x(std::size_t i, std::size_t j) { return X[i * d + j]; }

  void row(std::size_t i, std::vector<double>& out) const {
    out.assign(X.begin() + static_cast<std::ptrdiff_t>(i * d),
               X.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
  }
};

}  // namespace htreg
