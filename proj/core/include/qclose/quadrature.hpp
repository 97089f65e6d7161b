#pragma once

#include <Eigen/Core>
#include <vector>

namespace qclose {

struct QuadratureRule {
  std::vector<double> x;
  std::vector<double> w;
  int size() const { return static_cast<int>(x.size()); }
};

// n-point Gauss-Legendre rule on [-1, 1]; cached, thread-safe.
const QuadratureRule& gauss_legendre(int n);
// Same rule mapped to [0, 1].
const QuadratureRule& gauss_legendre_unit(int n);

// Row i holds the Lagrange basis polynomials on `nodes` evaluated at `targets[i]`.
Eigen::MatrixXd lagrange_matrix(const std::vector<double>& nodes, const std::vector<double>& targets);

}  // namespace qclose
