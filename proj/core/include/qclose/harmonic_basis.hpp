#pragma once

#include <array>
#include <utility>
#include <vector>

#include "qclose/polynomial.hpp"
#include "qclose/quaternion.hpp"

namespace qclose {

// Gradient of a homogeneous harmonic polynomial of degree k, as a pure quaternion field.
struct BasisFunction {
  int k = 1;
  int l = 1;
  std::array<PolynomialR3, 3> comp;
};

// Degree-k harmonic polynomials for k = 1..p; entry k-1 holds exactly k polynomials.
std::vector<std::vector<PolynomialR3>> basis_polynomials(int p);

// Solid harmonic rho^k cos(m phi) P_k^m(cos theta) in Cartesian form, scaled to unit max coefficient.
PolynomialR3 solid_harmonic(int k, int m);

// p(p+1)/2 gradients ordered (1,1), (2,1), (2,2), (3,1), ...
// Throws std::runtime_error if the gradients within a degree fail the rank check.
std::vector<BasisFunction> basis_gradients(int p);

Quaternion eval_basis(const BasisFunction& f, const Vec3& r);

// Position of (k, l) in the ordering used by basis_gradients.
inline int basis_index(int k, int l) { return k * (k - 1) / 2 + (l - 1); }
inline int basis_count(int p) { return p * (p + 1) / 2; }

// Compiled basis for repeated evaluation of all functions (and their Jacobians) at a point.
class BasisSet {
 public:
  explicit BasisSet(int p);

  int order() const { return p_; }
  int size() const { return static_cast<int>(funcs_.size()); }
  const BasisFunction& function(int j) const { return funcs_[j]; }
  int degree(int j) const { return funcs_[j].k; }

  // out[j] = f_j(r), j = 0..size()-1.
  void eval(const Vec3& r, Vec3* out) const;
  // jac[j](a, b) = d f_j[a] / d r_b.
  void eval_jacobian(const Vec3& r, Eigen::Matrix3d* jac) const;

 private:
  struct Term {
    double c;
    std::array<int, 3> e;
  };
  using CompiledPoly = std::vector<Term>;
  int p_;
  std::vector<BasisFunction> funcs_;
  std::vector<std::array<CompiledPoly, 3>> value_;
  std::vector<std::array<std::array<CompiledPoly, 3>, 3>> jacobian_;
};

}  // namespace qclose
