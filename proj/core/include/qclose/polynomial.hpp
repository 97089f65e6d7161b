#pragma once

#include <array>
#include <string>
#include <vector>

#include "qclose/quaternion.hpp"

namespace qclose {

struct Monomial {
  double coeff = 0.0;
  std::array<int, 3> exps{0, 0, 0};
};

// Sparse polynomial in (x, y, z). Terms are kept sorted by exponent with no duplicates or zeros.
class PolynomialR3 {
 public:
  PolynomialR3() = default;
  explicit PolynomialR3(std::vector<Monomial> terms);

  static PolynomialR3 constant(double c);
  static PolynomialR3 monomial(double c, int ex, int ey, int ez);
  static PolynomialR3 x() { return monomial(1, 1, 0, 0); }
  static PolynomialR3 y() { return monomial(1, 0, 1, 0); }
  static PolynomialR3 z() { return monomial(1, 0, 0, 1); }

  const std::vector<Monomial>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  // Total degree of the highest term; -1 for the zero polynomial.
  int degree() const;
  bool is_homogeneous() const;
  double max_abs_coeff() const;

  double eval(const Vec3& r) const;
  PolynomialR3 derivative(int axis) const;
  PolynomialR3 laplacian() const;
  PolynomialR3 pow(int n) const;

  PolynomialR3& operator+=(const PolynomialR3& o);
  PolynomialR3& operator-=(const PolynomialR3& o);
  PolynomialR3& operator*=(double a);

  // Drops terms with |coeff| <= tol * max|coeff|.
  PolynomialR3 pruned(double tol) const;
  std::string to_string() const;

 private:
  void canonicalize();
  std::vector<Monomial> terms_;
};

PolynomialR3 operator+(PolynomialR3 a, const PolynomialR3& b);
PolynomialR3 operator-(PolynomialR3 a, const PolynomialR3& b);
PolynomialR3 operator*(const PolynomialR3& a, const PolynomialR3& b);
PolynomialR3 operator*(double c, PolynomialR3 a);
bool operator==(const PolynomialR3& a, const PolynomialR3& b);

// Powers x^0..x^d, y^0..y^d, z^0..z^d of one point, reused across many monomials.
struct PowerTable {
  std::array<std::vector<double>, 3> pw;
  PowerTable(const Vec3& r, int max_degree);
  double operator()(const std::array<int, 3>& e) const { return pw[0][e[0]] * pw[1][e[1]] * pw[2][e[2]]; }
};

}  // namespace qclose
