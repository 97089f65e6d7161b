#include "qclose/harmonic_basis.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace qclose {

namespace {

using P = PolynomialR3;

P mono(double c, int a, int b, int d) { return P::monomial(c, a, b, d); }

std::vector<P> explicit_set(int k) {
  const P x = P::x(), y = P::y(), z = P::z();
  switch (k) {
    case 1:
      return {z};
    case 2:
      return {x.pow(2) - z.pow(2), y.pow(2) - z.pow(2)};
    case 3:
      return {x.pow(3) - 3.0 * x * z.pow(2), y.pow(3) - 3.0 * y * z.pow(2), x * y * z};
    case 4:
      return {x.pow(4) - 6.0 * x.pow(2) * z.pow(2) + z.pow(4),
              y.pow(4) - 6.0 * y.pow(2) * z.pow(2) + z.pow(4),
              3.0 * x.pow(2) * y * z - y * z.pow(3),
              3.0 * x * y.pow(2) * z - x * z.pow(3)};
    case 5:
      return {x.pow(5) - 10.0 * x.pow(3) * z.pow(2) + 5.0 * x * z.pow(4),
              y.pow(5) - 10.0 * y.pow(3) * z.pow(2) + 5.0 * y * z.pow(4),
              x.pow(4) * y - 6.0 * x.pow(2) * y * z.pow(2) + y * z.pow(4),
              x * y.pow(4) - 6.0 * x * y.pow(2) * z.pow(2) + x * z.pow(4),
              mono(-15, 2, 2, 1) + mono(5, 2, 0, 3) + mono(5, 0, 2, 3) - z.pow(5)};
    case 6:
      return {x.pow(6) - 15.0 * x.pow(4) * z.pow(2) + 15.0 * x.pow(2) * z.pow(4) - z.pow(6),
              y.pow(6) - 15.0 * y.pow(4) * z.pow(2) + 15.0 * y.pow(2) * z.pow(4) - z.pow(6),
              mono(1, 5, 1, 0) + mono(-10, 3, 1, 2) + mono(5, 1, 1, 4),
              mono(1, 1, 5, 0) + mono(-10, 1, 3, 2) + mono(5, 1, 1, 4),
              mono(5, 4, 1, 1) + mono(-10, 2, 3, 1) + mono(1, 0, 5, 1),
              mono(5, 1, 4, 1) + mono(-10, 3, 2, 1) + mono(1, 5, 0, 1)};
    case 7:
      return {mono(1, 7, 0, 0) + mono(-7, 1, 0, 6) + mono(35, 3, 0, 4) + mono(-21, 5, 0, 2),
              mono(1, 0, 7, 0) + mono(-7, 0, 1, 6) + mono(35, 0, 3, 4) + mono(-21, 0, 5, 2),
              mono(1, 6, 1, 0) + mono(-15, 4, 1, 2) + mono(15, 2, 1, 4) + mono(-1, 0, 1, 6),
              mono(1, 1, 6, 0) + mono(-15, 1, 4, 2) + mono(15, 1, 2, 4) + mono(-1, 1, 0, 6),
              mono(3, 5, 2, 0) + mono(-3, 5, 0, 2) + mono(-30, 3, 2, 2) + mono(10, 3, 0, 4) +
                  mono(15, 1, 2, 4) + mono(-3, 1, 0, 6),
              mono(3, 2, 5, 0) + mono(-3, 0, 5, 2) + mono(-30, 2, 3, 2) + mono(15, 2, 1, 4) +
                  mono(10, 0, 3, 4) + mono(-3, 0, 1, 6),
              mono(3, 5, 1, 1) + mono(-10, 3, 3, 1) + mono(3, 1, 5, 1)};
    default:
      throw std::logic_error("no explicit harmonic set for degree " + std::to_string(k));
  }
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

void check_rank(const std::vector<BasisFunction>& funcs, int first, int count, int k) {
  std::mt19937_64 rng(12345u + static_cast<unsigned>(k));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int npts = 3 * count;
  Eigen::MatrixXd S(count, 3 * npts);
  std::vector<Vec3> pts(npts);
  for (auto& q : pts) q = Vec3(u(rng), u(rng), u(rng));
  for (int j = 0; j < count; ++j)
    for (int i = 0; i < npts; ++i) {
      const Quaternion g = eval_basis(funcs[first + j], pts[i]);
      for (int a = 0; a < 3; ++a) S(j, 3 * i + a) = g.v[a];
    }
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(S).singularValues();
  if (sv[count - 1] <= 1e-10 * sv[0])
    throw std::runtime_error("harmonic basis gradients of degree " + std::to_string(k) +
                             " are numerically dependent");
}

}  // namespace

PolynomialR3 solid_harmonic(int k, int m) {
  if (m < 0 || m > k) throw std::invalid_argument("solid_harmonic: need 0 <= m <= k");
  const P x = P::x(), y = P::y(), z = P::z();
  // Re (x + i y)^m
  P azimuthal;
  for (int j = 0; j <= m; j += 2) {
    const double sign = (j / 2) % 2 == 0 ? 1.0 : -1.0;
    azimuthal += sign * binomial(m, j) * mono(1, m - j, j, 0);
  }
  // rho^(k-m) P_k^(m)(z / rho) as a polynomial in z and rho^2.
  const P rho2 = x.pow(2) + y.pow(2) + z.pow(2);
  P polar;
  for (int j = 0; 2 * j <= k - m; ++j) {
    const double sign = j % 2 == 0 ? 1.0 : -1.0;
    const double a = sign * factorial(2 * k - 2 * j) /
                     (std::pow(2.0, k) * factorial(j) * factorial(k - j) * factorial(k - 2 * j - m));
    polar += a * z.pow(k - m - 2 * j) * rho2.pow(j);
  }
  P h = azimuthal * polar;
  h = h.pruned(1e-15);
  h *= 1.0 / h.max_abs_coeff();
  return h;
}

std::vector<std::vector<PolynomialR3>> basis_polynomials(int p) {
  if (p < 1) throw std::invalid_argument("basis_polynomials: p must be >= 1");
  std::vector<std::vector<PolynomialR3>> out;
  for (int k = 1; k <= p; ++k) {
    if (k <= 7) {
      out.push_back(explicit_set(k));
    } else {
      std::vector<PolynomialR3> set;
      for (int m = 1; m <= k; ++m) set.push_back(solid_harmonic(k, m));
      out.push_back(std::move(set));
    }
  }
  return out;
}

std::vector<BasisFunction> basis_gradients(int p) {
  const auto polys = basis_polynomials(p);
  std::vector<BasisFunction> funcs;
  for (int k = 1; k <= p; ++k) {
    const int first = static_cast<int>(funcs.size());
    for (int l = 1; l <= k; ++l) {
      const auto& h = polys[k - 1][l - 1];
      funcs.push_back({k, l, {h.derivative(0), h.derivative(1), h.derivative(2)}});
    }
    if (k > 7) check_rank(funcs, first, k, k);
  }
  return funcs;
}

Quaternion eval_basis(const BasisFunction& f, const Vec3& r) {
  return Quaternion::pure(Vec3(f.comp[0].eval(r), f.comp[1].eval(r), f.comp[2].eval(r)));
}

BasisSet::BasisSet(int p) : p_(p), funcs_(basis_gradients(p)) {
  auto compile = [](const PolynomialR3& q) {
    CompiledPoly c;
    for (const auto& t : q.terms()) c.push_back({t.coeff, t.exps});
    return c;
  };
  for (const auto& f : funcs_) {
    std::array<CompiledPoly, 3> v;
    std::array<std::array<CompiledPoly, 3>, 3> jac;
    for (int a = 0; a < 3; ++a) {
      v[a] = compile(f.comp[a]);
      for (int b = 0; b < 3; ++b) jac[a][b] = compile(f.comp[a].derivative(b));
    }
    value_.push_back(std::move(v));
    jacobian_.push_back(std::move(jac));
  }
}

void BasisSet::eval(const Vec3& r, Vec3* out) const {
  const PowerTable pt(r, p_);
  for (size_t j = 0; j < funcs_.size(); ++j)
    for (int a = 0; a < 3; ++a) {
      double s = 0.0;
      for (const auto& t : value_[j][a]) s += t.c * pt(t.e);
      out[j][a] = s;
    }
}

void BasisSet::eval_jacobian(const Vec3& r, Eigen::Matrix3d* jac) const {
  const PowerTable pt(r, p_);
  for (size_t j = 0; j < funcs_.size(); ++j)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        double s = 0.0;
        for (const auto& t : jacobian_[j][a][b]) s += t.c * pt(t.e);
        jac[j](a, b) = s;
      }
}

}  // namespace qclose
