#include <gtest/gtest.h>

#include <random>

#include "qclose/harmonic_basis.hpp"

using namespace qclose;

TEST(HarmonicBasis, PolynomialsAreHarmonicAndHomogeneous) {
  const auto polys = basis_polynomials(8);
  ASSERT_EQ(polys.size(), 8u);
  for (int k = 1; k <= 8; ++k) {
    ASSERT_EQ(static_cast<int>(polys[k - 1].size()), k);
    for (const PolynomialR3& h : polys[k - 1]) {
      EXPECT_TRUE(h.is_homogeneous());
      EXPECT_EQ(h.degree(), k);
      EXPECT_LT(h.laplacian().max_abs_coeff(), 1e-13 * k * k * h.max_abs_coeff()) << h.to_string();
    }
  }
}

TEST(HarmonicBasis, SolidHarmonicsMatchLegendreForm) {
  // rho^2 P_2(cos theta) = z^2 - (x^2 + y^2) / 2.
  const PolynomialR3 h = solid_harmonic(2, 0);
  const Vec3 r(0.3, -0.4, 0.8);
  const double ref = r.z() * r.z() - 0.5 * (r.x() * r.x() + r.y() * r.y());
  EXPECT_NEAR(h.eval(r) / h.eval(Vec3(0, 0, 1)), ref, 1e-14);
}

TEST(HarmonicBasis, GradientsAreDivergenceAndCurlFree) {
  const auto fs = basis_gradients(7);
  ASSERT_EQ(static_cast<int>(fs.size()), basis_count(7));
  for (const BasisFunction& f : fs) {
    PolynomialR3 div, c0, c1, c2;
    for (int a = 0; a < 3; ++a) div += f.comp[a].derivative(a);
    c0 = f.comp[2].derivative(1) - f.comp[1].derivative(2);
    c1 = f.comp[0].derivative(2) - f.comp[2].derivative(0);
    c2 = f.comp[1].derivative(0) - f.comp[0].derivative(1);
    EXPECT_TRUE(div.pruned(1e-13).is_zero());
    EXPECT_TRUE(c0.pruned(1e-13).is_zero());
    EXPECT_TRUE(c1.pruned(1e-13).is_zero());
    EXPECT_TRUE(c2.pruned(1e-13).is_zero());
    for (int a = 0; a < 3; ++a)
      if (!f.comp[a].is_zero()) EXPECT_EQ(f.comp[a].degree(), f.k - 1);
  }
}

TEST(HarmonicBasis, OrderingMatchesIndexHelper) {
  const auto fs = basis_gradients(6);
  for (int k = 1; k <= 6; ++k)
    for (int l = 1; l <= k; ++l) {
      const BasisFunction& f = fs[basis_index(k, l)];
      EXPECT_EQ(f.k, k);
      EXPECT_EQ(f.l, l);
    }
}

TEST(HarmonicBasis, CompiledSetMatchesPolynomials) {
  const int p = 7;
  const BasisSet set(p);
  const auto fs = basis_gradients(p);
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec3> val(set.size());
  std::vector<Eigen::Matrix3d> jac(set.size());
  for (int it = 0; it < 10; ++it) {
    const Vec3 r(u(g), u(g), u(g));
    set.eval(r, val.data());
    set.eval_jacobian(r, jac.data());
    for (int j = 0; j < set.size(); ++j) {
      const Quaternion ref = eval_basis(fs[j], r);
      EXPECT_EQ(ref.s, 0.0);
      EXPECT_LT((val[j] - ref.v).norm(), 1e-13 * (1 + ref.v.norm()));
      for (int b = 0; b < 3; ++b) {
        const double hstep = 1e-6;
        Vec3 e = Vec3::Zero();
        e[b] = hstep;
        const Vec3 fd = (eval_basis(fs[j], r + e).v - eval_basis(fs[j], r - e).v) / (2 * hstep);
        EXPECT_LT((jac[j].col(b) - fd).norm(), 1e-7 * (1 + fd.norm()));
      }
      // Curl-free fields have symmetric Jacobians; divergence-free ones are traceless.
      EXPECT_LT((jac[j] - jac[j].transpose()).norm(), 1e-12 * (1 + jac[j].norm()));
      EXPECT_LT(std::abs(jac[j].trace()), 1e-12 * (1 + jac[j].norm()));
    }
  }
}
