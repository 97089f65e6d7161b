#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qclose/density_fit.hpp"

using namespace qclose;

namespace {

const std::vector<TaylorTerm> kBump{{2, 0, 0.4}, {1, 1, -0.25}, {0, 2, 0.3}, {3, 0, 0.1}, {1, 2, -0.2}};

TriangularPatch bump_triangle(double h, int p) {
  const ChartPtr c = make_graph_patch(kBump, {-1, 1, -1, 1});
  return make_triangle(c, Vec2(0.1, 0.05), Vec2(0.1 + h, 0.05), Vec2(0.1, 0.05 + h), p, 2 * p);
}

double smooth_density(const Vec3& r) { return std::sin(2 * r.x() + r.y()) * std::exp(r.z()) + r.y() * r.y(); }

// Max scalar-part error of the reconstruction over points spread across the triangle.
double fit_error(const TriangularPatch& t, const BasisSet& basis) {
  std::vector<double> mu;
  for (const Vec3& x : t.nodes) mu.push_back(smooth_density(x));
  const DensityCoefficients c = fit_density(t, mu, basis);
  double e = 0;
  const int m = 12;
  for (int i = 0; i <= m; ++i)
    for (int j = 0; i + j <= m; ++j) {
      const Vec2 uv = t.verts[0] + (t.verts[1] - t.verts[0]) * i / m + (t.verts[2] - t.verts[0]) * j / m;
      const Vec3 r = t.chart->point(uv[0], uv[1]);
      e = std::max(e, std::abs(c.reconstruct(basis, r).s - smooth_density(r)));
    }
  return e;
}

}  // namespace

TEST(DensityFit, InterpolatesQuaternionSamples) {
  const int p = 6;
  const BasisSet basis(p);
  const TriangularPatch t = bump_triangle(0.2, p);
  PatchFit fit(t, basis);
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Quaternion> s(t.nodes.size());
  for (Quaternion& q : s) q = Quaternion(u(g), u(g), u(g), u(g));
  const DensityCoefficients c = fit.fit(s);
  EXPECT_LT(c.residual, 1e-12);
  for (size_t i = 0; i < t.nodes.size(); ++i)
    EXPECT_LT((c.reconstruct(basis, t.nodes[i]) - s[i]).norm(), 1e-10);
}

TEST(DensityFit, ReproducesConstants) {
  const int p = 7;
  const BasisSet basis(p);
  const TriangularPatch t = bump_triangle(0.3, p);
  const DensityCoefficients c = fit_density(t, std::vector<double>(t.nodes.size(), 2.5), basis);
  for (const Vec2& uv : {Vec2(0.15, 0.1), Vec2(0.3, 0.1), Vec2(0.12, 0.3)}) {
    const Quaternion q = c.reconstruct(basis, t.chart->point(uv[0], uv[1]));
    EXPECT_NEAR(q.s, 2.5, 1e-11);
    EXPECT_LT(q.v.norm(), 1e-11);
  }
}

TEST(DensityFit, ScalarWeightsMatchContraction) {
  const int p = 5;
  const BasisSet basis(p);
  const TriangularPatch t = bump_triangle(0.25, p);
  PatchFit fit(t, basis);
  std::mt19937_64 g(9);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::VectorXd gv(4 * basis.size());
  for (Eigen::Index i = 0; i < gv.size(); ++i) gv[i] = u(g);
  std::vector<double> mu(t.nodes.size());
  for (double& m : mu) m = u(g);
  const DensityCoefficients c = fit.fit(mu);
  double ref = 0;
  for (int j = 0; j < basis.size(); ++j)
    for (int m = 0; m < 4; ++m) ref += gv[4 * j + m] * c.C[j][m];
  const Eigen::VectorXd w = fit.scalar_weights(gv);
  EXPECT_NEAR(w.dot(Eigen::Map<const Eigen::VectorXd>(mu.data(), mu.size())), ref, 1e-11 * (1 + std::abs(ref)));
}

TEST(DensityFit, ConvergesAtTheFitOrder) {
  for (int p : {3, 4, 5}) {
    const BasisSet basis(p);
    const double e1 = fit_error(bump_triangle(0.2, p), basis);
    const double e2 = fit_error(bump_triangle(0.1, p), basis);
    const double rate = std::log2(e1 / e2);
    EXPECT_GT(rate, p - 0.5) << "p = " << p;
  }
}

TEST(DensityFit, FrameIsTranslatedAndScaled) {
  const TriangularPatch t = bump_triangle(0.2, 4);
  const PatchFrame f = translate_patch(t);
  EXPECT_LT(f.to_local(t.nodes[0]).norm(), 1e-15);
  EXPECT_NEAR(f.scale, 1 / t.h, 1e-12);
  const Vec3 x(0.3, -0.2, 0.1);
  EXPECT_LT((f.to_global(f.to_local(x)) - x).norm(), 1e-15);
}
