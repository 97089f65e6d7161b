#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qclose/quadrature.hpp"
#include "qclose/surface.hpp"

using namespace qclose;

namespace {

constexpr double kPi = std::numbers::pi;

double area(const Discretization& d) {
  double s = 0;
  for (const Panel& P : d.panels)
    for (double w : P.weights) s += w;
  return s;
}

double flux_volume(const Discretization& d) {
  double s = 0;
  for (const Panel& P : d.panels)
    for (size_t i = 0; i < P.nodes.size(); ++i) s += P.weights[i] * P.nodes[i].dot(P.normals[i]);
  return s / 3;
}

}  // namespace

TEST(Surface, SphereAreaAndVolume) {
  const Discretization d = build_panels(make_sphere(2.0), 3, 3, 8);
  EXPECT_NEAR(area(d), 16 * kPi, 1e-9);
  EXPECT_NEAR(flux_volume(d), 32 * kPi / 3, 1e-9);
}

TEST(Surface, CrullerVolumeMatchesTubeIntegral) {
  const double a = 1, b = 0.5, wc = 0.065;
  const int wm = 3, wn = 5;
  // Volume in tube coordinates: int int (a rho^2 / 2 + rho^3 cos(theta) / 3) dtheta dphi.
  const int n = 400;
  double ref = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double th = 2 * kPi * i / n, ph = 2 * kPi * j / n;
      const double rho = b + wc * std::cos(wn * ph + wm * th);
      ref += a * rho * rho / 2 + rho * rho * rho * std::cos(th) / 3;
    }
  ref *= 4 * kPi * kPi / (n * n);
  const Discretization d = build_panels(make_cruller_surface(a, b, wc, wm, wn), 12, 16, 8);
  EXPECT_NEAR(flux_volume(d), ref, 1e-8);
  EXPECT_GT(flux_volume(d), 0.0);
}

TEST(Surface, CrullerNormalIsOutward) {
  const ChartPtr c = make_cruller(1, 0.5, 0.065, 3, 5);
  for (double th : {0.1, 1.7, 3.0, 5.2})
    for (double ph : {0.0, 0.9, 4.0}) {
      const GeometrySample g = geometry_at(*c, th, ph);
      const Vec3 axis_point(std::cos(ph), std::sin(ph), 0.0);
      EXPECT_GT((g.point - axis_point).dot(g.normal), 0.0);
      EXPECT_NEAR(g.normal.norm(), 1.0, 1e-14);
    }
}

TEST(Surface, SphereMeanCurvature) {
  const Surface s = make_sphere(1.0);
  for (const ChartPtr& c : s.charts) {
    const double u = 0.3 * c->u_range[0] + 0.7 * c->u_range[1];
    const double v = 0.6 * c->v_range[0] + 0.4 * c->v_range[1];
    const GeometrySample g = geometry_at(*c, u, v);
    EXPECT_NEAR(std::abs(g.H), 1.0, 1e-12);
    EXPECT_NEAR(g.point.dot(g.normal), 1.0, 1e-12);
  }
}

TEST(Surface, GraphPatchNormalPointsUp) {
  const ChartPtr c = make_graph_patch({{2, 0, 0.5}, {1, 1, -0.3}}, {-0.5, 0.5, -0.5, 0.5});
  const GeometrySample g = geometry_at(*c, 0.2, -0.1);
  EXPECT_GT(g.normal.z(), 0.0);
  EXPECT_NEAR(g.point.z(), eval_taylor({{2, 0, 0.5}, {1, 1, -0.3}}, 0.2, -0.1), 1e-15);
  // z = 0.5 x^2 - 0.3 x y has normal proportional to (-z_x, -z_y, 1).
  const Vec3 n = Vec3(-(1.0 * 0.2 + 0.03), 0.06, 1).normalized();
  EXPECT_LT((g.normal - n).norm(), 1e-14);
}

TEST(Surface, ClosestParameterRecoversFootPoint) {
  const ChartPtr c = make_cruller(1, 0.5, 0.065, 3, 5);
  for (double s : {1e-6, 1e-2, -3e-2}) {
    const GeometrySample g = geometry_at(*c, 2.0, 1.0);
    const Vec2 uv = closest_parameter(*c, g.point + s * g.normal, Vec2(2.1, 0.95));
    EXPECT_NEAR(uv[0], 2.0, 1e-9);
    EXPECT_NEAR(uv[1], 1.0, 1e-9);
  }
}

TEST(Surface, TriangleNodeSet) {
  // Row k sits at the k-th Gauss fraction from the collapse vertex and carries k nodes.
  const ChartPtr c = make_graph_patch({}, {0, 1, 0, 1});
  const int p = 7;
  const TriangularPatch t = make_triangle(c, Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), p, 2 * p);
  ASSERT_EQ(t.nodes.size(), 28u);
  const QuadratureRule& rows = gauss_legendre_unit(p);
  int idx = 0;
  for (int k = 1; k <= p; ++k)
    for (int l = 1; l <= k; ++l, ++idx) EXPECT_NEAR(t.nodes[idx].x() + t.nodes[idx].y(), rows.x[k - 1], 1e-15);
  // The weights integrate polynomials of degree one exactly.
  double s0 = 0, sx = 0, sy = 0;
  for (size_t i = 0; i < t.nodes.size(); ++i) {
    s0 += t.weights[i];
    sx += t.weights[i] * t.nodes[i].x();
    sy += t.weights[i] * t.nodes[i].y();
  }
  EXPECT_NEAR(s0, 0.5, 1e-15);
  EXPECT_NEAR(sx, 1.0 / 6, 1e-15);
  EXPECT_NEAR(sy, 1.0 / 6, 1e-15);
  double len = 0;
  for (const ContourNode& cn : t.contour) len += cn.dr.norm();
  EXPECT_NEAR(len, 2 + std::sqrt(2.0), 1e-13);
  EXPECT_EQ(t.contour.size(), 3u * 2 * p);
}

TEST(Surface, SplitsCoverThePanel) {
  for (SplitKind k : {SplitKind::Diagonal, SplitKind::AntiDiagonal, SplitKind::FanLeft, SplitKind::FanRight}) {
    double s = 0;
    for (const auto& t : split_triangles(0, 2, 1, 4, k)) {
      const Vec2 e1 = t[1] - t[0], e2 = t[2] - t[0];
      const double a = 0.5 * (e1[0] * e2[1] - e1[1] * e2[0]);
      EXPECT_GT(a, 0.0);
      s += a;
    }
    EXPECT_NEAR(s, 6.0, 1e-14);
  }
}
