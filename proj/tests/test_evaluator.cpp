#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qclose/bvp.hpp"
#include "qclose/evaluator.hpp"

using namespace qclose;

namespace {

constexpr double kPi = std::numbers::pi;

const Vec3 kSource(2.6, -1.0, 1.8);

// u = 1 / |x - x0| with x0 outside the unit sphere, and its normal derivative.
double u_exact(const Vec3& x) { return 1.0 / (x - kSource).norm(); }
double dudn_exact(const GeometrySample& g) {
  const Vec3 d = g.point - kSource;
  return -d.dot(g.normal) / std::pow(d.norm(), 3);
}

std::vector<Vec3> sphere_targets(const Vec3& dir, const std::vector<double>& radii) {
  std::vector<Vec3> t;
  for (double r : radii) t.push_back(r * dir.normalized());
  return t;
}

}  // namespace

TEST(Evaluator, GaussIdentityCloseToSphere) {
  Evaluator ev(make_sphere(1.0), 2, 2, 6);
  ev.set_density([](const GeometrySample&) { return 1.0; });
  const Vec3 dir(0.3, 0.2, 0.93);
  const std::vector<double> radii{0.5, 1 - 1e-2, 1 - 1e-6, 1.0, 1 + 1e-6, 1 + 1e-2, 2.0};
  const std::vector<double> expected{-1, -1, -1, -0.5, 0, 0, 0};
  const EvalReport rep = ev.evaluate(sphere_targets(dir, radii), Kernel::DLP);
  for (size_t i = 0; i < radii.size(); ++i) {
    EXPECT_NEAR(rep.value[i], expected[i], 1e-10) << "radius " << radii[i];
    EXPECT_NE(rep.path[i], EvalPath::Failed);
  }
  EXPECT_NE(rep.path[2], EvalPath::Direct);
}

TEST(Evaluator, GreenRepresentationInside) {
  // u = S[du/dn] - D[u] inside, with S carrying 1 / (4 pi).
  EvalOptions opt;
  opt.slp_four_pi = true;
  Evaluator ev(make_sphere(1.0), 4, 4, 7, opt);
  const std::vector<Vec3> x = sphere_targets(Vec3(-0.4, 0.7, 0.2), {0.3, 0.9, 1 - 1e-3, 1 - 1e-6});
  ev.set_density(dudn_exact);
  const EvalReport s = ev.evaluate(x, Kernel::SLP);
  ev.set_density([](const GeometrySample& g) { return u_exact(g.point); });
  const EvalReport d = ev.evaluate(x, Kernel::DLP);
  for (size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(s.value[i] - d.value[i], u_exact(x[i]), 1e-8) << i;
}

TEST(Evaluator, SingleLayerCloseMatchesDirectAwayFromSurface) {
  Evaluator ev(make_sphere(1.0), 6, 6, 7);
  ev.set_density([](const GeometrySample& g) { return std::cos(g.point.x()) + g.point.z(); });
  const Vec3 x = 2.0 * Vec3(0.2, 0.5, -0.6).normalized();
  const EvalReport rep = ev.evaluate({x}, Kernel::SLP);
  ASSERT_EQ(rep.path[0], EvalPath::Direct);
  // Force the close path on every panel and compare with the smooth rule.
  double close = 0;
  for (size_t P = 0; P < ev.discretization().panels.size(); ++P) {
    double v = 0;
    Vec3 g;
    ASSERT_NE(ev.close_value(x, static_cast<int>(P), Kernel::SLP, v, g), EvalPath::Failed);
    close += v;
  }
  EXPECT_NEAR(close, rep.value[0], 1e-10 * std::abs(rep.value[0]));
  EXPECT_NEAR(ev.direct_slp(x, -1), rep.value[0], 1e-14 * std::abs(rep.value[0]));
}

TEST(Evaluator, GradientMatchesFiniteDifferences) {
  Evaluator ev(make_sphere(1.0), 3, 3, 7);
  ev.set_density([](const GeometrySample& g) { return g.point.x() * g.point.y() + 0.5; });
  const Vec3 dir = Vec3(0.6, -0.3, 0.5).normalized();
  const double hs = 1e-5;
  for (double r : {0.95, 1.04}) {
    const Vec3 x = r * dir;
    std::vector<Vec3> pts{x};
    for (int a = 0; a < 3; ++a) {
      Vec3 e = Vec3::Zero();
      e[a] = hs;
      pts.push_back(x + e);
      pts.push_back(x - e);
    }
    const EvalReport v = ev.evaluate(pts, Kernel::DLP);
    const EvalReport g = ev.evaluate({x}, Kernel::GradDLP);
    for (int a = 0; a < 3; ++a) {
      const double fd = (v.value[1 + 2 * a] - v.value[2 + 2 * a]) / (2 * hs);
      EXPECT_NEAR(g.gradient[0][a], fd, 1e-6 * (1 + std::abs(fd))) << "r = " << r << " axis " << a;
    }
  }
}

TEST(Evaluator, GradientOfConstantDensityVanishes) {
  Evaluator ev(make_sphere(1.0), 2, 2, 6);
  ev.set_density([](const GeometrySample&) { return 1.0; });
  const EvalReport g = ev.evaluate(sphere_targets(Vec3(0.1, -0.8, 0.3), {0.5, 0.99, 1.01, 1.5}), Kernel::GradDLP);
  for (const Vec3& v : g.gradient) EXPECT_LT(v.norm(), 1e-8);
}

TEST(Evaluator, SampledDensityMatchesAnalytic) {
  Evaluator ev(make_sphere(1.0), 3, 3, 7);
  auto f = [](const GeometrySample& g) { return std::exp(0.5 * g.point.x()) * g.point.z(); };
  const std::vector<Vec3> x = sphere_targets(Vec3(0.5, 0.5, 0.7), {0.99, 1.01});
  ev.set_density(f);
  const EvalReport a = ev.evaluate(x, Kernel::DLP);
  std::vector<double> mu;
  for (const Panel& P : ev.discretization().panels)
    for (const Vec2& uv : P.params) mu.push_back(f(geometry_at(*ev.discretization().surface.charts[P.chart], uv[0], uv[1])));
  ev.set_density(mu);
  const EvalReport b = ev.evaluate(x, Kernel::DLP);
  for (size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(a.value[i], b.value[i], 1e-7);
}

TEST(Evaluator, ClassificationUsesPanelSize) {
  Evaluator ev(make_sphere(1.0), 4, 4, 5);
  const auto cls = ev.classify({Vec3(0, 0, 0), Vec3(0, 0, 1.001), Vec3(0, 0, 5)});
  EXPECT_TRUE(cls[0].near_panels.empty());
  EXPECT_FALSE(cls[1].near_panels.empty());
  EXPECT_TRUE(cls[2].near_panels.empty());
  EXPECT_NEAR(cls[2].distance, 4.0, 0.05);
}

TEST(Evaluator, MaxRelativeErrorPropagatesNaN) {
  EXPECT_NEAR(max_relative_error({1.0, 2.1}, {1.0, 2.0}), 0.05, 1e-15);
  EXPECT_TRUE(std::isnan(max_relative_error({1.0, std::nan("")}, {1.0, 2.0})));
}

TEST(Bvp, InteriorDirichletOnSphere) {
  Evaluator ev(make_sphere(1.0), 2, 2, 6);
  const DlpBieOperator A(ev);
  EXPECT_LT((A.apply(Eigen::VectorXd::Ones(A.size())).array() + 1.0).abs().maxCoeff(), 1e-9);
  PointSources src;
  src.x = {Vec3(2.0, 0.5, -0.3), Vec3(-0.4, -1.8, 1.1)};
  src.strength = {0.7, -0.4};
  Eigen::VectorXd g(A.size());
  for (Eigen::Index i = 0; i < A.size(); ++i) g[i] = source_field(src, ev.nodes()[i]);
  const BieSolution dense = solve_dlp_bie(A, g);
  EXPECT_TRUE(dense.dense);
  EXPECT_LT(dense.residual, 1e-12);
  BieOptions krylov;
  krylov.dense_limit = 0;
  const BieSolution it = solve_dlp_bie(A, g, krylov);
  EXPECT_FALSE(it.dense);
  EXPECT_TRUE(it.converged);
  EXPECT_LT((it.mu - dense.mu).norm(), 1e-9 * dense.mu.norm());

  ev.set_density(std::vector<double>(dense.mu.data(), dense.mu.data() + dense.mu.size()));
  const std::vector<Vec3> x = sphere_targets(Vec3(0.3, -0.2, 0.4), {0.2, 0.9, 0.999});
  const EvalReport u = ev.evaluate(x, Kernel::DLP);
  for (size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(u.value[i], source_field(src, x[i]), 1e-5);
}

TEST(Bvp, RandomSourcesAreOutsideAndReproducible) {
  const Discretization d = build_panels(make_cruller_surface(1, 0.5, 0.065, 3, 5), 4, 6, 4);
  const PointSources a = random_exterior_sources(d, 10, 42), b = random_exterior_sources(d, 10, 42);
  ASSERT_EQ(a.x.size(), 10u);
  for (size_t i = 0; i < a.x.size(); ++i) {
    EXPECT_EQ(a.x[i], b.x[i]);
    EXPECT_EQ(a.strength[i], b.strength[i]);
    EXPECT_GE(a.x[i].norm(), 1.5 * 1.5 - 0.1);
    EXPECT_LE(std::abs(a.strength[i]), 1.0);
  }
  EXPECT_NEAR(laplace_green(Vec3(0, 0, 2)), 1 / (8 * kPi), 1e-16);
}
