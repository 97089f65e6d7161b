#include <benchmark/benchmark.h>

#include <vector>

#include "qclose/density_fit.hpp"
#include "qclose/evaluator.hpp"
#include "qclose/form_reduction.hpp"
#include "qclose/moments.hpp"

using namespace qclose;

namespace {

const std::vector<TaylorTerm> kBump{{2, 0, 0.4}, {1, 1, -0.25}, {0, 2, 0.3}};

TriangularPatch bump_triangle(int p) {
  const ChartPtr c = make_graph_patch(kBump, {-1, 1, -1, 1});
  return make_triangle(c, Vec2(0.1, 0.05), Vec2(0.3, 0.05), Vec2(0.1, 0.25), p, 2 * p);
}

std::vector<double> samples(const TriangularPatch& t) {
  std::vector<double> mu;
  for (const Vec3& x : t.nodes) mu.push_back(std::cos(x.x()) + x.y() * x.z());
  return mu;
}

void BM_MomentsRecurrence(benchmark::State& st) {
  const int K = static_cast<int>(st.range(0));
  const Vec3 r(0.9, 0.3, -0.2), rp(0.2, 0.5, 0.3);
  std::vector<double> M(K + 1), L(K + 1), N(K + 1);
  for (auto _ : st) {
    moments_into(r, rp, K, M.data(), L.data(), N.data());
    benchmark::DoNotOptimize(M.data());
  }
}
BENCHMARK(BM_MomentsRecurrence)->Arg(8)->Arg(16);

void BM_MomentsQuadrature(benchmark::State& st) {
  const int K = static_cast<int>(st.range(0));
  const Vec3 r(0.9, 0.3, -0.2), rp(0.45, 0.15 + 1e-6, -0.1);
  std::vector<double> M(K + 1), L(K + 1), N(K + 1);
  for (auto _ : st) {
    moments_by_quadrature(r, rp, K, M.data(), L.data(), N.data());
    benchmark::DoNotOptimize(M.data());
  }
}
BENCHMARK(BM_MomentsQuadrature)->Arg(8)->Arg(16);

void BM_PatchFitFactorize(benchmark::State& st) {
  const int p = static_cast<int>(st.range(0));
  const BasisSet basis(p);
  const TriangularPatch t = bump_triangle(p);
  for (auto _ : st) benchmark::DoNotOptimize(PatchFit(t, basis));
}
BENCHMARK(BM_PatchFitFactorize)->DenseRange(3, 7, 2);

void BM_PatchFitSolve(benchmark::State& st) {
  const int p = static_cast<int>(st.range(0));
  const BasisSet basis(p);
  const TriangularPatch t = bump_triangle(p);
  const PatchFit fit(t, basis);
  const std::vector<double> mu = samples(t);
  for (auto _ : st) benchmark::DoNotOptimize(fit.fit(mu));
}
BENCHMARK(BM_PatchFitSolve)->DenseRange(3, 7, 2);

void BM_ContourDlp(benchmark::State& st) {
  const int p = static_cast<int>(st.range(0));
  const BasisSet basis(p);
  const TriangularPatch t = bump_triangle(p);
  const DensityCoefficients c = fit_density(t, samples(t), basis);
  const GeometrySample g = geometry_at(*t.chart, 0.17, 0.11);
  const Vec3 x = g.point + 0.01 * g.normal;
  for (auto _ : st) benchmark::DoNotOptimize(contour_integrate_dlp(t, basis, c, x));
}
BENCHMARK(BM_ContourDlp)->DenseRange(3, 7, 2);

void BM_EvaluateNearSurface(benchmark::State& st) {
  Evaluator ev(make_cruller_surface(1, 0.5, 0.065, 3, 5), 12, 16, 7);
  ev.set_density([](const GeometrySample& g) { return g.H; });
  const ChartPtr ch = make_cruller(1, 0.5, 0.065, 3, 5);
  std::vector<Vec3> x;
  for (int i = 0; i < 16; ++i) {
    const GeometrySample g = geometry_at(*ch, 0.4 * i, 0.3 * i);
    x.push_back(g.point + 1e-3 * g.normal);
  }
  ev.evaluate(x, Kernel::DLP);  // warm the split-fit cache
  for (auto _ : st) benchmark::DoNotOptimize(ev.evaluate(x, Kernel::DLP));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(x.size()));
}
BENCHMARK(BM_EvaluateNearSurface)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
