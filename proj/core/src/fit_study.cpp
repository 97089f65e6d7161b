#include "qclose/fit_study.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "qclose/density_fit.hpp"
#include "qclose/evaluator.hpp"

namespace qclose {

namespace {

bool same_terms(const std::vector<TaylorTerm>& a, const std::vector<TaylorTerm>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].k != b[i].k || a[i].l != b[i].l || a[i].a != b[i].a) return false;
  return true;
}

struct Tiling {
  double x0, y0, h;
  int nx, ny;

  // Cell (i, j), lower-left triangle when s + t <= 1, upper-right otherwise.
  int locate(double x, double y) const {
    const int i = std::clamp(static_cast<int>(std::floor((x - x0) / h)), 0, nx - 1);
    const int j = std::clamp(static_cast<int>(std::floor((y - y0) / h)), 0, ny - 1);
    const double s = (x - x0) / h - i, t = (y - y0) / h - j;
    return 2 * (j * nx + i) + (s + t > 1 ? 1 : 0);
  }
  std::array<Vec2, 3> triangle(int id) const {
    const int cell = id / 2, i = cell % nx, j = cell / nx;
    const double cx = x0 + i * h, cy = y0 + j * h;
    if (id % 2 == 0) return {Vec2(cx, cy), Vec2(cx + h, cy), Vec2(cx, cy + h)};
    return {Vec2(cx + h, cy + h), Vec2(cx, cy + h), Vec2(cx + h, cy)};
  }
  int count() const { return 2 * nx * ny; }
};

}  // namespace

std::vector<GraphPair> unit_coefficient_pairs(int m) {
  std::vector<TaylorTerm> terms;
  for (int d = 1; d <= m; ++d)
    for (int k = d; k >= 0; --k) terms.push_back({k, d - k, 1.0});
  std::vector<GraphPair> out;
  for (const TaylorTerm& s : terms)
    for (const TaylorTerm& u : terms) out.push_back({{s}, {u}});
  return out;
}

std::vector<FitStudyRow> fit_convergence_study(const std::vector<GraphPair>& pairs, const FitStudyOptions& opt) {
  if (pairs.empty()) throw std::invalid_argument("no function pairs");
  if (opt.grid < 2) throw std::invalid_argument("fit study grid needs at least two points per axis");
  const auto& dom = opt.domain;
  const double wx = dom[1] - dom[0], wy = dom[3] - dom[2];
  if (!(wx > 0 && wy > 0)) throw std::invalid_argument("fit study domain is empty");

  // Group pairs by surface so each collocation system is factorized once.
  std::vector<std::vector<int>> groups;
  for (int i = 0; i < static_cast<int>(pairs.size()); ++i) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const std::vector<int>& g) { return same_terms(pairs[g[0]].a_D, pairs[i].a_D); });
    if (it == groups.end())
      groups.push_back({i});
    else
      it->push_back(i);
  }

  std::vector<double> gx(opt.grid), gy(opt.grid);
  for (int i = 0; i < opt.grid; ++i) {
    gx[i] = dom[0] + wx * i / (opt.grid - 1);
    gy[i] = dom[2] + wy * i / (opt.grid - 1);
  }
  std::vector<double> mu_max(pairs.size(), 0.0);
  for (size_t q = 0; q < pairs.size(); ++q)
    for (double x : gx)
      for (double y : gy) mu_max[q] = std::max(mu_max[q], std::abs(eval_taylor(pairs[q].a_mu, x, y)));

  std::vector<FitStudyRow> rows;
  for (int p : opt.ps) {
    const BasisSet basis(p);
    for (double h : opt.h) {
      if (!(h > 0)) throw std::invalid_argument("fit study leg length must be positive");
      const Tiling tile{dom[0], dom[2], h, std::max(1, static_cast<int>(std::lround(wx / h))),
                        std::max(1, static_cast<int>(std::lround(wy / h)))};
      std::vector<double> err(pairs.size(), 0.0);
      std::mutex lock;
      for (const std::vector<int>& group : groups) {
        const ChartPtr chart = make_graph_patch(pairs[group[0]].a_D, dom);
        // coef[t][g] holds the fit of density g on triangle t.
        std::vector<std::vector<DensityCoefficients>> coef(tile.count());
        parallel_for(tile.count(), opt.threads, [&](int t) {
          const auto v = tile.triangle(t);
          const TriangularPatch T = make_triangle(chart, v[0], v[1], v[2], p, 2 * p);
          const PatchFit fit(T, basis);
          coef[t].reserve(group.size());
          for (int q : group) {
            std::vector<double> mu;
            mu.reserve(T.node_params.size());
            for (const Vec2& uv : T.node_params) mu.push_back(eval_taylor(pairs[q].a_mu, uv[0], uv[1]));
            coef[t].push_back(fit.fit(mu));
          }
        });
        parallel_for(opt.grid, opt.threads, [&](int i) {
          std::vector<double> local(group.size(), 0.0);
          std::vector<Vec3> f(basis.size());
          for (double y : gy) {
            const double x = gx[i];
            const int t = tile.locate(x, y);
            const Vec3 r = chart->point(x, y);
            basis.eval(coef[t][0].frame.to_local(r), f.data());
            for (size_t g = 0; g < group.size(); ++g) {
              const DensityCoefficients& c = coef[t][g];
              double s = 0;
              for (int j = 0; j < basis.size(); ++j) s += qmul(Quaternion::pure(f[j]), c.C[j]).s;
              const double e = std::abs(s - eval_taylor(pairs[group[g]].a_mu, x, y));
              local[g] = std::isnan(e) ? e : std::max(local[g], e);
            }
          }
          std::lock_guard<std::mutex> guard(lock);
          for (size_t g = 0; g < group.size(); ++g)
            err[group[g]] = std::isnan(local[g]) ? local[g] : std::max(err[group[g]], local[g]);
        });
      }
      FitStudyRow row;
      row.h = h;
      row.p = p;
      for (size_t q = 0; q < pairs.size(); ++q) {
        const double e = mu_max[q] > 0 ? err[q] / mu_max[q] : err[q];
        if (row.worst_pair < 0 || std::isnan(e) || e > row.max_rel_error) {
          row.max_rel_error = e;
          row.worst_pair = static_cast<int>(q);
          if (std::isnan(e)) break;
        }
      }
      row.rate = std::numeric_limits<double>::quiet_NaN();
      if (!rows.empty() && rows.back().p == p)
        row.rate = std::log(rows.back().max_rel_error / row.max_rel_error) / std::log(rows.back().h / h);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace qclose
