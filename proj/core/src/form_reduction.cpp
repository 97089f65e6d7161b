#include "qclose/form_reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "qclose/quadrature.hpp"

namespace qclose {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

Vec3 unit(int i) {
  Vec3 e = Vec3::Zero();
  e[i] = 1.0;
  return e;
}

// a_i with A_i . (r x dr) = r' . a_i and B_i . (r x dr) = r . a_i.
inline void a_vectors(const Vec3& f, const Vec3& tau, Vec3 a[4]) {
  a[0] = tau.cross(f);
  const double ft = f.dot(tau);
  for (int i = 1; i <= 3; ++i) {
    a[i] = -tau[i - 1] * f + f[i - 1] * tau;
    a[i][i - 1] += ft;
  }
}

struct Workspace {
  std::vector<Vec3> f;
  std::vector<double> M, L, N;
};

// Adds w * omega (and its target derivatives) at one contour point to out.
void accumulate_point(const BasisSet& basis, const Vec3& r, const Vec3& dr, const Vec3& rp, double w, bool grad,
                      const MomentOptions& mopt, Workspace& ws, double* out) {
  const int p = basis.order();
  const int n = basis.size();
  const int kmax = grad ? p + 2 : p + 1;
  ws.f.resize(n);
  ws.M.resize(kmax + 1);
  ws.N.resize(kmax + 1);
  ws.L.resize(kmax + 1);
  moments_into(r, rp, kmax, ws.M.data(), grad ? ws.L.data() : nullptr, ws.N.data(), mopt);
  basis.eval(r, ws.f.data());
  const Vec3 tau = r.cross(dr) * w;
  const double* M = ws.M.data();
  const double* L = ws.L.data();
  const int stride = grad ? 16 : 4;
  Vec3 a[4];
  for (int j = 0; j < n; ++j) {
    const int k = basis.degree(j);
    a_vectors(ws.f[j], tau, a);
    double* o = out + j * stride;
    for (int i = 0; i < 4; ++i) {
      const double alpha = rp.dot(a[i]);
      const double beta = r.dot(a[i]);
      o[i] += alpha * M[k] - beta * M[k + 1];
      if (grad) {
        for (int m = 0; m < 3; ++m) {
          const double dMk = 3.0 * (r[m] * L[k + 1] - rp[m] * L[k]);
          const double dMk1 = 3.0 * (r[m] * L[k + 2] - rp[m] * L[k + 1]);
          o[4 + 4 * m + i] += a[i][m] * M[k] + alpha * dMk - beta * dMk1;
        }
      }
    }
  }
}

struct EdgeIntegrator {
  const TriangularPatch& patch;
  const BasisSet& basis;
  const ContourOptions& opt;
  Vec3 origin;
  double scale;
  Vec3 rp;
  int size;
  int q;
  Workspace ws;
  int points = 0;
  int max_depth_reached = 0;

  void segment(const Vec2& A, const Vec2& D, double s0, double s1, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    const QuadratureRule& gl = gauss_legendre_unit(q);
    const double len = s1 - s0;
    for (int i = 0; i < q; ++i) {
      const double s = s0 + len * gl.x[i];
      const Vec2 X = A + s * D;
      const SurfaceDerivs d = patch.chart->derivs(X[0], X[1]);
      const Vec3 r = (d.r - origin) * scale;
      const Vec3 dr = (d.ru * D[0] + d.rv * D[1]) * scale;
      accumulate_point(basis, r, dr, rp, len * gl.w[i], opt.gradient, opt.moments, ws, out.data());
    }
    points += q;
  }

  void adapt(const Vec2& A, const Vec2& D, double s0, double s1, const std::vector<double>& whole, int depth,
             std::vector<double>& total) {
    const double mid = 0.5 * (s0 + s1);
    std::vector<double> left(size), right(size);
    segment(A, D, s0, mid, left);
    segment(A, D, mid, s1, right);
    double diff = 0.0, mag = 1.0;
    for (int i = 0; i < size; ++i) {
      const double v = left[i] + right[i];
      diff = std::max(diff, std::abs(v - whole[i]));
      mag = std::max(mag, std::abs(v));
    }
    if (diff <= opt.tol * mag || depth >= opt.max_depth) {
      max_depth_reached = std::max(max_depth_reached, depth);
      for (int i = 0; i < size; ++i) total[i] += left[i] + right[i];
      return;
    }
    adapt(A, D, s0, mid, left, depth + 1, total);
    adapt(A, D, mid, s1, right, depth + 1, total);
  }

  std::vector<double> run() {
    std::vector<double> total(size, 0.0), whole(size);
    for (int e = 0; e < 3; ++e) {
      const Vec2 A = patch.verts[e];
      const Vec2 D = patch.verts[(e + 1) % 3] - A;
      segment(A, D, 0.0, 1.0, whole);
      adapt(A, D, 0.0, 1.0, whole, 1, total);
    }
    return total;
  }
};

std::vector<double> integrate_contour(const TriangularPatch& patch, const BasisSet& basis, const Vec3& target_local,
                                      const ContourOptions& opt, int* points, int* depth) {
  if (static_cast<int>(patch.nodes.size()) != basis.size())
    throw std::invalid_argument("contour integration: basis order does not match the patch");
  EdgeIntegrator E{patch, basis, opt, patch.origin, 1.0 / patch.h, target_local,
                   basis.size() * (opt.gradient ? 16 : 4), std::max(patch.q, basis.order() + 2), {}};
  std::vector<double> out = E.run();
  if (points) *points = E.points;
  if (depth) *depth = E.max_depth_reached;
  return out;
}

}  // namespace

std::array<Vec3, 4> q_vectors(const Vec3& f, const Vec3& r, const Vec3& rp) {
  const Vec3 d = rp - r;
  std::array<Vec3, 4> q;
  q[0] = f.cross(d);
  const double df = d.dot(f);
  for (int i = 1; i <= 3; ++i) q[i] = -df * unit(i - 1) + d[i - 1] * f + f[i - 1] * d;
  return q;
}

VWSplit vw_split(const BasisFunction& f, const Vec3& rp) {
  using P = PolynomialR3;
  const std::array<P, 3> R{P::x(), P::y(), P::z()};
  const std::array<P, 3>& F = f.comp;
  auto cross = [](const std::array<P, 3>& a, const std::array<P, 3>& b) {
    return std::array<P, 3>{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  };
  std::array<P, 3> Rp;
  for (int a = 0; a < 3; ++a) Rp[a] = P::constant(rp[a]);
  // A_i(X) with X = r' (for w) or X = r (for v).
  auto A = [&](int i, const std::array<P, 3>& X) {
    if (i == 0) return cross(F, X);
    const P XF = X[0] * F[0] + X[1] * F[1] + X[2] * F[2];
    std::array<P, 3> out;
    for (int a = 0; a < 3; ++a) out[a] = X[i - 1] * F[a] + F[i - 1] * X[a];
    out[i - 1] -= XF;
    return out;
  };
  VWSplit s;
  s.k = f.k;
  for (int i = 0; i < 4; ++i) {
    const auto w = cross(A(i, Rp), R);
    const auto v = cross(A(i, R), R);
    for (int j = 0; j < 3; ++j) {
      s.w[i][j] = w[j].pruned(0.0);
      s.v[i][j] = (-1.0 * v[j]).pruned(0.0);
    }
  }
  return s;
}

std::vector<StringCrossing> find_string_crossings(const TriangularPatch& patch, const Vec3& target_local,
                                                  double on_surface_tol) {
  std::vector<StringCrossing> out;
  const double rn = target_local.norm();
  if (!(rn > 0)) return out;
  const ParametricSurface& S = *patch.chart;
  const Vec3 sh = target_local / rn;
  Vec3 t1 = sh.unitOrthogonal();
  Vec3 t2 = sh.cross(t1);
  const Vec3 origin = patch.origin;
  const double scale = 1.0 / patch.h;
  const Vec2 v0 = patch.verts[0], e1 = patch.verts[1] - v0, e2 = patch.verts[2] - v0;

  struct Eval {
    Vec2 g;
    Eigen::Matrix2d J;
    Vec3 x;
    double lam;
    SurfaceDerivs d;
  };
  auto eval = [&](const Vec2& ab) {
    Eval E;
    const Vec2 uv = v0 + ab[0] * e1 + ab[1] * e2;
    E.d = S.derivs(uv[0], uv[1]);
    E.x = (E.d.r - origin) * scale;
    const Vec3 xa = (E.d.ru * e1[0] + E.d.rv * e1[1]) * scale;
    const Vec3 xb = (E.d.ru * e2[0] + E.d.rv * e2[1]) * scale;
    E.lam = sh.dot(E.x);
    const double l2 = E.lam * E.lam;
    E.g = Vec2(t1.dot(E.x), t2.dot(E.x)) / E.lam;
    E.J(0, 0) = (t1.dot(xa) * E.lam - t1.dot(E.x) * sh.dot(xa)) / l2;
    E.J(0, 1) = (t1.dot(xb) * E.lam - t1.dot(E.x) * sh.dot(xb)) / l2;
    E.J(1, 0) = (t2.dot(xa) * E.lam - t2.dot(E.x) * sh.dot(xa)) / l2;
    E.J(1, 1) = (t2.dot(xb) * E.lam - t2.dot(E.x) * sh.dot(xb)) / l2;
    return E;
  };

  auto local_point = [&](const Vec2& ab) -> Vec3 {
    const Vec2 uv = v0 + ab[0] * e1 + ab[1] * e2;
    return (S.point(uv[0], uv[1]) - origin) * scale;
  };

  // Seeds: centroids of sub-triangles, from a recursive four-way split of the barycentric
  // triangle, whose padded bounding spheres meet the half-line beyond the target.
  constexpr int kGrid = 6;
  constexpr int kMaxLevel = 7;
  constexpr double kLeafRadius = 0.02;
  struct Sub {
    Vec2 a, b, c;
    int level;
  };
  std::vector<Vec2> seeds;
  std::vector<Sub> stack{{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), 0}};
  while (!stack.empty()) {
    const Sub t = stack.back();
    stack.pop_back();
    const Vec2 mab = 0.5 * (t.a + t.b), mbc = 0.5 * (t.b + t.c), mca = 0.5 * (t.c + t.a);
    const Vec2 g = (t.a + t.b + t.c) / 3.0;
    const Vec3 c = local_point(g);
    double rad = 0;
    for (const Vec2& q : {t.a, t.b, t.c, mab, mbc, mca}) rad = std::max(rad, (local_point(q) - c).norm());
    rad = 1.5 * rad + 1e-12;
    const double lam = std::max(rn, c.dot(sh));
    if ((c - lam * sh).norm() > rad) continue;
    if (t.level == kMaxLevel || rad < kLeafRadius) {
      seeds.push_back(g);
      continue;
    }
    stack.push_back({t.a, mab, mca, t.level + 1});
    stack.push_back({mab, t.b, mbc, t.level + 1});
    stack.push_back({mca, mbc, t.c, t.level + 1});
    stack.push_back({mbc, mca, mab, t.level + 1});
  }

  std::vector<Vec2> roots;
  constexpr double kEdge = 1e-13;

  // An on-surface target is itself a crossing; the ray may re-enter the patch beyond it, so
  // Newton from the seeds alone can miss it. Project the target onto the patch first.
  {
    Vec2 ab(1.0 / 3, 1.0 / 3);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kGrid; ++i)
      for (int j = 0; i + j <= kGrid; ++j) {
        const Vec2 c(double(i) / kGrid, double(j) / kGrid);
        const Vec2 uv = v0 + c[0] * e1 + c[1] * e2;
        const double d = ((S.point(uv[0], uv[1]) - origin) * scale - target_local).squaredNorm();
        if (d < best) {
          best = d;
          ab = c;
        }
      }
    double dist = std::sqrt(best);
    for (int it = 0; it < 30 && dist > 0; ++it) {
      const Vec2 uv = v0 + ab[0] * e1 + ab[1] * e2;
      const SurfaceDerivs d = S.derivs(uv[0], uv[1]);
      Eigen::Matrix<double, 3, 2> J;
      J.col(0) = (d.ru * e1[0] + d.rv * e1[1]) * scale;
      J.col(1) = (d.ru * e2[0] + d.rv * e2[1]) * scale;
      const Vec3 F = (d.r - origin) * scale - target_local;
      const Eigen::Matrix2d JtJ = J.transpose() * J;
      if (!(std::abs(JtJ.determinant()) > 0)) break;
      const Vec2 step = -JtJ.inverse() * (J.transpose() * F);
      ab += step;
      if (step.norm() < 1e-15) break;
      if (ab.norm() > 10) break;
    }
    const Vec2 uv = v0 + ab[0] * e1 + ab[1] * e2;
    dist = ((S.point(uv[0], uv[1]) - origin) * scale - target_local).norm();
    if (dist <= on_surface_tol && ab[0] >= -kEdge && ab[1] >= -kEdge && ab[0] + ab[1] <= 1 + kEdge) roots.push_back(ab);
  }

  for (const Vec2& seed : seeds) {
    Vec2 ab = seed;
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
      const Eval E = eval(ab);
      if (!(E.lam > 0)) break;
      if (E.g.norm() < 1e-15) {
        ok = true;
        break;
      }
      const double det = E.J.determinant();
      if (!(std::abs(det) > 0)) break;
      Vec2 step = -E.J.inverse() * E.g;
      if (step.norm() > 0.25) step *= 0.25 / step.norm();
      ab += step;
      if (ab.norm() > 10) break;
      if (step.norm() < 1e-15) {
        ok = E.g.norm() < 1e-12;
        break;
      }
    }
    if (!ok) {
      const Eval E = eval(ab);
      ok = E.lam > 0 && E.g.norm() < 1e-12;
    }
    if (!ok) continue;
    if (ab[0] < -kEdge || ab[1] < -kEdge || ab[0] + ab[1] > 1 + kEdge) continue;
    bool dup = false;
    for (const Vec2& r0 : roots) dup = dup || (r0 - ab).norm() < 1e-9;
    if (dup) continue;
    roots.push_back(ab);
  }

  for (const Vec2& ab : roots) {
    const Eval E = eval(ab);
    const bool at_target = (E.x - target_local).norm() <= on_surface_tol;
    if (!at_target && E.lam < rn) continue;
    StringCrossing c;
    c.point = E.x;
    c.param = v0 + ab[0] * e1 + ab[1] * e2;
    const Vec3 n = S.orientation * E.d.ru.cross(E.d.rv);
    c.sign = sh.dot(n) >= 0 ? 1.0 : -1.0;
    c.at_target = at_target;
    out.push_back(c);
  }
  return out;
}

std::vector<Quaternion> contour_integrals(const TriangularPatch& patch, const BasisSet& basis, const Vec3& target,
                                          const ContourOptions& opt) {
  ContourOptions o = opt;
  o.gradient = false;
  const Vec3 rp = (target - patch.origin) / patch.h;
  const std::vector<double> v = integrate_contour(patch, basis, rp, o, nullptr, nullptr);
  std::vector<Quaternion> I(basis.size());
  for (int j = 0; j < basis.size(); ++j) I[j] = Quaternion(v[4 * j], v[4 * j + 1], v[4 * j + 2], v[4 * j + 3]);
  return I;
}

PatchIntegrals patch_integrals(const TriangularPatch& patch, const BasisSet& basis, const Vec3& target,
                               const ContourOptions& opt) {
  PatchIntegrals pi;
  pi.scale = 1.0 / patch.h;
  pi.target_local = (target - patch.origin) * pi.scale;
  const int n = basis.size();
  const std::vector<double> v =
      integrate_contour(patch, basis, pi.target_local, opt, &pi.contour_points, &pi.max_depth_reached);
  const int stride = opt.gradient ? 16 : 4;
  pi.I.resize(n);
  if (opt.gradient) pi.dI.resize(n);
  for (int j = 0; j < n; ++j) {
    const double* o = v.data() + j * stride;
    pi.I[j] = Quaternion(o[0], o[1], o[2], o[3]);
    if (opt.gradient)
      for (int m = 0; m < 3; ++m)
        pi.dI[j][m] = Quaternion(o[4 + 4 * m], o[5 + 4 * m], o[6 + 4 * m], o[7 + 4 * m]);
  }
  if (!opt.string_correction) return pi;
  pi.crossings = find_string_crossings(patch, pi.target_local, opt.on_surface_tol);
  if (pi.crossings.empty()) return pi;
  std::vector<Vec3> f(n);
  std::vector<Eigen::Matrix3d> jac(opt.gradient ? n : 0);
  basis.eval(pi.target_local, f.data());
  if (opt.gradient) basis.eval_jacobian(pi.target_local, jac.data());
  for (const StringCrossing& c : pi.crossings) {
    const double w = kFourPi * c.sign * (c.at_target ? 0.5 : 1.0);
    for (int j = 0; j < n; ++j) {
      pi.I[j].v -= w * f[j];
      if (opt.gradient)
        for (int m = 0; m < 3; ++m) pi.dI[j][m].v -= w * jac[j].col(m);
    }
  }
  return pi;
}

double dlp_from_integrals(const PatchIntegrals& pi, const DensityCoefficients& c) {
  double s = 0.0;
  for (size_t j = 0; j < pi.I.size(); ++j) s += scalar_of_product(pi.I[j], c.C[j]);
  return s / kFourPi;
}

Vec3 grad_dlp_from_integrals(const PatchIntegrals& pi, const DensityCoefficients& c) {
  if (pi.dI.size() != pi.I.size()) throw std::invalid_argument("grad_dlp_from_integrals: no derivative integrals");
  Vec3 g = Vec3::Zero();
  for (size_t j = 0; j < pi.I.size(); ++j)
    for (int m = 0; m < 3; ++m) g[m] += scalar_of_product(pi.dI[j][m], c.C[j]);
  return g * (pi.scale / kFourPi);
}

SlpCoefficients fit_slp_density(const PatchFit& fit, const TriangularPatch& patch, const std::vector<double>& mu) {
  const int n = static_cast<int>(patch.nodes.size());
  if (static_cast<int>(mu.size()) != n) throw std::invalid_argument("fit_slp_density: sample count");
  std::vector<Quaternion> sa(n), sb(n);
  for (int i = 0; i < n; ++i) {
    const GeometrySample g = geometry_at(*patch.chart, patch.node_params[i][0], patch.node_params[i][1]);
    const Quaternion nbar = conjugate(Quaternion::pure(g.normal));
    const Quaternion rbar = conjugate(Quaternion::pure(fit.frame().to_local(patch.nodes[i])));
    sa[i] = nbar * mu[i];
    sb[i] = qmul(nbar, rbar) * mu[i];
  }
  return {fit.fit(sa), fit.fit(sb), patch.h};
}

double slp_from_integrals(const PatchIntegrals& pi, const SlpCoefficients& c, bool four_pi) {
  const Quaternion rpbar = conjugate(Quaternion::pure(pi.target_local));
  double s = 0.0;
  for (size_t j = 0; j < pi.I.size(); ++j) {
    const Quaternion cj = qmul(c.a.C[j], rpbar) - c.b.C[j];
    s -= scalar_of_product(pi.I[j], cj);
  }
  s *= c.h;
  return four_pi ? s / kFourPi : s;
}

double contour_integrate_dlp(const TriangularPatch& patch, const BasisSet& basis, const DensityCoefficients& c,
                             const Vec3& target, const ContourOptions& opt) {
  ContourOptions o = opt;
  o.gradient = false;
  return dlp_from_integrals(patch_integrals(patch, basis, target, o), c);
}

double contour_integrate_slp(const TriangularPatch& patch, const BasisSet& basis, const SlpCoefficients& c,
                             const Vec3& target, bool four_pi, const ContourOptions& opt) {
  ContourOptions o = opt;
  o.gradient = false;
  return slp_from_integrals(patch_integrals(patch, basis, target, o), c, four_pi);
}

Vec3 contour_integrate_grad_dlp(const TriangularPatch& patch, const BasisSet& basis, const DensityCoefficients& c,
                                const Vec3& target, const ContourOptions& opt) {
  ContourOptions o = opt;
  o.gradient = true;
  return grad_dlp_from_integrals(patch_integrals(patch, basis, target, o), c);
}

}  // namespace qclose
