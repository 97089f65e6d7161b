#include "qclose/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qclose/quadrature.hpp"

namespace qclose {

namespace {

constexpr double kPi = std::numbers::pi;

class Cruller : public JetSurface<Cruller> {
 public:
  Cruller(double a, double b, double wc, int wm, int wn) : a_(a), b_(b), wc_(wc), wm_(wm), wn_(wn) {
    u_range = {0.0, 2 * kPi};
    v_range = {0.0, 2 * kPi};
    periodic_u = periodic_v = true;
    orientation = -1;
    name = "cruller";
  }

  template <class T>
  std::array<T, 3> map(const T& th, const T& ph) const {
    using std::cos;
    using std::sin;
    const T f = T(b_) + wc_ * cos(T(double(wn_)) * ph + T(double(wm_)) * th);
    const T rho = T(a_) + f * cos(th);
    return {rho * cos(ph), rho * sin(ph), f * sin(th)};
  }

 private:
  double a_, b_, wc_;
  int wm_, wn_;
};

enum class Radial { Sphere, Cushion };

// Equiangular cube-sphere face: d = normalize(N + tan(u) E1 + tan(v) E2), r = f(d) d.
class CubeFace : public JetSurface<CubeFace> {
 public:
  CubeFace(int face, Radial kind, double radius) : kind_(kind), radius_(radius) {
    const int axis = face / 2;
    const double sign = face % 2 == 0 ? 1.0 : -1.0;
    n_ = Vec3::Zero();
    n_[axis] = sign;
    e1_ = Vec3::Zero();
    e2_ = Vec3::Zero();
    e1_[(axis + 1) % 3] = 1.0;
    e2_[(axis + 2) % 3] = 1.0;
    u_range = {-kPi / 4, kPi / 4};
    v_range = {-kPi / 4, kPi / 4};
    name = "cube_face_" + std::to_string(face);
    const SurfaceDerivs d = derivs(0.0, 0.0);
    orientation = d.ru.cross(d.rv).dot(d.r) > 0 ? 1 : -1;
  }

  template <class T>
  std::array<T, 3> map(const T& u, const T& v) const {
    using std::sqrt;
    using std::tan;
    const T tu = tan(u), tv = tan(v);
    std::array<T, 3> p;
    for (int a = 0; a < 3; ++a) p[a] = T(n_[a]) + tu * e1_[a] + tv * e2_[a];
    const T len = sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    for (auto& c : p) c = c / len;
    T f = T(radius_);
    if (kind_ == Radial::Cushion) f = sqrt(T(0.8) + 8.0 * p[1] * p[1] * p[2] * p[2]);
    for (auto& c : p) c = f * c;
    return p;
  }

 private:
  Radial kind_;
  double radius_;
  Vec3 n_, e1_, e2_;
};

class GraphPatch : public JetSurface<GraphPatch> {
 public:
  GraphPatch(std::vector<TaylorTerm> a, std::array<double, 4> dom) : a_(std::move(a)) {
    u_range = {dom[0], dom[1]};
    v_range = {dom[2], dom[3]};
    name = "graph";
  }

  template <class T>
  std::array<T, 3> map(const T& x, const T& y) const {
    T z(0.0);
    for (const auto& t : a_) {
      T m(t.a);
      for (int i = 0; i < t.k; ++i) m = m * x;
      for (int i = 0; i < t.l; ++i) m = m * y;
      z = z + m;
    }
    return {x, y, z};
  }

 private:
  std::vector<TaylorTerm> a_;
};

}  // namespace

GeometrySample geometry_at(const ParametricSurface& s, double u, double v) {
  const SurfaceDerivs d = s.derivs(u, v);
  const Vec3 c = d.ru.cross(d.rv);
  const double jac = c.norm();
  if (!(jac > 1e-12)) {
    std::ostringstream os;
    os << "degenerate surface Jacobian " << jac << " on chart " << s.name << " at (" << u << ", " << v << ")";
    throw std::runtime_error(os.str());
  }
  GeometrySample g;
  g.point = d.r;
  g.normal = (s.orientation * c) / jac;
  g.jacobian = jac;
  g.E = d.ru.dot(d.ru);
  g.F = d.ru.dot(d.rv);
  g.G = d.rv.dot(d.rv);
  g.L = d.ruu.dot(g.normal);
  g.M = d.ruv.dot(g.normal);
  g.N = d.rvv.dot(g.normal);
  g.H = 0.5 * (g.L * g.G - 2 * g.M * g.F + g.N * g.E) / (g.E * g.G - g.F * g.F);
  return g;
}

ChartPtr make_cruller(double a, double b, double w_c, int w_m, int w_n) {
  if (!(a > b + std::abs(w_c) && b - std::abs(w_c) > 0))
    throw std::invalid_argument("make_cruller: need a > b + |w_c| and b > |w_c|");
  return std::make_shared<Cruller>(a, b, w_c, w_m, w_n);
}

Surface make_cruller_surface(double a, double b, double w_c, int w_m, int w_n) {
  return {"cruller", {make_cruller(a, b, w_c, w_m, w_n)}};
}

double cushion_radius(double theta, double phi) {
  return std::sqrt(0.8 + 0.5 * (std::cos(2 * theta) - 1) * (std::cos(4 * phi) - 1));
}

Surface make_cushion() {
  Surface s{"cushion", {}};
  for (int f = 0; f < 6; ++f) s.charts.push_back(std::make_shared<CubeFace>(f, Radial::Cushion, 1.0));
  return s;
}

Surface make_sphere(double radius) {
  Surface s{"sphere", {}};
  for (int f = 0; f < 6; ++f) s.charts.push_back(std::make_shared<CubeFace>(f, Radial::Sphere, radius));
  return s;
}

ChartPtr make_graph_patch(const std::vector<TaylorTerm>& a_D, std::array<double, 4> domain) {
  return std::make_shared<GraphPatch>(a_D, domain);
}

double eval_taylor(const std::vector<TaylorTerm>& a, double x, double y) {
  double z = 0.0;
  for (const auto& t : a) z += t.a * std::pow(x, t.k) * std::pow(y, t.l);
  return z;
}

Discretization build_panels(const Surface& s, int n_u, int n_v, int p) {
  if (n_u < 1 || n_v < 1 || p < 1) throw std::invalid_argument("build_panels: bad sizes");
  Discretization d;
  d.surface = s;
  d.n_u = n_u;
  d.n_v = n_v;
  d.p = p;
  const QuadratureRule& gl = gauss_legendre_unit(p);
  for (size_t c = 0; c < s.charts.size(); ++c) {
    const ParametricSurface& ch = *s.charts[c];
    const double du = (ch.u_range[1] - ch.u_range[0]) / n_u;
    const double dv = (ch.v_range[1] - ch.v_range[0]) / n_v;
    for (int iu = 0; iu < n_u; ++iu)
      for (int iv = 0; iv < n_v; ++iv) {
        Panel P;
        P.id = static_cast<int>(d.panels.size());
        P.chart = static_cast<int>(c);
        P.iu = iu;
        P.iv = iv;
        P.u0 = ch.u_range[0] + iu * du;
        P.u1 = P.u0 + du;
        P.v0 = ch.v_range[0] + iv * dv;
        P.v1 = P.v0 + dv;
        for (int i = 0; i < p; ++i)
          for (int j = 0; j < p; ++j) {
            const double u = P.u0 + gl.x[i] * du, v = P.v0 + gl.x[j] * dv;
            const GeometrySample g = geometry_at(ch, u, v);
            P.params.emplace_back(u, v);
            P.nodes.push_back(g.point);
            P.normals.push_back(g.normal);
            P.weights.push_back(gl.w[i] * gl.w[j] * du * dv * g.jacobian);
          }
        P.corners = {ch.point(P.u0, P.v0), ch.point(P.u1, P.v0), ch.point(P.u1, P.v1), ch.point(P.u0, P.v1)};
        for (int a = 0; a < 4; ++a)
          for (int b = a + 1; b < 4; ++b) P.h = std::max(P.h, (P.corners[a] - P.corners[b]).norm());
        P.center = ch.point(0.5 * (P.u0 + P.u1), 0.5 * (P.v0 + P.v1));
        for (const auto& x : P.nodes) P.radius = std::max(P.radius, (x - P.center).norm());
        for (const auto& x : P.corners) P.radius = std::max(P.radius, (x - P.center).norm());
        d.panels.push_back(std::move(P));
      }
  }
  return d;
}

TriangularPatch make_triangle(const ChartPtr& chart, Vec2 a, Vec2 b, Vec2 c, int p, int q) {
  const ParametricSurface& s = *chart;
  {
    const Vec2 m = (a + b + c) / 3.0;
    const SurfaceDerivs d = s.derivs(m[0], m[1]);
    const Vec2 e1 = b - a, e2 = c - a;
    const Vec3 t1 = d.ru * e1[0] + d.rv * e1[1];
    const Vec3 t2 = d.ru * e2[0] + d.rv * e2[1];
    const Vec3 n = s.orientation * d.ru.cross(d.rv);
    if (t1.cross(t2).dot(n) < 0) std::swap(b, c);
  }
  TriangularPatch T;
  T.chart = chart;
  T.verts = {a, b, c};
  T.q = q;
  const Vec2 e1 = b - a, e2 = c - a;
  const double area2 = std::abs(e1[0] * e2[1] - e1[1] * e2[0]);
  const QuadratureRule& rows = gauss_legendre_unit(p);
  for (int k = 1; k <= p; ++k) {
    const QuadratureRule& across = gauss_legendre_unit(k);
    const double sk = rows.x[k - 1];
    for (int l = 1; l <= k; ++l) {
      const double g = across.x[l - 1];
      const Vec2 X = a + sk * ((1 - g) * e1 + g * e2);
      const GeometrySample gs = geometry_at(s, X[0], X[1]);
      T.node_params.push_back(X);
      T.nodes.push_back(gs.point);
      T.weights.push_back(rows.w[k - 1] * sk * across.w[l - 1] * area2 * gs.jacobian);
    }
  }
  T.origin = T.nodes[0];
  const Vec3 P0 = s.point(a[0], a[1]), P1 = s.point(b[0], b[1]), P2 = s.point(c[0], c[1]);
  T.h = std::max({(P0 - P1).norm(), (P1 - P2).norm(), (P2 - P0).norm()});
  const QuadratureRule& gl = gauss_legendre_unit(q);
  for (int e = 0; e < 3; ++e) {
    const Vec2 A = T.verts[e], B = T.verts[(e + 1) % 3];
    const Vec2 D = B - A;
    for (int i = 0; i < q; ++i) {
      const Vec2 X = A + gl.x[i] * D;
      const SurfaceDerivs d = s.derivs(X[0], X[1]);
      T.contour.push_back({d.r, (d.ru * D[0] + d.rv * D[1]) * gl.w[i]});
    }
  }
  return T;
}

std::vector<std::array<Vec2, 3>> split_triangles(double u0, double u1, double v0, double v1, SplitKind kind) {
  const Vec2 A(u0, v0), B(u1, v0), C(u1, v1), D(u0, v1);
  switch (kind) {
    case SplitKind::Diagonal:
      return {{B, C, A}, {D, A, C}};
    case SplitKind::AntiDiagonal:
      return {{A, B, D}, {C, D, B}};
    case SplitKind::FanLeft:
    case SplitKind::FanRight: {
      const double fu = kind == SplitKind::FanLeft ? 0.25 : 0.75;
      const Vec2 X(u0 + fu * (u1 - u0), 0.5 * (v0 + v1));
      return {{X, A, B}, {X, B, C}, {X, C, D}, {X, D, A}};
    }
  }
  return {};
}

std::vector<TriangularPatch> build_patches(const Surface& s, int n_u, int n_v, int p, int q) {
  if (p < 2) throw std::invalid_argument("build_patches: p must be >= 2");
  if (q < p + 2) throw std::invalid_argument("build_patches: q must be >= p + 2");
  const Discretization d = build_panels(s, n_u, n_v, 1);
  std::vector<TriangularPatch> out;
  for (const Panel& P : d.panels) {
    const auto tris = split_triangles(P.u0, P.u1, P.v0, P.v1, SplitKind::Diagonal);
    for (size_t t = 0; t < tris.size(); ++t) {
      TriangularPatch T = make_triangle(s.charts[P.chart], tris[t][0], tris[t][1], tris[t][2], p, q);
      T.panel = P.id;
      T.split = static_cast<int>(SplitKind::Diagonal);
      T.sub = static_cast<int>(t);
      out.push_back(std::move(T));
    }
  }
  return out;
}

Vec2 closest_parameter(const ParametricSurface& s, const Vec3& target, Vec2 x, int max_iter) {
  auto clamp = [&](Vec2 y) {
    if (!s.periodic_u) y[0] = std::clamp(y[0], s.u_range[0], s.u_range[1]);
    if (!s.periodic_v) y[1] = std::clamp(y[1], s.v_range[0], s.v_range[1]);
    return y;
  };
  const double span = std::min(s.u_range[1] - s.u_range[0], s.v_range[1] - s.v_range[0]);
  double f = (s.point(x[0], x[1]) - target).squaredNorm();
  for (int it = 0; it < max_iter; ++it) {
    const SurfaceDerivs d = s.derivs(x[0], x[1]);
    const Vec3 r = d.r - target;
    const Vec2 g(r.dot(d.ru), r.dot(d.rv));
    Eigen::Matrix2d Hm;
    Hm << d.ru.dot(d.ru) + r.dot(d.ruu), d.ru.dot(d.rv) + r.dot(d.ruv), d.ru.dot(d.rv) + r.dot(d.ruv),
        d.rv.dot(d.rv) + r.dot(d.rvv);
    if (Hm.determinant() <= 0 || Hm(0, 0) <= 0) {
      Hm << d.ru.dot(d.ru), d.ru.dot(d.rv), d.ru.dot(d.rv), d.rv.dot(d.rv);
    }
    Vec2 step = -Hm.inverse() * g;
    const double cap = 0.25 * span;
    if (step.norm() > cap) step *= cap / step.norm();
    double lam = 1.0;
    Vec2 y = clamp(x + step);
    double fy = (s.point(y[0], y[1]) - target).squaredNorm();
    while (fy > f && lam > 1e-6) {
      lam *= 0.5;
      y = clamp(x + lam * step);
      fy = (s.point(y[0], y[1]) - target).squaredNorm();
    }
    if (fy > f) break;
    const double moved = (y - x).norm();
    x = y;
    f = fy;
    if (moved < 1e-15 * (1 + x.norm())) break;
  }
  return x;
}

}  // namespace qclose
