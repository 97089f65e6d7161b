#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qclose/jet.hpp"
#include "qclose/quaternion.hpp"

namespace qclose {

using Vec2 = Eigen::Vector2d;

struct SurfaceDerivs {
  Vec3 r, ru, rv, ruu, ruv, rvv;
};

// One chart r(u, v) over a parameter rectangle. The unit normal is orientation * (r_u x r_v) / |.|.
class ParametricSurface {
 public:
  virtual ~ParametricSurface() = default;

  virtual SurfaceDerivs derivs(double u, double v) const = 0;
  virtual Vec3 point(double u, double v) const { return derivs(u, v).r; }

  std::array<double, 2> u_range{0.0, 1.0};
  std::array<double, 2> v_range{0.0, 1.0};
  bool periodic_u = false;
  bool periodic_v = false;
  int orientation = 1;
  std::string name;
};

using ChartPtr = std::shared_ptr<const ParametricSurface>;

// Charts whose map is written once as a template over the scalar type.
template <class Derived>
class JetSurface : public ParametricSurface {
 public:
  SurfaceDerivs derivs(double u, double v) const override {
    const auto m = static_cast<const Derived*>(this)->map(Jet2::var_u(u), Jet2::var_v(v));
    SurfaceDerivs d;
    for (int a = 0; a < 3; ++a) {
      d.r[a] = m[a].f;
      d.ru[a] = m[a].fu;
      d.rv[a] = m[a].fv;
      d.ruu[a] = m[a].fuu;
      d.ruv[a] = m[a].fuv;
      d.rvv[a] = m[a].fvv;
    }
    return d;
  }
  Vec3 point(double u, double v) const override {
    const auto m = static_cast<const Derived*>(this)->map(u, v);
    return {m[0], m[1], m[2]};
  }
};

// A closed or open surface made of one or more charts.
struct Surface {
  std::string name;
  std::vector<ChartPtr> charts;
};

struct GeometrySample {
  Vec3 point;
  Vec3 normal;
  double jacobian = 0;  // |r_u x r_v|
  double E = 0, F = 0, G = 0, L = 0, M = 0, N = 0;
  double H = 0;
};

GeometrySample geometry_at(const ParametricSurface& s, double u, double v);

// Cruller with u = theta (poloidal), v = phi (toroidal); normal r_phi x r_theta (outward).
ChartPtr make_cruller(double a, double b, double w_c, int w_m, int w_n);
Surface make_cruller_surface(double a, double b, double w_c, int w_m, int w_n);

// Cushion radius in the original spherical coordinates (theta longitude, phi latitude).
double cushion_radius(double theta, double phi);
// Star-shaped surface r = f(d) d over the unit sphere, covered by six cube-sphere charts.
Surface make_cushion();
Surface make_sphere(double radius = 1.0);

struct TaylorTerm {
  int k = 0;
  int l = 0;
  double a = 0;
};
// Graph (x, y, sum a x^k y^l) over [x0, x1] x [y0, y1]; normal points to +z.
ChartPtr make_graph_patch(const std::vector<TaylorTerm>& a_D, std::array<double, 4> domain);
double eval_taylor(const std::vector<TaylorTerm>& a, double x, double y);

// ---------------------------------------------------------------- panels and triangles

struct Panel {
  int id = 0;
  int chart = 0;
  int iu = 0, iv = 0;
  double u0 = 0, u1 = 0, v0 = 0, v1 = 0;
  // p x p tensor Gauss-Legendre Nystrom nodes, index i * p + j for (u_i, v_j).
  std::vector<Vec2> params;
  std::vector<Vec3> nodes;
  std::vector<Vec3> normals;
  std::vector<double> weights;  // includes the area Jacobian
  std::array<Vec3, 4> corners;  // (u0,v0), (u1,v0), (u1,v1), (u0,v1)
  double h = 0;                 // max pairwise corner distance
  Vec3 center;
  double radius = 0;  // bounding radius about center, over nodes and sampled boundary
};

struct Discretization {
  Surface surface;
  int n_u = 0, n_v = 0, p = 0;
  std::vector<Panel> panels;  // chart-major, then iu, then iv
  int panel_index(int chart, int iu, int iv) const { return (chart * n_u + iu) * n_v + iv; }
  size_t node_count() const { return panels.size() * static_cast<size_t>(p) * p; }
};

Discretization build_panels(const Surface& s, int n_u, int n_v, int p);

struct ContourNode {
  Vec3 r;
  Vec3 dr;  // tangent times quadrature weight
};

struct TriangularPatch {
  int panel = -1;
  int split = 0;
  int sub = 0;
  ChartPtr chart;
  std::array<Vec2, 3> verts;  // counterclockwise w.r.t. the normal; verts[0] is the collapse vertex
  std::vector<Vec2> node_params;
  std::vector<Vec3> nodes;  // interior nodes r^(k,l), ordered (1,1), (2,1), (2,2), ...
  std::vector<double> weights;  // area-weighted quadrature weights of the triangle rule
  Vec3 origin;                  // nodes[0]
  double h = 0;                 // max pairwise vertex distance
  int q = 0;
  std::vector<ContourNode> contour;  // 3 * q nodes, edge-major
};

// Row k at GL_p fraction s_k from verts[0], carrying k points at GL_k fractions across.
TriangularPatch make_triangle(const ChartPtr& chart, Vec2 a, Vec2 b, Vec2 c, int p, int q);

// Parameter-space triangle splits of a panel.
enum class SplitKind { Diagonal = 0, AntiDiagonal = 1, FanLeft = 2, FanRight = 3 };
std::vector<std::array<Vec2, 3>> split_triangles(double u0, double u1, double v0, double v1, SplitKind kind);

// Two triangles per panel along the (u0,v0)-(u1,v1) diagonal.
std::vector<TriangularPatch> build_patches(const Surface& s, int n_u, int n_v, int p, int q);

// Closest point on a chart near a starting parameter (Newton on the squared distance).
Vec2 closest_parameter(const ParametricSurface& s, const Vec3& target, Vec2 start, int max_iter = 30);

}  // namespace qclose
