#include "qclose/moments.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "qclose/quadrature.hpp"

namespace qclose {

namespace {

// Geometry of the pair in the coordinate x = |r| t - s along the segment direction.
struct PairGeometry {
  double a;     // |r|
  double s;     // projection of r' on r / |r|
  double rho2;  // squared distance of r' from the line through r
  double x0, x1;
  double R0, R1;  // |r'|, |r - r'|
};

PairGeometry pair_geometry(const Vec3& r, const Vec3& rp) {
  PairGeometry g;
  g.a = r.norm();
  g.s = r.dot(rp) / g.a;
  g.rho2 = r.cross(rp).squaredNorm() / (g.a * g.a);
  g.x0 = -g.s;
  g.x1 = g.a - g.s;
  g.R0 = rp.norm();
  g.R1 = (r - rp).norm();
  return g;
}

[[noreturn]] void throw_on_segment(const Vec3& r, const Vec3& rp) {
  std::ostringstream os;
  os.precision(17);
  os << "singular moment: target (" << rp.transpose() << ") lies on the source segment to (" << r.transpose()
     << ")";
  throw std::domain_error(os.str());
}

bool on_segment(const PairGeometry& g) {
  return g.x0 < 0 && g.x1 > 0 && g.rho2 <= 1e-30 * g.a * g.a;
}

}  // namespace

void moments_by_recurrence(const Vec3& r, const Vec3& rp, int kmax, double* M, double* L, double* N) {
  const PairGeometry g = pair_geometry(r, rp);
  if (on_segment(g)) throw_on_segment(r, rp);
  const double a = g.a, s = g.s, rho2 = g.rho2, x0 = g.x0, x1 = g.x1, R0 = g.R0, R1 = g.R1;
  const double A = a * a, B = a * s, C = R0 * R0;
  const double dR = a * (a - 2 * s) / (R1 + R0);  // R1 - R0

  // x + R for x >= 0, written without cancellation for x < 0 as rho^2 / (R - x).
  auto kfun = [](double x, double R) { return (2 * R + x) / ((R + x) * (R + x) * R * R * R); };
  auto gfun = [rho2](double x, double R) { return x * (2 * x * x + 3 * rho2) / (3 * rho2 * rho2 * R * R * R); };

  double N0, M0, L0;
  if (x0 >= 0) {
    N0 = std::log((x1 + R1) / (x0 + R0)) / a;
    M0 = (1.0 / (R0 * (R0 + x0)) - 1.0 / (R1 * (R1 + x1))) / a;
    L0 = (kfun(x0, R0) - kfun(x1, R1)) / (3 * a);
  } else if (x1 <= 0) {
    N0 = std::log((R0 - x0) / (R1 - x1)) / a;
    M0 = (1.0 / (R1 * (R1 - x1)) - 1.0 / (R0 * (R0 - x0))) / a;
    L0 = (kfun(-x1, R1) - kfun(-x0, R0)) / (3 * a);
  } else {
    N0 = std::log((x1 + R1) * (R0 - x0) / rho2) / a;
    M0 = (x1 / R1 - x0 / R0) / (a * rho2);
    L0 = (gfun(x1, R1) - gfun(x0, R0)) / a;
  }
  N[0] = N0;
  M[0] = M0;
  if (kmax >= 1) {
    N[1] = dR / A + (s / a) * N0;
    M[1] = dR / (R0 * R1 * A) + (s / a) * M0;
  }
  for (int k = 2; k <= kmax; ++k) {
    N[k] = ((2 * k - 1.0) / k) * (B / A) * N[k - 1] - ((k - 1.0) / k) * (C / A) * N[k - 2] + R1 / (k * A);
    M[k] = (B / A) * M[k - 1] + ((k - 1.0) / A) * N[k - 2] - 1.0 / (A * R1);
  }
  if (L) {
    L[0] = L0;
    if (kmax >= 1) {
      const double inv3 = (R1 * R1 + R1 * R0 + R0 * R0) * dR / (R0 * R0 * R0 * R1 * R1 * R1);
      L[1] = inv3 / (3 * A) + (s / a) * L0;
    }
    for (int k = 2; k <= kmax; ++k) L[k] = (M[k - 2] + 2 * B * L[k - 1] - C * L[k - 2]) / A;
  }
}

void moments_by_quadrature(const Vec3& r, const Vec3& rp, int kmax, double* M, double* L, double* N) {
  const PairGeometry g = pair_geometry(r, rp);
  if (on_segment(g)) throw_on_segment(r, rp);
  const double a = g.a, s = g.s, rho2 = g.rho2;
  const double tc = s / a, e2 = rho2 / (a * a);
  for (int k = 0; k <= kmax; ++k) {
    M[k] = 0.0;
    N[k] = 0.0;
    if (L) L[k] = 0.0;
  }
  const QuadratureRule& gl = gauss_legendre(16);
  // Panels are bisected until each is at most one half-length from the complex singularity.
  struct Seg {
    double l, r;
    int depth;
  };
  Seg stack[128];
  int top = 0;
  stack[top++] = {0.0, 1.0, 0};
  while (top > 0) {
    const Seg sg = stack[--top];
    const double mid = 0.5 * (sg.l + sg.r), half = 0.5 * (sg.r - sg.l);
    const double dist = std::sqrt((mid - tc) * (mid - tc) + e2);
    if (half > 0.5 * dist && sg.depth < 60 && top + 2 < 128) {
      // Push the right half first so that panels are accumulated left to right.
      stack[top++] = {mid, sg.r, sg.depth + 1};
      stack[top++] = {sg.l, mid, sg.depth + 1};
      continue;
    }
    for (int i = 0; i < gl.size(); ++i) {
      const double t = mid + half * gl.x[i];
      const double w = half * gl.w[i];
      const double x = a * t - s;
      const double R2 = x * x + rho2;
      const double iR = 1.0 / std::sqrt(R2);
      const double iR3 = iR / R2;
      const double iR5 = iR3 / R2;
      double tk = w;
      for (int k = 0; k <= kmax; ++k) {
        N[k] += tk * iR;
        M[k] += tk * iR3;
        if (L) L[k] += tk * iR5;
        tk *= t;
      }
    }
  }
}

MomentMethod moments_into(const Vec3& r, const Vec3& rp, int kmax, double* M, double* L, double* N,
                          const MomentOptions& opt) {
  const double A = r.squaredNorm(), C = rp.squaredNorm();
  const double deg = r.cross(rp).squaredNorm();
  const double dot = r.dot(rp);
  const bool behind = dot < opt.min_cos * std::sqrt(A * C);
  const double cmax = behind ? opt.behind_ratio : opt.max_ratio;
  if (C <= cmax * cmax * A && deg >= opt.eps_deg * A * C) {
    moments_by_recurrence(r, rp, kmax, M, L, N);
    return MomentMethod::Recurrence;
  }
  moments_by_quadrature(r, rp, kmax, M, L, N);
  return MomentMethod::Quadrature;
}

MomentTable compute_moments(const Vec3& r, const Vec3& rp, int kmax, const MomentOptions& opt) {
  if (!(r.squaredNorm() > 0)) throw std::domain_error("compute_moments: source point at the origin");
  MomentTable t;
  t.r = r;
  t.rp = rp;
  t.kmax = kmax;
  t.L.resize(kmax + 1);
  t.M.resize(kmax + 1);
  t.N.resize(kmax + 1);
  const MomentMethod m = moments_into(r, rp, kmax, t.M.data(), t.L.data(), t.N.data(), opt);
  t.method.assign(kmax + 1, m);
  t.ratio = rp.norm() / r.norm();
  return t;
}

double moment_oracle(const Vec3& r, const Vec3& rp, int k, int kernel_power, double tol) {
  if (kernel_power != 1 && kernel_power != 3 && kernel_power != 5)
    throw std::invalid_argument("moment_oracle: kernel_power must be 1, 3 or 5");
  const PairGeometry g = pair_geometry(r, rp);
  if (on_segment(g)) throw_on_segment(r, rp);
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  std::vector<double> cuts;
  std::function<double(double)> f;
  const double rho = std::sqrt(g.rho2);
  if (rho > 1e-12 * g.a) {
    // t = t_c + (rho / a) sinh(u) gives |t r - r'| = rho cosh(u) and an analytic integrand.
    const double tc = g.s / g.a, c = rho / g.a;
    f = [=](double u) {
      const double t = tc + c * std::sinh(u);
      return std::pow(t, k) / (g.a * std::pow(rho * std::cosh(u), kernel_power - 1));
    };
    const double u0 = std::asinh(-tc / c), u1 = std::asinh((1 - tc) / c);
    cuts = {u0, u1};
    for (double x = std::floor(u0) + 1; x < u1; x += 1) cuts.push_back(x);
  } else {
    // On the line through r but off the segment: no nearby singularity inside [0, 1].
    f = [&](double t) { return std::pow(t, k) / std::pow((t * r - rp).norm(), kernel_power); };
    cuts = {0.0, 0.5, 1.0};
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0, err_total = 0.0, l1_total = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    double err = 0.0, l1 = 0.0;
    total += GK::integrate(f, cuts[i], cuts[i + 1], 8, tol, &err, &l1);
    err_total += err;
    l1_total += l1;
  }
  if (!(err_total <= std::max(1e3 * tol, 1e-10) * l1_total)) {
    std::ostringstream os;
    os << "moment_oracle: no convergence (error estimate " << err_total << ", L1 " << l1_total << ")";
    throw std::runtime_error(os.str());
  }
  return total;
}

}  // namespace qclose
