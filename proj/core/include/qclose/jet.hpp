#pragma once

#include <cmath>

namespace qclose {

// Second-order forward-mode jet in two variables (u, v).
struct Jet2 {
  double f = 0, fu = 0, fv = 0, fuu = 0, fuv = 0, fvv = 0;

  Jet2() = default;
  Jet2(double c) : f(c) {}  // NOLINT: implicit constants are convenient in surface maps
  Jet2(double f_, double fu_, double fv_, double fuu_, double fuv_, double fvv_)
      : f(f_), fu(fu_), fv(fv_), fuu(fuu_), fuv(fuv_), fvv(fvv_) {}

  static Jet2 var_u(double u) { return {u, 1, 0, 0, 0, 0}; }
  static Jet2 var_v(double v) { return {v, 0, 1, 0, 0, 0}; }
};

// Chain rule for a scalar function g with derivatives g0, g1, g2 at a.f.
inline Jet2 chain(const Jet2& a, double g0, double g1, double g2) {
  return {g0,
          g1 * a.fu,
          g1 * a.fv,
          g1 * a.fuu + g2 * a.fu * a.fu,
          g1 * a.fuv + g2 * a.fu * a.fv,
          g1 * a.fvv + g2 * a.fv * a.fv};
}

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  return {a.f + b.f, a.fu + b.fu, a.fv + b.fv, a.fuu + b.fuu, a.fuv + b.fuv, a.fvv + b.fvv};
}
inline Jet2 operator-(const Jet2& a, const Jet2& b) {
  return {a.f - b.f, a.fu - b.fu, a.fv - b.fv, a.fuu - b.fuu, a.fuv - b.fuv, a.fvv - b.fvv};
}
inline Jet2 operator-(const Jet2& a) { return {-a.f, -a.fu, -a.fv, -a.fuu, -a.fuv, -a.fvv}; }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.f * b.f,
          a.fu * b.f + a.f * b.fu,
          a.fv * b.f + a.f * b.fv,
          a.fuu * b.f + 2 * a.fu * b.fu + a.f * b.fuu,
          a.fuv * b.f + a.fu * b.fv + a.fv * b.fu + a.f * b.fuv,
          a.fvv * b.f + 2 * a.fv * b.fv + a.f * b.fvv};
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) {
  const double ib = 1.0 / b.f;
  return a * chain(b, ib, -ib * ib, 2 * ib * ib * ib);
}

inline Jet2 sin(const Jet2& a) {
  const double s = std::sin(a.f), c = std::cos(a.f);
  return chain(a, s, c, -s);
}
inline Jet2 cos(const Jet2& a) {
  const double s = std::sin(a.f), c = std::cos(a.f);
  return chain(a, c, -s, -c);
}
inline Jet2 tan(const Jet2& a) {
  const double t = std::tan(a.f), d = 1 + t * t;
  return chain(a, t, d, 2 * t * d);
}
inline Jet2 sqrt(const Jet2& a) {
  const double s = std::sqrt(a.f);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.f));
}

}  // namespace qclose
