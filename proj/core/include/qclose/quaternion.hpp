#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>

namespace qclose {

using Vec3 = Eigen::Vector3d;

// Quaternion g = (s, v) = s + v1 i + v2 j + v3 k. Plain value type; nothing here normalizes.
struct Quaternion {
  double s = 0.0;
  Vec3 v = Vec3::Zero();

  Quaternion() = default;
  Quaternion(double s_, const Vec3& v_) : s(s_), v(v_) {}
  Quaternion(double s_, double x, double y, double z) : s(s_), v(x, y, z) {}

  static Quaternion scalar(double a) { return {a, Vec3::Zero()}; }
  static Quaternion pure(const Vec3& a) { return {0.0, a}; }

  double operator[](int i) const { return i == 0 ? s : v[i - 1]; }
  double& operator[](int i) { return i == 0 ? s : v[i - 1]; }

  double norm() const { return std::sqrt(s * s + v.squaredNorm()); }

  Quaternion& operator+=(const Quaternion& o) {
    s += o.s;
    v += o.v;
    return *this;
  }
  Quaternion& operator-=(const Quaternion& o) {
    s -= o.s;
    v -= o.v;
    return *this;
  }
  Quaternion& operator*=(double a) {
    s *= a;
    v *= a;
    return *this;
  }
};

// Hamilton product: gh = (g0 h0 - g.h, g0 h + h0 g + g x h).
inline Quaternion qmul(const Quaternion& g, const Quaternion& h) {
  return {g.s * h.s - g.v.dot(h.v), g.s * h.v + h.s * g.v + g.v.cross(h.v)};
}

inline Quaternion conjugate(const Quaternion& g) { return {g.s, -g.v}; }

inline Quaternion operator*(const Quaternion& g, const Quaternion& h) { return qmul(g, h); }
inline Quaternion operator+(Quaternion g, const Quaternion& h) { return g += h; }
inline Quaternion operator-(Quaternion g, const Quaternion& h) { return g -= h; }
inline Quaternion operator-(const Quaternion& g) { return {-g.s, -g.v}; }
inline Quaternion operator*(double a, Quaternion g) { return g *= a; }
inline Quaternion operator*(Quaternion g, double a) { return g *= a; }

// Scalar part of g h without forming the vector part.
inline double scalar_of_product(const Quaternion& g, const Quaternion& h) {
  return g.s * h.s - g.v.dot(h.v);
}

}  // namespace qclose
