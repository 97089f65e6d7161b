#include <numbers>
#include <stdexcept>

#include "qclose/form_reduction.hpp"

namespace qclose {

namespace {

// Components (dx, dy, dz) of one quaternion index of a one-form at a contour point.
struct Form3 {
  double dx, dy, dz;
  double along(const Vec3& dr) const { return dx * dr[0] + dy * dr[1] + dz * dr[2]; }
};

}  // namespace

double appendix_c_oracle(const TriangularPatch& patch, const DensityCoefficients& c, const Vec3& target,
                         bool string_correction) {
  if (c.p != 2 || c.C.size() != 3) throw std::invalid_argument("appendix_c_oracle: requires p = 2 coefficients");
  const double h = patch.h;
  const Vec3 tp = (target - patch.origin) / h;
  const double xp = tp[0], yp = tp[1], zp = tp[2];
  const double mu0 = c.c11.s;
  // The explicit one-forms use x i - z k and y j - z k, half the basis gradients of x^2 - z^2 and y^2 - z^2.
  const Quaternion C21 = 2.0 * c.C[1];
  const Quaternion C22 = 2.0 * c.C[2];

  double total = 0.0;
  for (const ContourNode& node : patch.contour) {
    const Vec3 r = (node.r - patch.origin) / h;
    const Vec3 dr = node.dr / h;
    const double x = r[0], y = r[1], z = r[2];
    const MomentTable mt = compute_moments(r, tp, 3);
    const double M1 = mt.M[1], M2 = mt.M[2], M3 = mt.M[3];

    // Kernel term of the constant density.
    const Form3 w11{(yp * z - zp * y) * M1, (zp * x - xp * z) * M1, (xp * y - yp * x) * M1};

    const Form3 w21[4] = {
        {(x * y * y + 2 * x * z * z) * M3 - (yp * x * y + zp * x * z + xp * z * z) * M2,
         (y * z * z - x * x * y) * M3 + (yp * x * x - yp * z * z) * M2,
         (-2 * x * x * z - y * y * z) * M3 + (zp * x * x + xp * x * z + yp * y * z) * M2},
        {-x * y * z * M3 - (zp * x * y - yp * x * z - xp * y * z) * M2,
         (x * x * z + z * z * z) * M3 + (zp * x * x - 2 * xp * x * z - zp * z * z) * M2,
         -y * z * z * M3 + (-yp * x * x + xp * x * y + zp * y * z) * M2},
        {(x * x * z - y * y * z - z * z * z) * M3 + (-xp * x * z + yp * y * z + zp * z * z) * M2,
         2 * x * y * z * M3 - 2 * yp * x * z * M2,
         (-x * x * x - x * y * y + x * z * z) * M3 + (xp * x * x + yp * x * y - zp * x * z) * M2},
        {-x * x * y * M3 + (xp * x * y + zp * y * z - yp * z * z) * M2,
         (x * x * x + x * z * z) * M3 - (xp * x * x + 2 * zp * x * z - xp * z * z) * M2,
         -x * y * z * M3 + (zp * x * y + yp * x * z - xp * y * z) * M2}};

    const Form3 w22[4] = {
        {(x * z * z - x * y * y) * M3 + (xp * y * y - xp * z * z) * M2,
         (x * x * y + 2 * y * z * z) * M3 - (xp * x * y + zp * y * z + yp * z * z) * M2,
         (-x * x * z - 2 * y * y * z) * M3 + (zp * y * y + xp * x * z + yp * y * z) * M2},
        {-2 * x * y * z * M3 + 2 * xp * y * z * M2,
         (x * x * z - y * y * z + z * z * z) * M3 + (-xp * x * z + yp * y * z - zp * z * z) * M2,
         (x * x * y + y * y * y - y * z * z) * M3 + (-xp * x * y - yp * y * y + zp * y * z) * M2},
        {(-y * y * z - z * z * z) * M3 - (zp * y * y - 2 * yp * y * z - zp * z * z) * M2,
         x * y * z * M3 + (zp * x * y - yp * x * z - xp * y * z) * M2,
         x * z * z * M3 + (-yp * x * y + xp * y * y - zp * x * z) * M2},
        {(-y * y * y - y * z * z) * M3 + (yp * y * y + 2 * zp * y * z - yp * z * z) * M2,
         x * y * y * M3 - (yp * x * y + zp * x * z - xp * z * z) * M2,
         x * y * z * M3 + (-zp * x * y + yp * x * z - xp * y * z) * M2}};

    double s = mu0 * w11.along(dr);
    s += w21[0].along(dr) * C21.s - w21[1].along(dr) * C21.v[0] - w21[2].along(dr) * C21.v[1] -
         w21[3].along(dr) * C21.v[2];
    s += w22[0].along(dr) * C22.s - w22[1].along(dr) * C22.v[0] - w22[2].along(dr) * C22.v[1] -
         w22[3].along(dr) * C22.v[2];
    total += s;
  }
  double value = total / (4.0 * std::numbers::pi);

  if (string_correction) {
    // Extended density at the target: k mu0 + (x i - z k) C21 + (y j - z k) C22, scalar part.
    const Quaternion F = qmul(Quaternion(0, 0, 0, 1), c.C[0]) + qmul(Quaternion(0, xp, 0, -zp), C21) +
                         qmul(Quaternion(0, 0, yp, -zp), C22);
    for (const StringCrossing& sc : find_string_crossings(patch, tp))
      value -= sc.sign * (sc.at_target ? 0.5 : 1.0) * F.s;
  }
  return value;
}

}  // namespace qclose
