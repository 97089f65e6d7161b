#pragma once

#include <array>
#include <vector>

#include "qclose/density_fit.hpp"
#include "qclose/harmonic_basis.hpp"
#include "qclose/moments.hpp"
#include "qclose/polynomial.hpp"
#include "qclose/quaternion.hpp"
#include "qclose/surface.hpp"

namespace qclose {

// q_0..q_3 with d = r' - r:
//   q_0 = f x d,  q_i = -(d . f) e_i + d_i f + f_i d.
// The quaternion d n f equals -(q_0 . n, q_1 . n, q_2 . n, q_3 . n) for pure d, n, f.
std::array<Vec3, 4> q_vectors(const Vec3& f, const Vec3& r, const Vec3& rp);

// omega_i = sum_j (v[i][j](r) M_{k+1} + w[i][j](r) M_k) dx_j for one basis function of degree k.
struct VWSplit {
  int k = 1;
  std::array<std::array<PolynomialR3, 3>, 4> v;
  std::array<std::array<PolynomialR3, 3>, 4> w;  // r' substituted numerically
};
VWSplit vw_split(const BasisFunction& f, const Vec3& rp);

struct ContourOptions {
  double tol = 1e-13;  // relative tolerance of the adaptive edge rule
  int max_depth = 40;
  bool gradient = false;
  bool string_correction = true;
  // Targets within this scaled distance of the surface are treated as on-surface (principal value).
  double on_surface_tol = 1e-10;
  MomentOptions moments;
};

// Point where the ray from the patch origin through the target, beyond the target, meets the patch.
struct StringCrossing {
  Vec3 point;        // scaled frame
  Vec2 param;        // chart parameters
  double sign = 0;   // sign of (ray direction . normal)
  bool at_target = false;
};

// Integrals over the patch of the 2-forms q_i . n / |r' - r|^3 dS for every basis function,
// in the scaled frame. Computed as contour integrals plus the ray-crossing terms.
struct PatchIntegrals {
  std::vector<Quaternion> I;
  std::vector<std::array<Quaternion, 3>> dI;  // derivatives in the scaled target coordinates
  std::vector<StringCrossing> crossings;
  Vec3 target_local;
  double scale = 1.0;  // 1 / h
  int contour_points = 0;
  int max_depth_reached = 0;
};

PatchIntegrals patch_integrals(const TriangularPatch& patch, const BasisSet& basis, const Vec3& target,
                               const ContourOptions& opt = {});

// Raw contour integral of every omega_i (no crossing terms), scaled frame.
std::vector<Quaternion> contour_integrals(const TriangularPatch& patch, const BasisSet& basis, const Vec3& target,
                                          const ContourOptions& opt = {});

std::vector<StringCrossing> find_string_crossings(const TriangularPatch& patch, const Vec3& target_local,
                                                  double on_surface_tol = 1e-10);

// Contractions of the per-basis integrals with fitted coefficients.
double dlp_from_integrals(const PatchIntegrals& pi, const DensityCoefficients& c);
Vec3 grad_dlp_from_integrals(const PatchIntegrals& pi, const DensityCoefficients& c);

// Coefficients of the two target-independent fields conj(n) mu and conj(n) conj(r~) mu.
struct SlpCoefficients {
  DensityCoefficients a;
  DensityCoefficients b;
  double h = 1.0;
};
SlpCoefficients fit_slp_density(const PatchFit& fit, const TriangularPatch& patch, const std::vector<double>& mu);
double slp_from_integrals(const PatchIntegrals& pi, const SlpCoefficients& c, bool four_pi = false);

double contour_integrate_dlp(const TriangularPatch& patch, const BasisSet& basis, const DensityCoefficients& c,
                             const Vec3& target, const ContourOptions& opt = {});
double contour_integrate_slp(const TriangularPatch& patch, const BasisSet& basis, const SlpCoefficients& c,
                             const Vec3& target, bool four_pi = false, const ContourOptions& opt = {});
Vec3 contour_integrate_grad_dlp(const TriangularPatch& patch, const BasisSet& basis, const DensityCoefficients& c,
                                const Vec3& target, const ContourOptions& opt = {});

// Second-order DLP contribution from the explicit p = 2 one-forms, on the patch's fixed contour rule.
double appendix_c_oracle(const TriangularPatch& patch, const DensityCoefficients& c, const Vec3& target,
                         bool string_correction = true);

}  // namespace qclose
