#pragma once

#include <cstdint>
#include <vector>

#include "qclose/quaternion.hpp"

namespace qclose {

enum class MomentMethod : std::uint8_t { Recurrence = 0, Quadrature = 1 };

struct MomentOptions {
  // Relative degeneracy |r x r'|^2 / (|r|^2 |r'|^2) below which quadrature is used.
  double eps_deg = 1e-8;
  // Largest |r'| / |r| for which the forward recurrences are used.
  double max_ratio = 1.0;
  // Targets behind the origin (cos(r, r') < min_cos) use the recurrences only up to behind_ratio.
  double min_cos = -0.5;
  double behind_ratio = 0.5;
};

// L_k, M_k, N_k = int_0^1 t^k / |t r - r'|^{5,3,1} dt for k = 0..kmax.
struct MomentTable {
  Vec3 r, rp;
  int kmax = 0;
  std::vector<double> L, M, N;
  std::vector<MomentMethod> method;  // one flag per k, shared by the three families
  double ratio = 0.0;                // |r'| / |r|, the per-pair growth factor of the recurrences
};

// Throws std::domain_error when r' lies on the segment {t r : t in [0, 1]}.
MomentTable compute_moments(const Vec3& r, const Vec3& rp, int kmax, const MomentOptions& opt = {});

// Low-level form for hot loops. Writes M[0..kmax] and, if L != nullptr, L[0..kmax]; N is
// scratch of size kmax + 1 and holds N_k on return. Returns the method used.
MomentMethod moments_into(const Vec3& r, const Vec3& rp, int kmax, double* M, double* L, double* N,
                          const MomentOptions& opt = {});

// Closed-form base values plus forward recurrences, regardless of the stability policy.
void moments_by_recurrence(const Vec3& r, const Vec3& rp, int kmax, double* M, double* L, double* N);
// Graded composite Gauss-Legendre quadrature of the defining integrals.
void moments_by_quadrature(const Vec3& r, const Vec3& rp, int kmax, double* M, double* L, double* N);

// Independent adaptive Gauss-Kronrod evaluation of one moment; kernel_power in {1, 3, 5}.
double moment_oracle(const Vec3& r, const Vec3& rp, int k, int kernel_power, double tol = 1e-13);

}  // namespace qclose
