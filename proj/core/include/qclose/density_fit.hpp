#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qclose/harmonic_basis.hpp"
#include "qclose/quaternion.hpp"
#include "qclose/surface.hpp"

namespace qclose {

// Similarity transform putting r^(1,1) at the origin and dividing lengths by h_D.
struct PatchFrame {
  Vec3 origin = Vec3::Zero();
  double scale = 1.0;  // 1 / h_D

  Vec3 to_local(const Vec3& r) const { return (r - origin) * scale; }
  Vec3 to_global(const Vec3& x) const { return origin + x / scale; }
};

PatchFrame translate_patch(const TriangularPatch& patch);

// 4x4 block A[f] with A[f] * c == qmul(f, c) as 4-vectors.
Eigen::Matrix4d quaternion_matrix_block(const Quaternion& f);

struct DensityCoefficients {
  int p = 0;
  Quaternion c11;               // data value at the origin node
  std::vector<Quaternion> C;    // index basis_index(k, l); C[0] = -k * c11
  PatchFrame frame;
  bool fallback_used = false;
  double residual = 0.0;        // relative residual of the collocation system
  double condition_estimate = 0.0;

  // sum_j f_j(x) C_j at a frame-local point x.
  Quaternion reconstruct_local(const BasisSet& basis, const Vec3& x) const;
  Quaternion reconstruct(const BasisSet& basis, const Vec3& r) const {
    return reconstruct_local(basis, frame.to_local(r));
  }
};

// Factorized collocation system of one triangle; reusable across densities.
class PatchFit {
 public:
  PatchFit(const TriangularPatch& patch, const BasisSet& basis);

  DensityCoefficients fit(const std::vector<Quaternion>& samples) const;
  DensityCoefficients fit(const std::vector<double>& mu) const;

  // Weights w over the interior nodes with sum_j <g_j, C_j> == w . mu for scalar data mu,
  // where g holds one 4-vector per basis function (g_0 pairs with C_0 = -k mu_0).
  Eigen::VectorXd scalar_weights(const Eigen::VectorXd& g) const;

  const PatchFrame& frame() const { return frame_; }
  int order() const { return p_; }
  int node_count() const { return n_; }
  bool fallback_used() const { return fallback_; }
  double condition_estimate() const { return cond_; }

 private:
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, double* residual) const;

  int p_, n_;
  PatchFrame frame_;
  Eigen::MatrixXd A_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::MatrixXd pinv_;  // only set when the LU residual check fails
  bool fallback_ = false;
  double cond_ = 0.0;
};

DensityCoefficients fit_density(const TriangularPatch& patch, const std::vector<double>& mu, const BasisSet& basis);

}  // namespace qclose
