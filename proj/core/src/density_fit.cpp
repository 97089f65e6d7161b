#include "qclose/density_fit.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qclose {

PatchFrame translate_patch(const TriangularPatch& patch) { return {patch.origin, 1.0 / patch.h}; }

Eigen::Matrix4d quaternion_matrix_block(const Quaternion& f) {
  const double f0 = f.s, f1 = f.v[0], f2 = f.v[1], f3 = f.v[2];
  Eigen::Matrix4d A;
  A << f0, -f1, -f2, -f3,  //
      f1, f0, -f3, f2,     //
      f2, f3, f0, -f1,     //
      f3, -f2, f1, f0;
  return A;
}

Quaternion DensityCoefficients::reconstruct_local(const BasisSet& basis, const Vec3& x) const {
  std::vector<Vec3> f(basis.size());
  basis.eval(x, f.data());
  Quaternion s;
  for (int j = 0; j < basis.size(); ++j) s += qmul(Quaternion::pure(f[j]), C[j]);
  return s;
}

PatchFit::PatchFit(const TriangularPatch& patch, const BasisSet& basis)
    : p_(basis.order()), n_(basis.size()), frame_(translate_patch(patch)) {
  if (static_cast<int>(patch.nodes.size()) != n_)
    throw std::invalid_argument("PatchFit: node count does not match the basis order");
  const int m = 4 * (n_ - 1);
  A_.resize(m, m);
  std::vector<Vec3> f(n_);
  for (int i = 1; i < n_; ++i) {
    basis.eval(frame_.to_local(patch.nodes[i]), f.data());
    for (int j = 1; j < n_; ++j)
      A_.block<4, 4>(4 * (i - 1), 4 * (j - 1)) = quaternion_matrix_block(Quaternion::pure(f[j]));
  }
  lu_.compute(A_);
  cond_ = 1.0 / lu_.rcond();
  // Probe solve: a failed residual check on a generic right-hand side switches to least squares.
  Eigen::VectorXd probe = Eigen::VectorXd::LinSpaced(m, 1.0, 2.0);
  double res = 0.0;
  const Eigen::VectorXd x = lu_.solve(probe);
  res = (A_ * x - probe).norm() / probe.norm();
  if (!(res <= 1e-10) || !std::isfinite(cond_)) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A_);
    cod.setThreshold(1e-14);
    pinv_ = cod.pseudoInverse();
    fallback_ = true;
    const double res_ls = (A_ * (pinv_ * probe) - probe).norm() / probe.norm();
    if (!(res_ls <= 1e-6)) {
      std::ostringstream os;
      os << "collocation system is rank deficient (condition estimate " << cond_ << ")";
      throw std::runtime_error(os.str());
    }
  }
}

Eigen::VectorXd PatchFit::solve(const Eigen::VectorXd& rhs, double* residual) const {
  Eigen::VectorXd x;
  if (fallback_) {
    x = pinv_ * rhs;
  } else {
    x = lu_.solve(rhs);
    x += lu_.solve(rhs - A_ * x);
  }
  if (residual) {
    const double nr = rhs.norm();
    *residual = nr > 0 ? (A_ * x - rhs).norm() / nr : 0.0;
  }
  return x;
}

DensityCoefficients PatchFit::fit(const std::vector<Quaternion>& samples) const {
  if (static_cast<int>(samples.size()) != n_) throw std::invalid_argument("PatchFit::fit: sample count");
  Eigen::VectorXd rhs(4 * (n_ - 1));
  for (int i = 1; i < n_; ++i)
    for (int a = 0; a < 4; ++a) rhs[4 * (i - 1) + a] = samples[i][a] - samples[0][a];
  DensityCoefficients dc;
  dc.p = p_;
  dc.frame = frame_;
  dc.c11 = samples[0];
  dc.fallback_used = fallback_;
  dc.condition_estimate = cond_;
  const Eigen::VectorXd x = solve(rhs, &dc.residual);
  dc.C.resize(n_);
  // f^(1,1) = k and k^{-1} = -k.
  dc.C[0] = qmul(Quaternion(0, 0, 0, -1), samples[0]);
  for (int j = 1; j < n_; ++j)
    dc.C[j] = Quaternion(x[4 * (j - 1)], x[4 * (j - 1) + 1], x[4 * (j - 1) + 2], x[4 * (j - 1) + 3]);
  return dc;
}

DensityCoefficients PatchFit::fit(const std::vector<double>& mu) const {
  std::vector<Quaternion> q(mu.size());
  for (size_t i = 0; i < mu.size(); ++i) q[i] = Quaternion::scalar(mu[i]);
  return fit(q);
}

Eigen::VectorXd PatchFit::scalar_weights(const Eigen::VectorXd& g) const {
  const int m = 4 * (n_ - 1);
  const Eigen::VectorXd gt = g.tail(m);
  Eigen::VectorXd y;
  if (fallback_) {
    y = pinv_.transpose() * gt;
  } else {
    // P A = L U, so A^T y = g is solved as y = P^T L^-T U^-T g.
    auto solve_t = [this](const Eigen::VectorXd& b) {
      Eigen::VectorXd z = lu_.matrixLU().triangularView<Eigen::Upper>().transpose().solve(b);
      lu_.matrixLU().triangularView<Eigen::UnitLower>().transpose().solveInPlace(z);
      return Eigen::VectorXd(lu_.permutationP().transpose() * z);
    };
    y = solve_t(gt);
    y += solve_t(gt - A_.transpose() * y);
  }
  Eigen::VectorXd w(n_);
  // C_0 = -k mu_0 contributes -g_0[3] mu_0.
  w[0] = -g[3];
  for (int i = 1; i < n_; ++i) {
    w[i] = y[4 * (i - 1)];
    w[0] -= y[4 * (i - 1)];
  }
  return w;
}

DensityCoefficients fit_density(const TriangularPatch& patch, const std::vector<double>& mu, const BasisSet& basis) {
  return PatchFit(patch, basis).fit(mu);
}

}  // namespace qclose
