#include "qclose/bvp.hpp"

#include <Eigen/LU>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <unsupported/Eigen/IterativeSolvers>

namespace qclose {
class DlpBieOperatorRef;
}

namespace Eigen::internal {
template <>
struct traits<qclose::DlpBieOperatorRef> : public traits<Eigen::SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace qclose {

// Matrix-free view of the operator for Eigen's Krylov solvers.
class DlpBieOperatorRef : public Eigen::EigenBase<DlpBieOperatorRef> {
 public:
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  explicit DlpBieOperatorRef(const DlpBieOperator& op) : op_(&op) {}
  Eigen::Index rows() const { return op_->size(); }
  Eigen::Index cols() const { return op_->size(); }

  template <typename Rhs>
  Eigen::Product<DlpBieOperatorRef, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<DlpBieOperatorRef, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  const DlpBieOperator& op() const { return *op_; }

 private:
  const DlpBieOperator* op_;
};

}  // namespace qclose

namespace Eigen::internal {
template <typename Rhs>
struct generic_product_impl<qclose::DlpBieOperatorRef, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<qclose::DlpBieOperatorRef, Rhs,
                                generic_product_impl<qclose::DlpBieOperatorRef, Rhs>> {
  using Scalar = typename Product<qclose::DlpBieOperatorRef, Rhs>::Scalar;
  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const qclose::DlpBieOperatorRef& lhs, const Rhs& rhs, const Scalar& alpha) {
    dst.noalias() += alpha * lhs.op().apply(rhs);
  }
};
}  // namespace Eigen::internal

namespace qclose {

namespace {

constexpr double kInvFourPi = 0.25 / std::numbers::pi;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double laplace_green(const Vec3& r) { return kInvFourPi / r.norm(); }

double source_field(const PointSources& s, const Vec3& x) {
  double u = 0;
  for (size_t j = 0; j < s.x.size(); ++j) u += s.strength[j] * laplace_green(x - s.x[j]);
  return u;
}

PointSources random_exterior_sources(const Discretization& d, int count, std::uint64_t seed, double r_min,
                                     double r_max) {
  Vec3 c = Vec3::Zero();
  double area = 0;
  for (const Panel& P : d.panels)
    for (size_t i = 0; i < P.nodes.size(); ++i) {
      c += P.weights[i] * P.nodes[i];
      area += P.weights[i];
    }
  c /= area;
  double R = 0;
  for (const Panel& P : d.panels) {
    for (const Vec3& x : P.nodes) R = std::max(R, (x - c).norm());
    for (const Vec3& x : P.corners) R = std::max(R, (x - c).norm());
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> radius(r_min * R, r_max * R), strength(-1.0, 1.0);
  PointSources s;
  for (int k = 0; k < count; ++k) {
    Vec3 dir;
    do {
      dir = Vec3(normal(rng), normal(rng), normal(rng));
    } while (dir.norm() < 1e-12);
    s.x.push_back(c + radius(rng) * dir.normalized());
    s.strength.push_back(strength(rng));
  }
  return s;
}

DlpBieOperator::DlpBieOperator(const Evaluator& ev) : ev_(ev), n_(ev.node_count()), pp_(ev.order() * ev.order()) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Vec3>& X = ev.nodes();
  const std::vector<Vec3>& N = ev.normals();
  const std::vector<double>& W = ev.weights();
  const std::vector<TargetClass> cls = ev.classify(X);
  near_.resize(n_);
  std::vector<int> esc(n_, 0), fail(n_, 0);
  parallel_for(static_cast<int>(n_), ev.options().threads, [&](int i) {
    for (int P : cls[i].near_panels) {
      NearBlock b{P, {}};
      const EvalPath path = ev.close_dlp_weights(X[i], P, b.w);
      if (path == EvalPath::Failed) {
        ++fail[i];
        continue;
      }
      if (path == EvalPath::Escalated) ++esc[i];
      const size_t base = static_cast<size_t>(P) * pp_;
      for (int m = 0; m < pp_; ++m) {
        const Vec3 d = X[i] - X[base + m];
        const double r2 = d.squaredNorm();
        if (r2 == 0) continue;
        b.w[m] -= kInvFourPi * W[base + m] * d.dot(N[base + m]) / (r2 * std::sqrt(r2));
      }
      near_[i].push_back(std::move(b));
    }
  });
  for (size_t i = 0; i < n_; ++i) {
    escalated_ += esc[i];
    failed_ += fail[i];
    near_blocks_ += static_cast<long>(near_[i].size());
  }
  if (failed_ > 0) throw std::runtime_error("DlpBieOperator: close evaluation failed for some near panels");
  seconds_setup_ = seconds_since(t0);
}

Eigen::VectorXd DlpBieOperator::apply(const Eigen::VectorXd& mu) const {
  if (mu.size() != size()) throw std::invalid_argument("DlpBieOperator::apply: size mismatch");
  const std::vector<Vec3>& X = ev_.nodes();
  const std::vector<Vec3>& N = ev_.normals();
  const std::vector<double>& W = ev_.weights();
  Eigen::VectorXd wm(size());
  for (Eigen::Index j = 0; j < size(); ++j) wm[j] = W[j] * mu[j] * kInvFourPi;
  Eigen::VectorXd y(size());
  parallel_for(static_cast<int>(n_), ev_.options().threads, [&](int i) {
    const Vec3 x = X[i];
    double s = 0;
    for (size_t j = 0; j < n_; ++j) {
      const Vec3 d = x - X[j];
      const double r2 = d.squaredNorm();
      if (r2 == 0) continue;
      s += wm[j] * d.dot(N[j]) / (r2 * std::sqrt(r2));
    }
    for (const NearBlock& b : near_[i]) s += b.w.dot(mu.segment(static_cast<Eigen::Index>(b.panel) * pp_, pp_));
    y[i] = s - 0.5 * mu[i];
  });
  return y;
}

Eigen::MatrixXd DlpBieOperator::assemble() const {
  const std::vector<Vec3>& X = ev_.nodes();
  const std::vector<Vec3>& N = ev_.normals();
  const std::vector<double>& W = ev_.weights();
  Eigen::MatrixXd A(size(), size());
  parallel_for(static_cast<int>(n_), ev_.options().threads, [&](int i) {
    for (size_t j = 0; j < n_; ++j) {
      const Vec3 d = X[i] - X[j];
      const double r2 = d.squaredNorm();
      A(i, j) = r2 == 0 ? 0.0 : kInvFourPi * W[j] * d.dot(N[j]) / (r2 * std::sqrt(r2));
    }
    A(i, i) -= 0.5;
    for (const NearBlock& b : near_[i])
      A.row(i).segment(static_cast<Eigen::Index>(b.panel) * pp_, pp_) += b.w.transpose();
  });
  return A;
}

BieSolution solve_dlp_bie(const DlpBieOperator& A, const Eigen::VectorXd& g, const BieOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  BieSolution s;
  if (A.size() <= opt.dense_limit) {
    s.dense = true;
    s.mu = A.assemble().partialPivLu().solve(g);
    s.converged = true;
  } else {
    DlpBieOperatorRef ref(A);
    Eigen::GMRES<DlpBieOperatorRef, Eigen::IdentityPreconditioner> gmres;
    gmres.setTolerance(opt.tol);
    gmres.setMaxIterations(opt.max_iterations);
    gmres.set_restart(opt.restart);
    gmres.compute(ref);
    s.mu = gmres.solve(g);
    s.iterations = static_cast<int>(gmres.iterations());
    s.converged = gmres.info() == Eigen::Success;
  }
  s.residual = (A.apply(s.mu) - g).norm() / g.norm();
  s.seconds = seconds_since(t0);
  return s;
}

BvpStudyResult run_bvp_study(const BvpStudyOptions& opt) {
  BvpStudyResult res;
  const double a = opt.a, b = opt.b;
  const Surface S = make_cruller_surface(a, b, opt.w_c, opt.w_m, opt.w_n);
  const auto t0 = std::chrono::steady_clock::now();
  Evaluator ev(S, opt.n_u, opt.n_v, opt.p, opt.eval);
  res.unknowns = ev.node_count();
  res.sources = random_exterior_sources(ev.discretization(), opt.n_sources, opt.seed);

  const DlpBieOperator A(ev);
  res.gauss_residual = (A.apply(Eigen::VectorXd::Ones(A.size())).array() + 1.0).abs().maxCoeff();
  Eigen::VectorXd g(A.size());
  for (Eigen::Index i = 0; i < A.size(); ++i) g[i] = source_field(res.sources, ev.nodes()[i]);
  res.solution = solve_dlp_bie(A, g, opt.bie);
  res.seconds_setup = seconds_since(t0);

  // Slice targets: a box grid in the (R, z) half-plane at phi, kept if inside the tube.
  const double phi = opt.slice_phi;
  auto tube_radius = [&](double th) { return b + opt.w_c * std::cos(opt.w_n * phi + opt.w_m * th); };
  const double half = b + std::abs(opt.w_c);
  const int m = opt.slice_points;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double R = a - half + 2 * half * i / (m - 1);
      const double z = -half + 2 * half * j / (m - 1);
      const double rho = std::hypot(R - a, z);
      if (rho >= tube_radius(std::atan2(z, R - a))) continue;
      res.targets.emplace_back(R * std::cos(phi), R * std::sin(phi), z);
      res.near_boundary.push_back(false);
    }
  const ParametricSurface& ch = *S.charts[0];
  for (int k = 0; k < opt.near_stations; ++k) {
    const double th = 2 * std::numbers::pi * (k + 0.5) / opt.near_stations;
    const GeometrySample gs = geometry_at(ch, th, phi);
    for (double d : opt.near_offsets) {
      res.targets.push_back(gs.point - d * gs.normal);
      res.near_boundary.push_back(true);
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  ev.set_density(std::vector<double>(res.solution.mu.data(), res.solution.mu.data() + res.solution.mu.size()));
  const EvalReport rep = ev.evaluate(res.targets, Kernel::DLP);
  res.seconds_eval = seconds_since(t1);
  res.u = rep.value;
  res.path = rep.path;
  double umax = 0;
  for (const Vec3& x : res.targets) {
    res.u_exact.push_back(source_field(res.sources, x));
    umax = std::max(umax, std::abs(res.u_exact.back()));
  }
  for (size_t i = 0; i < res.targets.size(); ++i) {
    const double e = std::abs(res.u[i] - res.u_exact[i]) / umax;
    const double e_or_nan = std::isnan(res.u[i]) ? std::numeric_limits<double>::infinity() : e;
    res.max_rel_error = std::max(res.max_rel_error, e_or_nan);
    double& part = res.near_boundary[i] ? res.max_rel_error_near : res.max_rel_error_bulk;
    part = std::max(part, e_or_nan);
  }
  return res;
}

}  // namespace qclose
