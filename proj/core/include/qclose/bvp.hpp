#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qclose/evaluator.hpp"

namespace qclose {

struct PointSources {
  std::vector<Vec3> x;
  std::vector<double> strength;
};

// Point sources in uniformly random directions from the surface centroid, at radii drawn
// uniformly from [r_min, r_max] times the bounding radius; strengths uniform in [-1, 1].
PointSources random_exterior_sources(const Discretization& d, int count, std::uint64_t seed, double r_min = 1.5,
                                     double r_max = 3.0);

// G(r) = 1 / (4 pi |r|).
double laplace_green(const Vec3& r);
double source_field(const PointSources& s, const Vec3& x);

// Nystrom discretization of -1/2 mu + D[mu] on the evaluator's nodes, with the DLP principal
// value on each target's near panels replaced by close-evaluation weights.
class DlpBieOperator {
 public:
  explicit DlpBieOperator(const Evaluator& ev);

  Eigen::Index size() const { return static_cast<Eigen::Index>(n_); }
  Eigen::VectorXd apply(const Eigen::VectorXd& mu) const;
  Eigen::MatrixXd assemble() const;

  int escalated() const { return escalated_; }
  int failed() const { return failed_; }
  double seconds_setup() const { return seconds_setup_; }
  long near_blocks() const { return near_blocks_; }

 private:
  struct NearBlock {
    int panel;
    Eigen::VectorXd w;  // close weights minus the smooth-rule weights of the panel
  };
  const Evaluator& ev_;
  size_t n_;
  int pp_;
  std::vector<std::vector<NearBlock>> near_;
  int escalated_ = 0, failed_ = 0;
  long near_blocks_ = 0;
  double seconds_setup_ = 0;
};

struct BieOptions {
  double tol = 1e-12;
  int max_iterations = 300;
  int restart = 60;
  Eigen::Index dense_limit = 5000;  // dense LU at or below this many unknowns
};

struct BieSolution {
  Eigen::VectorXd mu;
  int iterations = 0;
  double residual = 0;  // relative, ||A mu - g|| / ||g||
  bool dense = false;
  bool converged = false;
  double seconds = 0;
};

BieSolution solve_dlp_bie(const DlpBieOperator& A, const Eigen::VectorXd& g, const BieOptions& opt = {});

struct BvpStudyOptions {
  double a = 1.0, b = 0.5;
  double w_c = 0.065;
  int w_m = 3, w_n = 5;
  int n_u = 12, n_v = 16, p = 7;
  int n_sources = 10;
  std::uint64_t seed = 20210521;
  double slice_phi = 0.39269908169872414;  // pi / 8
  int slice_points = 41;                   // per direction of the slice box
  std::vector<double> near_offsets{1e-2, 1e-3, 1e-4};
  int near_stations = 32;  // poloidal stations carrying the near-boundary targets
  EvalOptions eval;
  BieOptions bie;
};

struct BvpStudyResult {
  PointSources sources;
  BieSolution solution;
  std::vector<Vec3> targets;
  std::vector<bool> near_boundary;
  std::vector<double> u, u_exact;
  std::vector<EvalPath> path;
  double max_rel_error = 0;       // max |u - u_exact| / max |u_exact|
  double max_rel_error_near = 0;  // same numerator restricted to near-boundary targets
  double max_rel_error_bulk = 0;  // same numerator restricted to grid targets
  double gauss_residual = 0;      // max |(-1/2 I + D) 1 + 1| over the nodes
  double seconds_setup = 0, seconds_eval = 0;
  size_t unknowns = 0;
};

BvpStudyResult run_bvp_study(const BvpStudyOptions& opt);

}  // namespace qclose
