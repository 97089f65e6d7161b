#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "qclose/density_fit.hpp"
#include "qclose/form_reduction.hpp"
#include "qclose/harmonic_basis.hpp"
#include "qclose/surface.hpp"

namespace qclose {

enum class Kernel : std::uint8_t { DLP = 0, SLP = 1, GradDLP = 2 };
enum class EvalPath : std::uint8_t { Direct = 0, Close = 1, Escalated = 2, Failed = 3 };

const char* to_string(Kernel k);
const char* to_string(EvalPath p);

struct EvalOptions {
  double alpha = 1.5;  // near threshold in units of the panel size
  int q = 0;           // contour nodes per edge; 0 selects 2p
  ContourOptions contour;
  bool slp_four_pi = false;
  int threads = 1;
  // Smallest distance, in panel-parameter units, from the target's foot point to an internal
  // triangle edge before the fan splits are considered.
  double split_margin = 0.1;
};

// Density as a function of the surface sample.
using DensityFn = std::function<double(const GeometrySample&)>;

struct TargetClass {
  std::vector<int> near_panels;  // ascending panel index
  int nearest_panel = -1;
  double distance = 0;  // to the nearest Nystrom node
};

struct EvalReport {
  Kernel kernel = Kernel::DLP;
  std::vector<double> value;  // DLP and SLP
  std::vector<Vec3> gradient;  // GradDLP
  std::vector<EvalPath> path;
  std::vector<std::string> error;  // empty unless path == Failed
  std::vector<int> near_count;
  double seconds_fit = 0, seconds_close = 0, seconds_direct = 0;
  long contour_points = 0;
};

// One triangle of a panel split, with its factorized collocation system and the
// interpolation matrix from the panel's tensor nodes to the triangle nodes.
struct TriangleFit {
  TriangularPatch patch;
  std::shared_ptr<PatchFit> fit;
  Eigen::MatrixXd interp;  // n_tri x p^2
};

struct SplitFit {
  SplitKind kind = SplitKind::Diagonal;
  std::vector<TriangleFit> tris;
};

class Evaluator {
 public:
  Evaluator(const Surface& s, int n_u, int n_v, int p, EvalOptions opt = {});

  const Discretization& discretization() const { return disc_; }
  const BasisSet& basis() const { return basis_; }
  const EvalOptions& options() const { return opt_; }
  int order() const { return p_; }
  size_t node_count() const { return X_.size(); }
  const std::vector<Vec3>& nodes() const { return X_; }
  const std::vector<Vec3>& normals() const { return Nrm_; }
  const std::vector<double>& weights() const { return W_; }

  void set_density(DensityFn f);
  void set_density(std::vector<double> node_values);
  const std::vector<double>& density() const { return mu_; }

  std::vector<TargetClass> classify(const std::vector<Vec3>& targets) const;

  EvalReport evaluate(const std::vector<Vec3>& targets, Kernel kernel) const;

  // Smooth-rule contribution of one panel (or all panels when panel < 0).
  double direct_dlp(const Vec3& target, int panel) const;
  double direct_slp(const Vec3& target, int panel) const;
  Vec3 direct_grad_dlp(const Vec3& target, int panel) const;

  // Split used for a target near a panel.
  SplitKind choose_split(const Vec3& target, int panel) const;
  const SplitFit& split_fit(int panel, SplitKind kind) const;

  // Close-evaluation DLP weights on the panel's tensor nodes for one target: value = w . mu_panel.
  // Tries the preferred split and then the others; returns the path taken.
  EvalPath close_dlp_weights(const Vec3& target, int panel, Eigen::VectorXd& w) const;

  // Close contribution of one panel for the current density.
  EvalPath close_value(const Vec3& target, int panel, Kernel kernel, double& value, Vec3& grad,
                       long* points = nullptr) const;

 private:
  std::vector<double> triangle_samples(const TriangleFit& tf, int panel) const;

  Surface surface_;
  Discretization disc_;
  int p_;
  EvalOptions opt_;
  BasisSet basis_;
  std::vector<Vec3> X_, Nrm_;
  std::vector<double> W_;
  std::vector<Vec2> params_;
  std::vector<double> mu_;
  DensityFn fn_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<int, int>, std::shared_ptr<const SplitFit>> cache_;
};

// Runs f(i) for i in [0, n) on up to `threads` worker threads with static contiguous blocks.
void parallel_for(int n, int threads, const std::function<void(int)>& f);

// Relative error of a computed field against a reference: max |u - u_ref| / max |u_ref|.
double max_relative_error(const std::vector<double>& u, const std::vector<double>& ref);

struct ConvergenceRow {
  int n_u = 0, n_v = 0, p = 0;
  double max_rel_error = 0;
  double rate = 0;  // observed order against the previous row of the same p; NaN for the first row
  double seconds = 0;
};

// Errors of the DLP of `density` on `targets` for each (p, grid) against a reference run.
std::vector<ConvergenceRow> convergence_study(const Surface& s, const DensityFn& density, const std::vector<int>& ps,
                                              const std::vector<std::pair<int, int>>& grids,
                                              std::pair<int, int> reference_grid, int reference_p,
                                              const std::vector<Vec3>& targets, EvalOptions opt = {},
                                              std::vector<double>* reference_values = nullptr);

}  // namespace qclose
