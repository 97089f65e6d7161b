#include "qclose/evaluator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>
#include <thread>

#include "qclose/quadrature.hpp"

namespace qclose {

namespace {

constexpr double kInvFourPi = 0.25 / std::numbers::pi;
constexpr SplitKind kAllSplits[4] = {SplitKind::Diagonal, SplitKind::AntiDiagonal, SplitKind::FanLeft,
                                     SplitKind::FanRight};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double t = std::clamp((x - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (x - a - t * d).norm();
}

// Smallest distance from a point of the unit square to the internal edges of a split.
double internal_edge_distance(const Vec2& x, SplitKind kind) {
  const Vec2 A(0, 0), B(1, 0), C(1, 1), D(0, 1);
  switch (kind) {
    case SplitKind::Diagonal:
      return segment_distance(x, A, C);
    case SplitKind::AntiDiagonal:
      return segment_distance(x, B, D);
    case SplitKind::FanLeft:
    case SplitKind::FanRight: {
      const Vec2 X(kind == SplitKind::FanLeft ? 0.25 : 0.75, 0.5);
      double d = std::numeric_limits<double>::infinity();
      for (const Vec2& c : {A, B, C, D}) d = std::min(d, segment_distance(x, X, c));
      return d;
    }
  }
  return 0;
}

bool contour_resolved(const PatchIntegrals& pi, const ContourOptions& opt) {
  return pi.max_depth_reached < opt.max_depth;
}

}  // namespace

const char* to_string(Kernel k) {
  switch (k) {
    case Kernel::DLP:
      return "dlp";
    case Kernel::SLP:
      return "slp";
    case Kernel::GradDLP:
      return "grad_dlp";
  }
  return "?";
}

const char* to_string(EvalPath p) {
  switch (p) {
    case EvalPath::Direct:
      return "direct";
    case EvalPath::Close:
      return "close";
    case EvalPath::Escalated:
      return "escalated";
    case EvalPath::Failed:
      return "failed";
  }
  return "?";
}

void parallel_for(int n, int threads, const std::function<void(int)>& f) {
  const int t = std::max(1, std::min(threads, n));
  if (t == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(t);
  for (int w = 0; w < t; ++w) {
    const int lo = static_cast<int>(static_cast<long>(n) * w / t);
    const int hi = static_cast<int>(static_cast<long>(n) * (w + 1) / t);
    pool.emplace_back([&, w, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double max_relative_error(const std::vector<double>& u, const std::vector<double>& ref) {
  if (u.size() != ref.size()) throw std::invalid_argument("max_relative_error: size mismatch");
  double num = 0, den = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    if (std::isnan(u[i]) || std::isnan(ref[i])) return std::numeric_limits<double>::quiet_NaN();
    num = std::max(num, std::abs(u[i] - ref[i]));
    den = std::max(den, std::abs(ref[i]));
  }
  return den > 0 ? num / den : num;
}

Evaluator::Evaluator(const Surface& s, int n_u, int n_v, int p, EvalOptions opt)
    : surface_(s), disc_(build_panels(s, n_u, n_v, p)), p_(p), opt_(opt), basis_(p) {
  if (opt_.q == 0) opt_.q = 2 * p;
  if (opt_.q < p + 2) throw std::invalid_argument("Evaluator: q must be >= p + 2");
  const size_t n = disc_.node_count();
  X_.reserve(n);
  Nrm_.reserve(n);
  W_.reserve(n);
  params_.reserve(n);
  for (const Panel& P : disc_.panels) {
    X_.insert(X_.end(), P.nodes.begin(), P.nodes.end());
    Nrm_.insert(Nrm_.end(), P.normals.begin(), P.normals.end());
    W_.insert(W_.end(), P.weights.begin(), P.weights.end());
    params_.insert(params_.end(), P.params.begin(), P.params.end());
  }
  mu_.assign(n, 0.0);
}

void Evaluator::set_density(DensityFn f) {
  fn_ = std::move(f);
  for (const Panel& P : disc_.panels) {
    const ParametricSurface& ch = *surface_.charts[P.chart];
    const size_t base = static_cast<size_t>(P.id) * p_ * p_;
    for (size_t i = 0; i < P.params.size(); ++i) mu_[base + i] = fn_(geometry_at(ch, P.params[i][0], P.params[i][1]));
  }
}

void Evaluator::set_density(std::vector<double> node_values) {
  if (node_values.size() != X_.size()) throw std::invalid_argument("Evaluator::set_density: sample count");
  fn_ = nullptr;
  mu_ = std::move(node_values);
}

std::vector<TargetClass> Evaluator::classify(const std::vector<Vec3>& targets) const {
  std::vector<TargetClass> out(targets.size());
  const int pp = p_ * p_;
  parallel_for(static_cast<int>(targets.size()), opt_.threads, [&](int t) {
    const Vec3& x = targets[t];
    TargetClass& tc = out[t];
    tc.distance = std::numeric_limits<double>::infinity();
    for (const Panel& P : disc_.panels) {
      const double reach = opt_.alpha * P.h;
      const double dc = (x - P.center).norm() - P.radius;
      if (dc >= reach && dc >= tc.distance) continue;
      double dmin = std::numeric_limits<double>::infinity();
      const size_t base = static_cast<size_t>(P.id) * pp;
      for (int i = 0; i < pp; ++i) dmin = std::min(dmin, (x - X_[base + i]).squaredNorm());
      dmin = std::sqrt(dmin);
      if (dmin < tc.distance) {
        tc.distance = dmin;
        tc.nearest_panel = P.id;
      }
      if (dmin < reach) tc.near_panels.push_back(P.id);
    }
  });
  return out;
}

SplitKind Evaluator::choose_split(const Vec3& target, int panel) const {
  const Panel& P = disc_.panels.at(panel);
  const ParametricSurface& ch = *surface_.charts[P.chart];
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < P.nodes.size(); ++i) {
    const double d = (P.nodes[i] - target).squaredNorm();
    if (d < bd) {
      bd = d;
      best = static_cast<int>(i);
    }
  }
  const Vec2 uv = closest_parameter(ch, target, P.params[best]);
  Vec2 x((uv[0] - P.u0) / (P.u1 - P.u0), (uv[1] - P.v0) / (P.v1 - P.v0));
  // The foot point may sit a period away on a periodic chart.
  if (ch.periodic_u) {
    const double per = (ch.u_range[1] - ch.u_range[0]) / (P.u1 - P.u0);
    x[0] -= per * std::round((x[0] - 0.5) / per);
  }
  if (ch.periodic_v) {
    const double per = (ch.v_range[1] - ch.v_range[0]) / (P.v1 - P.v0);
    x[1] -= per * std::round((x[1] - 0.5) / per);
  }
  x = x.cwiseMax(0.0).cwiseMin(1.0);
  const double dd = internal_edge_distance(x, SplitKind::Diagonal);
  const double da = internal_edge_distance(x, SplitKind::AntiDiagonal);
  if (std::max(dd, da) >= opt_.split_margin) return dd >= da ? SplitKind::Diagonal : SplitKind::AntiDiagonal;
  SplitKind k = SplitKind::Diagonal;
  double kd = -1;
  for (SplitKind s : kAllSplits) {
    const double d = internal_edge_distance(x, s);
    if (d > kd) {
      kd = d;
      k = s;
    }
  }
  return k;
}

const SplitFit& Evaluator::split_fit(int panel, SplitKind kind) const {
  const auto key = std::make_pair(panel, static_cast<int>(kind));
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
  }
  const Panel& P = disc_.panels.at(panel);
  const ChartPtr& ch = surface_.charts[P.chart];
  auto sf = std::make_shared<SplitFit>();
  sf->kind = kind;
  const std::vector<double>& gl = gauss_legendre_unit(p_).x;
  for (const auto& tri : split_triangles(P.u0, P.u1, P.v0, P.v1, kind)) {
    TriangleFit tf;
    tf.patch = make_triangle(ch, tri[0], tri[1], tri[2], p_, opt_.q);
    tf.patch.panel = panel;
    tf.patch.split = static_cast<int>(kind);
    tf.patch.sub = static_cast<int>(sf->tris.size());
    tf.fit = std::make_shared<PatchFit>(tf.patch, basis_);
    const int n = static_cast<int>(tf.patch.node_params.size());
    tf.interp.resize(n, p_ * p_);
    for (int m = 0; m < n; ++m) {
      const Vec2& uv = tf.patch.node_params[m];
      const Eigen::MatrixXd Lu = lagrange_matrix(gl, {(uv[0] - P.u0) / (P.u1 - P.u0)});
      const Eigen::MatrixXd Lv = lagrange_matrix(gl, {(uv[1] - P.v0) / (P.v1 - P.v0)});
      for (int i = 0; i < p_; ++i)
        for (int j = 0; j < p_; ++j) tf.interp(m, i * p_ + j) = Lu(0, i) * Lv(0, j);
    }
    sf->tris.push_back(std::move(tf));
  }
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto [it, inserted] = cache_.emplace(key, std::move(sf));
  return *it->second;
}

std::vector<double> Evaluator::triangle_samples(const TriangleFit& tf, int panel) const {
  const int n = static_cast<int>(tf.patch.node_params.size());
  std::vector<double> mu(n);
  if (fn_) {
    const ParametricSurface& ch = *tf.patch.chart;
    for (int m = 0; m < n; ++m) mu[m] = fn_(geometry_at(ch, tf.patch.node_params[m][0], tf.patch.node_params[m][1]));
    return mu;
  }
  const Eigen::Map<const Eigen::VectorXd> mp(mu_.data() + static_cast<size_t>(panel) * p_ * p_, p_ * p_);
  Eigen::Map<Eigen::VectorXd>(mu.data(), n) = tf.interp * mp;
  return mu;
}

double Evaluator::direct_dlp(const Vec3& t, int panel) const {
  const size_t pp = static_cast<size_t>(p_) * p_;
  const size_t lo = panel < 0 ? 0 : panel * pp, hi = panel < 0 ? X_.size() : lo + pp;
  double s = 0;
  for (size_t i = lo; i < hi; ++i) {
    const Vec3 d = t - X_[i];
    const double r2 = d.squaredNorm();
    if (r2 == 0) continue;
    s += W_[i] * mu_[i] * d.dot(Nrm_[i]) / (r2 * std::sqrt(r2));
  }
  return s * kInvFourPi;
}

double Evaluator::direct_slp(const Vec3& t, int panel) const {
  const size_t pp = static_cast<size_t>(p_) * p_;
  const size_t lo = panel < 0 ? 0 : panel * pp, hi = panel < 0 ? X_.size() : lo + pp;
  double s = 0;
  for (size_t i = lo; i < hi; ++i) {
    const double r = (t - X_[i]).norm();
    if (r == 0) continue;
    s += W_[i] * mu_[i] / r;
  }
  return opt_.slp_four_pi ? s * kInvFourPi : s;
}

Vec3 Evaluator::direct_grad_dlp(const Vec3& t, int panel) const {
  const size_t pp = static_cast<size_t>(p_) * p_;
  const size_t lo = panel < 0 ? 0 : panel * pp, hi = panel < 0 ? X_.size() : lo + pp;
  Vec3 g = Vec3::Zero();
  for (size_t i = lo; i < hi; ++i) {
    const Vec3 d = t - X_[i];
    const double r2 = d.squaredNorm();
    if (r2 == 0) continue;
    const double ir3 = 1.0 / (r2 * std::sqrt(r2));
    g += W_[i] * mu_[i] * ir3 * (Nrm_[i] - (3.0 * d.dot(Nrm_[i]) / r2) * d);
  }
  return g * kInvFourPi;
}

EvalPath Evaluator::close_value(const Vec3& target, int panel, Kernel kernel, double& value, Vec3& grad,
                                long* points) const {
  ContourOptions co = opt_.contour;
  co.gradient = kernel == Kernel::GradDLP;
  const SplitKind first = choose_split(target, panel);
  std::vector<SplitKind> order{first};
  for (SplitKind s : kAllSplits)
    if (s != first) order.push_back(s);
  for (size_t attempt = 0; attempt < order.size(); ++attempt) {
    const SplitFit& sf = split_fit(panel, order[attempt]);
    double v = 0;
    Vec3 g = Vec3::Zero();
    long pts = 0;
    bool ok = true;
    try {
      for (const TriangleFit& tf : sf.tris) {
        const std::vector<double> mu = triangle_samples(tf, panel);
        const PatchIntegrals pi = patch_integrals(tf.patch, basis_, target, co);
        pts += pi.contour_points;
        if (!contour_resolved(pi, co)) {
          ok = false;
          break;
        }
        switch (kernel) {
          case Kernel::DLP:
            v += dlp_from_integrals(pi, tf.fit->fit(mu));
            break;
          case Kernel::GradDLP:
            g += grad_dlp_from_integrals(pi, tf.fit->fit(mu));
            break;
          case Kernel::SLP:
            v += slp_from_integrals(pi, fit_slp_density(*tf.fit, tf.patch, mu), opt_.slp_four_pi);
            break;
        }
      }
    } catch (const std::domain_error&) {
      ok = false;
    }
    if (points) *points += pts;
    if (ok) {
      value = v;
      grad = g;
      return attempt == 0 ? EvalPath::Close : EvalPath::Escalated;
    }
  }
  return EvalPath::Failed;
}

EvalPath Evaluator::close_dlp_weights(const Vec3& target, int panel, Eigen::VectorXd& w) const {
  const SplitKind first = choose_split(target, panel);
  std::vector<SplitKind> order{first};
  for (SplitKind s : kAllSplits)
    if (s != first) order.push_back(s);
  const int nb = basis_.size();
  for (size_t attempt = 0; attempt < order.size(); ++attempt) {
    const SplitFit& sf = split_fit(panel, order[attempt]);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(p_ * p_);
    bool ok = true;
    try {
      for (const TriangleFit& tf : sf.tris) {
        const PatchIntegrals pi = patch_integrals(tf.patch, basis_, target, opt_.contour);
        if (!contour_resolved(pi, opt_.contour)) {
          ok = false;
          break;
        }
        Eigen::VectorXd g(4 * nb);
        for (int j = 0; j < nb; ++j) {
          g[4 * j] = pi.I[j].s * kInvFourPi;
          for (int a = 0; a < 3; ++a) g[4 * j + 1 + a] = -pi.I[j].v[a] * kInvFourPi;
        }
        acc += tf.interp.transpose() * tf.fit->scalar_weights(g);
      }
    } catch (const std::domain_error&) {
      ok = false;
    }
    if (ok) {
      w = std::move(acc);
      return attempt == 0 ? EvalPath::Close : EvalPath::Escalated;
    }
  }
  return EvalPath::Failed;
}

EvalReport Evaluator::evaluate(const std::vector<Vec3>& targets, Kernel kernel) const {
  EvalReport rep;
  rep.kernel = kernel;
  const int nt = static_cast<int>(targets.size());
  if (kernel == Kernel::GradDLP)
    rep.gradient.assign(nt, Vec3::Zero());
  else
    rep.value.assign(nt, 0.0);
  rep.path.assign(nt, EvalPath::Direct);
  rep.error.assign(nt, {});
  rep.near_count.assign(nt, 0);

  auto t0 = std::chrono::steady_clock::now();
  const std::vector<TargetClass> cls = classify(targets);

  // Build the triangle fits for every (panel, split) that will be needed, in a fixed order.
  std::vector<std::vector<SplitKind>> splits(nt);
  std::set<std::pair<int, int>> needed;
  parallel_for(nt, opt_.threads, [&](int t) {
    for (int P : cls[t].near_panels) splits[t].push_back(choose_split(targets[t], P));
  });
  for (int t = 0; t < nt; ++t)
    for (size_t k = 0; k < cls[t].near_panels.size(); ++k)
      needed.emplace(cls[t].near_panels[k], static_cast<int>(splits[t][k]));
  const std::vector<std::pair<int, int>> keys(needed.begin(), needed.end());
  parallel_for(static_cast<int>(keys.size()), opt_.threads,
               [&](int i) { split_fit(keys[i].first, static_cast<SplitKind>(keys[i].second)); });
  rep.seconds_fit = seconds_since(t0);

  std::vector<double> t_close(nt, 0), t_direct(nt, 0);
  std::vector<long> pts(nt, 0);
  parallel_for(nt, opt_.threads, [&](int t) {
    const Vec3& x = targets[t];
    const std::vector<int>& near = cls[t].near_panels;
    rep.near_count[t] = static_cast<int>(near.size());
    auto tc = std::chrono::steady_clock::now();
    double v_close = 0;
    Vec3 g_close = Vec3::Zero();
    EvalPath path = near.empty() ? EvalPath::Direct : EvalPath::Close;
    for (int P : near) {
      double v = 0;
      Vec3 g = Vec3::Zero();
      const EvalPath pth = close_value(x, P, kernel, v, g, &pts[t]);
      if (pth == EvalPath::Failed) {
        path = EvalPath::Failed;
        rep.error[t] = "close evaluation failed on panel " + std::to_string(P);
        break;
      }
      if (pth == EvalPath::Escalated) path = EvalPath::Escalated;
      v_close += v;
      g_close += g;
    }
    t_close[t] = seconds_since(tc);
    rep.path[t] = path;
    if (path == EvalPath::Failed) {
      if (kernel == Kernel::GradDLP)
        rep.gradient[t] = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
      else
        rep.value[t] = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    auto td = std::chrono::steady_clock::now();
    size_t k = 0;
    double v_far = 0;
    Vec3 g_far = Vec3::Zero();
    for (int P = 0; P < static_cast<int>(disc_.panels.size()); ++P) {
      if (k < near.size() && near[k] == P) {
        ++k;
        continue;
      }
      switch (kernel) {
        case Kernel::DLP:
          v_far += direct_dlp(x, P);
          break;
        case Kernel::SLP:
          v_far += direct_slp(x, P);
          break;
        case Kernel::GradDLP:
          g_far += direct_grad_dlp(x, P);
          break;
      }
    }
    t_direct[t] = seconds_since(td);
    if (kernel == Kernel::GradDLP)
      rep.gradient[t] = g_close + g_far;
    else
      rep.value[t] = v_close + v_far;
  });
  for (int t = 0; t < nt; ++t) {
    rep.seconds_close += t_close[t];
    rep.seconds_direct += t_direct[t];
    rep.contour_points += pts[t];
  }
  return rep;
}

std::vector<ConvergenceRow> convergence_study(const Surface& s, const DensityFn& density, const std::vector<int>& ps,
                                              const std::vector<std::pair<int, int>>& grids,
                                              std::pair<int, int> reference_grid, int reference_p,
                                              const std::vector<Vec3>& targets, EvalOptions opt,
                                              std::vector<double>* reference_values) {
  std::vector<double> ref;
  {
    Evaluator ev(s, reference_grid.first, reference_grid.second, reference_p, opt);
    ev.set_density(density);
    ref = ev.evaluate(targets, Kernel::DLP).value;
  }
  if (reference_values) *reference_values = ref;
  std::vector<ConvergenceRow> rows;
  for (int p : ps) {
    long prev = -1;
    for (const auto& [nu, nv] : grids) {
      const auto t0 = std::chrono::steady_clock::now();
      Evaluator ev(s, nu, nv, p, opt);
      ev.set_density(density);
      const EvalReport rep = ev.evaluate(targets, Kernel::DLP);
      ConvergenceRow row;
      row.n_u = nu;
      row.n_v = nv;
      row.p = p;
      row.max_rel_error = max_relative_error(rep.value, ref);
      row.seconds = seconds_since(t0);
      row.rate = std::numeric_limits<double>::quiet_NaN();
      if (prev >= 0)
        row.rate = std::log(rows[prev].max_rel_error / row.max_rel_error) /
                   std::log(static_cast<double>(nu) / rows[prev].n_u);
      prev = static_cast<long>(rows.size());
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace qclose
