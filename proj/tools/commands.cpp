#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "qclose/bvp.hpp"

namespace qclose::cli {

namespace {

void header(std::ostream& out, const char* command, const char* columns) {
  out << "# qclose " << command << " csv v1\n" << columns << "\n";
}

std::string grid_name(int nu, int nv) { return std::to_string(nu) + "x" + std::to_string(nv); }

int positive(const RunConfig& cfg, const char* section, const char* key) {
  const long v = cfg.integer(section, key);
  if (v <= 0) throw ConfigError(std::string(section) + "." + key + ": must be positive");
  return static_cast<int>(v);
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15e", x);
  return buf;
}

GraphPair parse_graph_patch(const std::string& text, const std::string& source) {
  GraphPair pair;
  std::istringstream is(text);
  std::string line;
  int lineno = 0, m = -1;
  auto fail = [&](const std::string& msg) { throw ConfigError(source + ":" + std::to_string(lineno) + ": " + msg); };
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    std::string extra;
    if (tag == "m") {
      if (m >= 0) fail("m given twice");
      if (!(ls >> m) || m < 0 || (ls >> extra)) fail("m: expected one non-negative integer");
      continue;
    }
    if (tag != "D" && tag != "mu") fail("unknown row tag '" + tag + "'");
    if (m < 0) fail(tag + ": rows must follow the m line");
    TaylorTerm t;
    if (!(ls >> t.k >> t.l >> t.a) || (ls >> extra)) fail(tag + ": expected 'k l coefficient'");
    if (t.k < 0 || t.l < 0 || t.k + t.l < 1 || t.k + t.l > m)
      fail(tag + ": degree k + l = " + std::to_string(t.k + t.l) + " outside [1, " + std::to_string(m) + "]");
    (tag == "D" ? pair.a_D : pair.a_mu).push_back(t);
  }
  if (m < 0) throw ConfigError(source + ": missing m line");
  if (pair.a_mu.empty()) throw ConfigError(source + ": no function pairs");
  return pair;
}

GraphPair load_graph_patch(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open graph-patch file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_graph_patch(ss.str(), path);
}

Surface build_surface(const RunConfig& cfg) {
  const std::string& kind = cfg.text("surface", "kind");
  if (kind == "sphere") return make_sphere(cfg.real("surface", "radius"));
  if (kind == "cushion") return make_cushion();
  return make_cruller_surface(cfg.real("surface", "a"), cfg.real("surface", "b"), cfg.real("surface", "w_c"),
                              static_cast<int>(cfg.integer("surface", "w_m")),
                              static_cast<int>(cfg.integer("surface", "w_n")));
}

bool inside_surface(const RunConfig& cfg, const Vec3& x) {
  const std::string& kind = cfg.text("surface", "kind");
  if (kind == "sphere") return x.norm() < cfg.real("surface", "radius");
  if (kind == "cushion") {
    const double r = x.norm();
    if (r == 0) return true;
    const Vec3 d = x / r;
    return r < std::sqrt(0.8 + 8.0 * d.y() * d.y() * d.z() * d.z());
  }
  const double a = cfg.real("surface", "a"), b = cfg.real("surface", "b"), wc = cfg.real("surface", "w_c");
  const double phi = std::atan2(x.y(), x.x());
  const double s = std::hypot(x.x(), x.y()) - a;
  const double th = std::atan2(x.z(), s);
  return std::hypot(s, x.z()) <
         b + wc * std::cos(cfg.integer("surface", "w_n") * phi + cfg.integer("surface", "w_m") * th);
}

DensityFn build_density(const RunConfig& cfg) {
  const std::string& kind = cfg.text("density", "kind");
  if (kind == "constant") {
    const double c = cfg.real("density", "value");
    return [c](const GeometrySample&) { return c; };
  }
  if (kind == "point_source") {
    const auto& s = cfg.reals("density", "source");
    const Vec3 x0(s[0], s[1], s[2]);
    return [x0](const GeometrySample& g) { return 1.0 / (g.point - x0).norm(); };
  }
  return [](const GeometrySample& g) { return g.H; };
}

EvalOptions build_eval_options(const RunConfig& cfg) {
  EvalOptions opt;
  opt.alpha = cfg.real("discretization", "alpha");
  opt.q = static_cast<int>(cfg.integer("discretization", "q"));
  opt.slp_four_pi = cfg.flag("kernel", "slp_four_pi");
  opt.threads = positive(cfg, "run", "threads");
  return opt;
}

std::vector<Vec3> build_targets(const RunConfig& cfg) {
  std::vector<Vec3> out;
  if (cfg.text("targets", "kind") == "file") {
    const std::string& path = cfg.text("targets", "file");
    std::ifstream in(path);
    if (!in) throw ConfigError("targets.file: cannot open '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      for (char& c : line)
        if (c == ',') c = ' ';
      std::istringstream ls(line);
      Vec3 x;
      std::string extra;
      if (!(ls >> x[0])) continue;
      if (!(ls >> x[1] >> x[2]) || (ls >> extra))
        throw ConfigError(path + ":" + std::to_string(lineno) + ": expected three coordinates");
      out.push_back(x);
    }
    return out;
  }
  const std::string& axis = cfg.text("targets", "axis");
  const int a = axis == "x" ? 0 : axis == "y" ? 1 : 2;
  const int b = (a + 1) % 3 < (a + 2) % 3 ? (a + 1) % 3 : (a + 2) % 3;
  const int c = 3 - a - b;
  const auto& r = cfg.reals("targets", "range");
  const int n = positive(cfg, "targets", "resolution");
  const std::string& region = cfg.text("targets", "region");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec3 x;
      x[a] = cfg.real("targets", "offset");
      x[b] = n == 1 ? r[0] : r[0] + (r[1] - r[0]) * i / (n - 1);
      x[c] = n == 1 ? r[2] : r[2] + (r[3] - r[2]) * j / (n - 1);
      if (region == "all" || (region == "interior") == inside_surface(cfg, x)) out.push_back(x);
    }
  return out;
}

void cmd_fit_convergence(const RunConfig& cfg, std::ostream& out) {
  FitStudyOptions opt;
  opt.ps.clear();
  for (long p : cfg.integers("fit", "p")) {
    if (p < 1) throw ConfigError("fit.p: orders must be positive");
    opt.ps.push_back(static_cast<int>(p));
  }
  opt.h = cfg.reals("fit", "h");
  opt.grid = positive(cfg, "fit", "grid");
  const auto& d = cfg.reals("fit", "domain");
  opt.domain = {d[0], d[1], d[2], d[3]};
  opt.threads = positive(cfg, "run", "threads");
  const std::string& file = cfg.text("fit", "patch_file");
  std::vector<GraphPair> pairs;
  if (file.empty())
    pairs = unit_coefficient_pairs(static_cast<int>(cfg.integer("fit", "m")));
  else
    pairs.push_back(load_graph_patch(file));
  if (pairs.empty()) throw ConfigError("no function pairs");
  const auto rows = fit_convergence_study(pairs, opt);
  header(out, "fit-convergence", "h_D,p,max_rel_error,rate");
  for (const FitStudyRow& r : rows)
    out << format_number(r.h) << "," << r.p << "," << format_number(r.max_rel_error) << ","
        << (std::isnan(r.rate) ? "" : format_number(r.rate)) << "\n";
}

void cmd_eval_grid(const RunConfig& cfg, std::ostream& out) {
  const Surface S = build_surface(cfg);
  const EvalOptions opt = build_eval_options(cfg);
  const DensityFn mu = build_density(cfg);
  const std::string& kname = cfg.text("kernel", "kind");
  const Kernel kernel = kname == "slp" ? Kernel::SLP : kname == "grad_dlp" ? Kernel::GradDLP : Kernel::DLP;
  const std::vector<Vec3> x = build_targets(cfg);
  if (x.empty()) throw ConfigError("targets: the target set is empty");

  auto values = [&](const EvalReport& rep) {
    if (kernel != Kernel::GradDLP) return rep.value;
    std::vector<double> v;
    for (const Vec3& g : rep.gradient) v.push_back(g.norm());
    return v;
  };
  Evaluator ev(S, positive(cfg, "discretization", "n_u"), positive(cfg, "discretization", "n_v"),
               positive(cfg, "discretization", "p"), opt);
  ev.set_density(mu);
  const EvalReport rep = ev.evaluate(x, kernel);
  const std::vector<double> u = values(rep);

  std::vector<double> ref(x.size());
  std::vector<Vec3> gref;
  if (cfg.text("reference", "kind") == "gauss") {
    if (cfg.text("density", "kind") != "constant" || kernel != Kernel::DLP)
      throw ConfigError("reference.kind: gauss needs a constant density and the dlp kernel");
    const double c = cfg.real("density", "value");
    for (size_t i = 0; i < x.size(); ++i) ref[i] = inside_surface(cfg, x[i]) ? -c : 0.0;
  } else {
    Evaluator fine(S, positive(cfg, "reference", "n_u"), positive(cfg, "reference", "n_v"),
                   positive(cfg, "reference", "p"), opt);
    fine.set_density(mu);
    const EvalReport r = fine.evaluate(x, kernel);
    ref = values(r);
    gref = r.gradient;
  }
  double scale = 0;
  if (kernel == Kernel::GradDLP)
    for (const Vec3& g : gref) scale = std::max(scale, g.norm());
  else
    for (double v : ref) scale = std::max(scale, std::abs(v));
  if (scale == 0) scale = 1;

  header(out, "eval-grid", "x,y,z,value,reference,rel_error,path");
  for (size_t i = 0; i < x.size(); ++i) {
    const double err = kernel == Kernel::GradDLP ? (rep.gradient[i] - gref[i]).norm() : std::abs(u[i] - ref[i]);
    out << format_number(x[i].x()) << "," << format_number(x[i].y()) << "," << format_number(x[i].z()) << ","
        << format_number(u[i]) << "," << format_number(ref[i]) << "," << format_number(err / scale) << ","
        << to_string(rep.path[i]) << "\n";
  }
}

void cmd_table1(const RunConfig& cfg, std::ostream& out) {
  const Surface S = build_surface(cfg);
  const std::vector<Vec3> x = build_targets(cfg);
  if (x.empty()) throw ConfigError("targets: the target set is empty");
  std::vector<int> ps;
  for (long p : cfg.integers("table1", "p")) {
    if (p < 1) throw ConfigError("table1.p: orders must be positive");
    ps.push_back(static_cast<int>(p));
  }
  const auto& grids = cfg.grids("table1", "grids");
  if (ps.empty() || grids.empty()) throw ConfigError("table1: needs at least one order and one grid");
  const auto rows = convergence_study(
      S, build_density(cfg), ps, grids, {positive(cfg, "reference", "n_u"), positive(cfg, "reference", "n_v")},
      positive(cfg, "reference", "p"), x, build_eval_options(cfg));
  header(out, "table1", "grid,p,max_rel_error,rate");
  for (const ConvergenceRow& r : rows)
    out << grid_name(r.n_u, r.n_v) << "," << r.p << "," << format_number(r.max_rel_error) << ","
        << (std::isnan(r.rate) ? "" : format_number(r.rate)) << "\n";
}

void cmd_bvp(const RunConfig& cfg, std::ostream& out) {
  if (cfg.text("surface", "kind") != "cruller") throw ConfigError("surface.kind: bvp runs on the cruller");
  BvpStudyOptions opt;
  opt.a = cfg.real("surface", "a");
  opt.b = cfg.real("surface", "b");
  opt.w_c = cfg.real("surface", "w_c");
  opt.w_m = static_cast<int>(cfg.integer("surface", "w_m"));
  opt.w_n = static_cast<int>(cfg.integer("surface", "w_n"));
  opt.n_u = positive(cfg, "discretization", "n_u");
  opt.n_v = positive(cfg, "discretization", "n_v");
  opt.p = positive(cfg, "discretization", "p");
  opt.n_sources = positive(cfg, "bvp", "sources");
  opt.seed = static_cast<std::uint64_t>(cfg.integer("run", "seed"));
  opt.slice_phi = cfg.real("bvp", "slice_phi");
  opt.slice_points = positive(cfg, "bvp", "slice_points");
  opt.near_offsets = cfg.reals("bvp", "near_offsets");
  opt.near_stations = static_cast<int>(cfg.integer("bvp", "near_stations"));
  opt.eval = build_eval_options(cfg);
  opt.bie.tol = cfg.real("bvp", "gmres_tol");
  opt.bie.restart = positive(cfg, "bvp", "gmres_restart");
  opt.bie.max_iterations = positive(cfg, "bvp", "gmres_max_iterations");
  opt.bie.dense_limit = cfg.integer("bvp", "dense_limit");
  const BvpStudyResult r = run_bvp_study(opt);

  header(out, "bvp", "x,y,z,u,u_exact,rel_error,near_boundary,path");
  double scale = 0;
  for (double v : r.u_exact) scale = std::max(scale, std::abs(v));
  if (scale == 0) scale = 1;
  for (size_t i = 0; i < r.targets.size(); ++i) {
    const Vec3& x = r.targets[i];
    out << format_number(x.x()) << "," << format_number(x.y()) << "," << format_number(x.z()) << ","
        << format_number(r.u[i]) << "," << format_number(r.u_exact[i]) << ","
        << format_number(std::abs(r.u[i] - r.u_exact[i]) / scale) << "," << (r.near_boundary[i] ? 1 : 0) << ","
        << to_string(r.path[i]) << "\n";
  }
}

}  // namespace qclose::cli
