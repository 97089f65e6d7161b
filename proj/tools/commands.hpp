#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "qclose/evaluator.hpp"
#include "qclose/fit_study.hpp"

namespace qclose::cli {

// Graph-patch coefficient file:
//   m <max degree>
//   D <k> <l> <a_D[k,l]>      surface z = sum a_D x^k y^l
//   mu <k> <l> <a_mu[k,l]>    density mu = sum a_mu x^k y^l
// Blank lines and text after '#' are ignored. Every row needs 1 <= k + l <= m.
GraphPair parse_graph_patch(const std::string& text, const std::string& source = "patch");
GraphPair load_graph_patch(const std::string& path);

Surface build_surface(const RunConfig& cfg);
DensityFn build_density(const RunConfig& cfg);
EvalOptions build_eval_options(const RunConfig& cfg);
// Analytic inside test for the configured surface.
bool inside_surface(const RunConfig& cfg, const Vec3& x);
std::vector<Vec3> build_targets(const RunConfig& cfg);

// Scientific notation with 16 significant digits.
std::string format_number(double x);

void cmd_fit_convergence(const RunConfig& cfg, std::ostream& out);
void cmd_eval_grid(const RunConfig& cfg, std::ostream& out);
void cmd_table1(const RunConfig& cfg, std::ostream& out);
void cmd_bvp(const RunConfig& cfg, std::ostream& out);

}  // namespace qclose::cli
