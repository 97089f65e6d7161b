#pragma once

#include <array>
#include <vector>

#include "qclose/surface.hpp"

namespace qclose {

// One graph surface z = sum a_D x^k y^l paired with one density mu = sum a_mu x^k y^l.
struct GraphPair {
  std::vector<TaylorTerm> a_D;
  std::vector<TaylorTerm> a_mu;
};

// Every pair with one unit a_D and one unit a_mu, 1 <= k + l <= m for both.
std::vector<GraphPair> unit_coefficient_pairs(int m);

struct FitStudyOptions {
  std::vector<int> ps{2, 3, 4, 5, 6, 7};
  std::vector<double> h{1.0 / 6, 1.0 / 10, 1.0 / 20, 1.0 / 30};  // triangle leg length
  std::array<double, 4> domain{-0.5, 0.5, -0.5, 0.5};
  int grid = 250;  // per axis
  int threads = 1;
};

struct FitStudyRow {
  double h = 0;
  int p = 0;
  double max_rel_error = 0;  // worst over pairs
  int worst_pair = -1;
  double rate = 0;  // against the previous h of the same p; NaN for the first
};

// Tiles the domain with right triangles of leg h, fits each pair's density triangle by triangle and
// reports max |mu_fit - mu| / max |mu| over the grid, maximized over pairs.
std::vector<FitStudyRow> fit_convergence_study(const std::vector<GraphPair>& pairs, const FitStudyOptions& opt = {});

}  // namespace qclose
