#include "qclose/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace qclose {

namespace {

QuadratureRule compute_gauss_legendre(int n) {
  QuadratureRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.x[i] = -x;
    rule.x[n - 1 - i] = x;
    rule.w[i] = w;
    rule.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.x[n / 2] = 0.0;
  return rule;
}

struct RuleCache {
  std::mutex mutex;
  std::map<int, std::unique_ptr<QuadratureRule>> sym, unit;
};

RuleCache& cache() {
  static RuleCache c;
  return c;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  auto& c = cache();
  std::lock_guard lock(c.mutex);
  auto& slot = c.sym[n];
  if (!slot) slot = std::make_unique<QuadratureRule>(compute_gauss_legendre(n));
  return *slot;
}

const QuadratureRule& gauss_legendre_unit(int n) {
  const QuadratureRule& base = gauss_legendre(n);
  auto& c = cache();
  std::lock_guard lock(c.mutex);
  auto& slot = c.unit[n];
  if (!slot) {
    auto r = std::make_unique<QuadratureRule>();
    for (int i = 0; i < n; ++i) {
      r->x.push_back(0.5 * (base.x[i] + 1.0));
      r->w.push_back(0.5 * base.w[i]);
    }
    slot = std::move(r);
  }
  return *slot;
}

Eigen::MatrixXd lagrange_matrix(const std::vector<double>& nodes, const std::vector<double>& targets) {
  const int n = static_cast<int>(nodes.size());
  Eigen::MatrixXd L(targets.size(), n);
  for (size_t i = 0; i < targets.size(); ++i)
    for (int j = 0; j < n; ++j) {
      double v = 1.0;
      for (int m = 0; m < n; ++m)
        if (m != j) v *= (targets[i] - nodes[m]) / (nodes[j] - nodes[m]);
      L(i, j) = v;
    }
  return L;
}

}  // namespace qclose
