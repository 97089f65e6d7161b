#include "qclose/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qclose {

PolynomialR3::PolynomialR3(std::vector<Monomial> terms) : terms_(std::move(terms)) { canonicalize(); }

PolynomialR3 PolynomialR3::constant(double c) { return PolynomialR3({Monomial{c, {0, 0, 0}}}); }

PolynomialR3 PolynomialR3::monomial(double c, int ex, int ey, int ez) {
  return PolynomialR3({Monomial{c, {ex, ey, ez}}});
}

void PolynomialR3::canonicalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Monomial& a, const Monomial& b) { return a.exps < b.exps; });
  std::vector<Monomial> merged;
  for (const auto& t : terms_) {
    if (!merged.empty() && merged.back().exps == t.exps)
      merged.back().coeff += t.coeff;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const Monomial& m) { return m.coeff == 0.0; });
  terms_ = std::move(merged);
}

int PolynomialR3::degree() const {
  int d = -1;
  for (const auto& t : terms_) d = std::max(d, t.exps[0] + t.exps[1] + t.exps[2]);
  return d;
}

bool PolynomialR3::is_homogeneous() const {
  const int d = degree();
  return std::all_of(terms_.begin(), terms_.end(),
                     [d](const Monomial& t) { return t.exps[0] + t.exps[1] + t.exps[2] == d; });
}

double PolynomialR3::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& t : terms_) m = std::max(m, std::abs(t.coeff));
  return m;
}

double PolynomialR3::eval(const Vec3& r) const {
  double s = 0.0;
  for (const auto& t : terms_)
    s += t.coeff * std::pow(r[0], t.exps[0]) * std::pow(r[1], t.exps[1]) * std::pow(r[2], t.exps[2]);
  return s;
}

PolynomialR3 PolynomialR3::derivative(int axis) const {
  std::vector<Monomial> out;
  for (const auto& t : terms_) {
    if (t.exps[axis] == 0) continue;
    Monomial m = t;
    m.coeff *= t.exps[axis];
    m.exps[axis] -= 1;
    out.push_back(m);
  }
  return PolynomialR3(std::move(out));
}

PolynomialR3 PolynomialR3::laplacian() const {
  PolynomialR3 s;
  for (int a = 0; a < 3; ++a) s += derivative(a).derivative(a);
  return s;
}

PolynomialR3 PolynomialR3::pow(int n) const {
  PolynomialR3 r = constant(1.0);
  for (int i = 0; i < n; ++i) r = r * *this;
  return r;
}

PolynomialR3& PolynomialR3::operator+=(const PolynomialR3& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  canonicalize();
  return *this;
}

PolynomialR3& PolynomialR3::operator-=(const PolynomialR3& o) {
  for (auto t : o.terms_) {
    t.coeff = -t.coeff;
    terms_.push_back(t);
  }
  canonicalize();
  return *this;
}

PolynomialR3& PolynomialR3::operator*=(double a) {
  for (auto& t : terms_) t.coeff *= a;
  canonicalize();
  return *this;
}

PolynomialR3 PolynomialR3::pruned(double tol) const {
  const double cut = tol * max_abs_coeff();
  std::vector<Monomial> out;
  for (const auto& t : terms_)
    if (std::abs(t.coeff) > cut) out.push_back(t);
  return PolynomialR3(std::move(out));
}

std::string PolynomialR3::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& t : terms_) {
    if (!first) os << " + ";
    first = false;
    os << t.coeff;
    const char* names = "xyz";
    for (int a = 0; a < 3; ++a)
      if (t.exps[a] > 0) os << "*" << names[a] << "^" << t.exps[a];
  }
  return os.str();
}

PolynomialR3 operator+(PolynomialR3 a, const PolynomialR3& b) { return a += b; }
PolynomialR3 operator-(PolynomialR3 a, const PolynomialR3& b) { return a -= b; }

PolynomialR3 operator*(const PolynomialR3& a, const PolynomialR3& b) {
  std::vector<Monomial> out;
  out.reserve(a.terms().size() * b.terms().size());
  for (const auto& s : a.terms())
    for (const auto& t : b.terms())
      out.push_back({s.coeff * t.coeff,
                     {s.exps[0] + t.exps[0], s.exps[1] + t.exps[1], s.exps[2] + t.exps[2]}});
  return PolynomialR3(std::move(out));
}

PolynomialR3 operator*(double c, PolynomialR3 a) { return a *= c; }

bool operator==(const PolynomialR3& a, const PolynomialR3& b) {
  if (a.terms().size() != b.terms().size()) return false;
  for (size_t i = 0; i < a.terms().size(); ++i)
    if (a.terms()[i].exps != b.terms()[i].exps || a.terms()[i].coeff != b.terms()[i].coeff) return false;
  return true;
}

PowerTable::PowerTable(const Vec3& r, int max_degree) {
  for (int a = 0; a < 3; ++a) {
    pw[a].resize(max_degree + 1);
    pw[a][0] = 1.0;
    for (int k = 1; k <= max_degree; ++k) pw[a][k] = pw[a][k - 1] * r[a];
  }
}

}  // namespace qclose
