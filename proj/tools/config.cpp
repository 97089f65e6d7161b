#include "config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace qclose::cli {

namespace {

enum class Type { Int, Real, Bool, Text, Choice, IntList, RealList, GridList };

struct Entry {
  const char* section;
  const char* key;
  Type type;
  const char* fallback;
  const char* choices = "";  // space separated, Choice only
  int length = 0;            // fixed list length, 0 for any
};

// clang-format off
const Entry kSchema[] = {
    {"run", "seed", Type::Int, "20210521"},
    {"run", "threads", Type::Int, "1"},
    {"surface", "kind", Type::Choice, "cruller", "cruller sphere cushion"},
    {"surface", "a", Type::Real, "1"},
    {"surface", "b", Type::Real, "0.5"},
    {"surface", "w_c", Type::Real, "0.065"},
    {"surface", "w_m", Type::Int, "3"},
    {"surface", "w_n", Type::Int, "5"},
    {"surface", "radius", Type::Real, "1"},
    {"discretization", "p", Type::Int, "7"},
    {"discretization", "n_u", Type::Int, "12"},
    {"discretization", "n_v", Type::Int, "16"},
    {"discretization", "q", Type::Int, "0"},
    {"discretization", "alpha", Type::Real, "1.5"},
    {"kernel", "kind", Type::Choice, "dlp", "dlp slp grad_dlp"},
    {"kernel", "slp_four_pi", Type::Bool, "false"},
    {"density", "kind", Type::Choice, "mean_curvature", "constant mean_curvature point_source"},
    {"density", "value", Type::Real, "1"},
    {"density", "source", Type::RealList, "2.6, -1, 1.8", "", 3},
    {"targets", "kind", Type::Choice, "slice", "slice file"},
    {"targets", "axis", Type::Choice, "x", "x y z"},
    {"targets", "offset", Type::Real, "0"},
    {"targets", "range", Type::RealList, "0.25, 1.75, -0.75, 0.75", "", 4},
    {"targets", "resolution", Type::Int, "41"},
    {"targets", "region", Type::Choice, "exterior", "all exterior interior"},
    {"targets", "file", Type::Text, ""},
    {"reference", "kind", Type::Choice, "refined", "refined gauss"},
    {"reference", "n_u", Type::Int, "84"},
    {"reference", "n_v", Type::Int, "112"},
    {"reference", "p", Type::Int, "7"},
    {"fit", "m", Type::Int, "3"},
    {"fit", "p", Type::IntList, "2, 3, 4, 5, 6, 7"},
    {"fit", "h", Type::RealList, "1/6, 1/10, 1/20, 1/30"},
    {"fit", "grid", Type::Int, "250"},
    {"fit", "domain", Type::RealList, "-0.5, 0.5, -0.5, 0.5", "", 4},
    {"fit", "patch_file", Type::Text, ""},
    {"table1", "p", Type::IntList, "3, 4, 5, 6, 7"},
    {"table1", "grids", Type::GridList, "12x16, 24x32, 36x48"},
    {"bvp", "sources", Type::Int, "10"},
    {"bvp", "slice_phi", Type::Real, "0.39269908169872414"},
    {"bvp", "slice_points", Type::Int, "41"},
    {"bvp", "near_offsets", Type::RealList, "1e-2, 1e-3, 1e-4"},
    {"bvp", "near_stations", Type::Int, "32"},
    {"bvp", "gmres_tol", Type::Real, "1e-12"},
    {"bvp", "gmres_restart", Type::Int, "60"},
    {"bvp", "gmres_max_iterations", Type::Int, "300"},
    {"bvp", "dense_limit", Type::Int, "5000"},
};
// clang-format on

const Entry* find_entry(const std::string& section, const std::string& key) {
  for (const Entry& e : kSchema)
    if (section == e.section && key == e.key) return &e;
  return nullptr;
}

bool known_section(const std::string& s) {
  return std::any_of(std::begin(kSchema), std::end(kSchema), [&](const Entry& e) { return s == e.section; });
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) out.push_back(trim(item));
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

long parse_int(const std::string& s) {
  long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError("expected an integer, got '" + s + "'");
  return v;
}

// Decimal or a fraction "n/d".
double parse_real(const std::string& s) {
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    const double num = parse_real(trim(s.substr(0, slash)));
    const double den = parse_real(trim(s.substr(slash + 1)));
    if (den == 0) throw ConfigError("zero denominator in '" + s + "'");
    return num / den;
  }
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
    throw ConfigError("expected a finite number, got '" + s + "'");
  return v;
}

GridSize parse_grid(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw ConfigError("expected a grid size like 12x16, got '" + s + "'");
  const long a = parse_int(trim(s.substr(0, x))), b = parse_int(trim(s.substr(x + 1)));
  if (a <= 0 || b <= 0) throw ConfigError("grid sizes must be positive in '" + s + "'");
  return {static_cast<int>(a), static_cast<int>(b)};
}

Value parse_value(const Entry& e, const std::string& raw) {
  const std::string s = trim(raw);
  Value v;
  switch (e.type) {
    case Type::Int:
      v = parse_int(s);
      break;
    case Type::Real:
      v = parse_real(s);
      break;
    case Type::Bool:
      if (s == "true")
        v = true;
      else if (s == "false")
        v = false;
      else
        throw ConfigError("expected true or false, got '" + s + "'");
      break;
    case Type::Text:
      v = s;
      break;
    case Type::Choice: {
      std::istringstream is(e.choices);
      std::string c;
      bool ok = false;
      while (is >> c) ok = ok || c == s;
      if (!ok) throw ConfigError("expected one of {" + std::string(e.choices) + "}, got '" + s + "'");
      v = s;
      break;
    }
    case Type::IntList: {
      std::vector<long> l;
      for (const auto& item : split_list(s)) l.push_back(parse_int(item));
      v = l;
      break;
    }
    case Type::RealList: {
      std::vector<double> l;
      for (const auto& item : split_list(s)) l.push_back(parse_real(item));
      if (e.length && static_cast<int>(l.size()) != e.length)
        throw ConfigError("expected " + std::to_string(e.length) + " values, got " + std::to_string(l.size()));
      v = l;
      break;
    }
    case Type::GridList: {
      std::vector<GridSize> l;
      for (const auto& item : split_list(s)) l.push_back(parse_grid(item));
      v = l;
      break;
    }
  }
  return v;
}

std::string format_real(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string format_value(const Value& v) {
  struct Visitor {
    std::string operator()(long x) const { return std::to_string(x); }
    std::string operator()(double x) const { return format_real(x); }
    std::string operator()(bool x) const { return x ? "true" : "false"; }
    std::string operator()(const std::string& x) const { return x; }
    std::string operator()(const std::vector<long>& l) const {
      std::string s;
      for (size_t i = 0; i < l.size(); ++i) s += (i ? ", " : "") + std::to_string(l[i]);
      return s;
    }
    std::string operator()(const std::vector<double>& l) const {
      std::string s;
      for (size_t i = 0; i < l.size(); ++i) s += (i ? ", " : "") + format_real(l[i]);
      return s;
    }
    std::string operator()(const std::vector<GridSize>& l) const {
      std::string s;
      for (size_t i = 0; i < l.size(); ++i)
        s += (i ? ", " : "") + std::to_string(l[i].first) + "x" + std::to_string(l[i].second);
      return s;
    }
  };
  return std::visit(Visitor{}, v);
}

}  // namespace

RunConfig::RunConfig() {
  for (const Entry& e : kSchema) values_[{e.section, e.key}] = parse_value(e, e.fallback);
}

RunConfig RunConfig::parse(const std::string& text, const std::string& source) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  std::map<std::pair<std::string, std::string>, int> seen;
  int lineno = 0;
  auto fail = [&](const std::string& field, const std::string& msg) {
    std::string where = source + ":" + std::to_string(lineno);
    if (!field.empty()) where += ": " + field;
    throw ConfigError(where + ": " + msg);
  };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') fail("", "unterminated section header");
      section = trim(body.substr(1, body.size() - 2));
      if (!known_section(section)) fail("[" + section + "]", "unknown section");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail("", "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    if (section.empty()) fail(key, "key outside of any section");
    const std::string field = section + "." + key;
    const Entry* e = find_entry(section, key);
    if (!e) fail(field, "unknown key");
    if (auto it = seen.find({section, key}); it != seen.end())
      fail(field, "duplicate key, first set on line " + std::to_string(it->second));
    seen[{section, key}] = lineno;
    try {
      cfg.values_[{section, key}] = parse_value(*e, body.substr(eq + 1));
    } catch (const ConfigError& err) {
      fail(field, err.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::string RunConfig::canonical() const {
  std::string out, section;
  for (const Entry& e : kSchema) {
    if (section != e.section) {
      if (!section.empty()) out += "\n";
      section = e.section;
      out += "[" + section + "]\n";
    }
    out += std::string(e.key) + " = " + format_value(values_.at({e.section, e.key})) + "\n";
  }
  return out;
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  const Entry* e = find_entry(section, key);
  if (!e) throw ConfigError(section + "." + key + ": unknown key");
  try {
    values_[{section, key}] = parse_value(*e, value);
  } catch (const ConfigError& err) {
    throw ConfigError(section + "." + key + ": " + err.what());
  }
}

const Value& RunConfig::get(const std::string& section, const std::string& key) const {
  const auto it = values_.find({section, key});
  if (it == values_.end()) throw ConfigError(section + "." + key + ": unknown key");
  return it->second;
}

long RunConfig::integer(const std::string& s, const std::string& k) const { return std::get<long>(get(s, k)); }
double RunConfig::real(const std::string& s, const std::string& k) const { return std::get<double>(get(s, k)); }
bool RunConfig::flag(const std::string& s, const std::string& k) const { return std::get<bool>(get(s, k)); }
const std::string& RunConfig::text(const std::string& s, const std::string& k) const {
  return std::get<std::string>(get(s, k));
}
const std::vector<long>& RunConfig::integers(const std::string& s, const std::string& k) const {
  return std::get<std::vector<long>>(get(s, k));
}
const std::vector<double>& RunConfig::reals(const std::string& s, const std::string& k) const {
  return std::get<std::vector<double>>(get(s, k));
}
const std::vector<GridSize>& RunConfig::grids(const std::string& s, const std::string& k) const {
  return std::get<std::vector<GridSize>>(get(s, k));
}

}  // namespace qclose::cli
