#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qclose::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using GridSize = std::pair<int, int>;
using Value = std::variant<long, double, bool, std::string, std::vector<long>, std::vector<double>,
                           std::vector<GridSize>>;

// Sectioned key = value configuration checked against a fixed schema. Every key has a default,
// so the canonical text lists the complete resolved configuration.
class RunConfig {
 public:
  RunConfig();

  // Lines are "[section]", "key = value", blank, or comments starting with '#' or ';'.
  static RunConfig parse(const std::string& text, const std::string& source = "config");
  static RunConfig load(const std::string& path);

  std::string canonical() const;

  long integer(const std::string& section, const std::string& key) const;
  double real(const std::string& section, const std::string& key) const;
  bool flag(const std::string& section, const std::string& key) const;
  const std::string& text(const std::string& section, const std::string& key) const;
  const std::vector<long>& integers(const std::string& section, const std::string& key) const;
  const std::vector<double>& reals(const std::string& section, const std::string& key) const;
  const std::vector<GridSize>& grids(const std::string& section, const std::string& key) const;

  // Parses `value` as the schema type of section.key and stores it.
  void set(const std::string& section, const std::string& key, const std::string& value);

  bool operator==(const RunConfig& o) const { return values_ == o.values_; }

 private:
  const Value& get(const std::string& section, const std::string& key) const;
  std::map<std::pair<std::string, std::string>, Value> values_;
};

}  // namespace qclose::cli
