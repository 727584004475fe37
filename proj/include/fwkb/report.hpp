#pragma once

#include <string>
#include <utility>
#include <vector>

namespace fwkb {

/// Ordered key/value report with deterministic byte rendering. Values are
/// plain text; expressions are rendered in the shared grammar so that
/// reports can be parsed back and compared structurally.
class Report {
 public:
  void add(const std::string& key, const std::string& value) {
    lines_.emplace_back(key, value);
  }
  void add_double(const std::string& key, double v);
  void add_bool(const std::string& key, bool v) {
    add(key, v ? "true" : "false");
  }

  /// Value of the first line with this key; throws if absent.
  const std::string& get(const std::string& key) const;
  bool has(const std::string& key) const;

  std::string render() const;

  const std::vector<std::pair<std::string, std::string>>& lines() const {
    return lines_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

}  // namespace fwkb
