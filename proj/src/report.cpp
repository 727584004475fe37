#include "fwkb/report.hpp"

#include <cstdio>

#include "fwkb/errors.hpp"

namespace fwkb {

void Report::add_double(const std::string& key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  add(key, buf);
}

const std::string& Report::get(const std::string& key) const {
  for (const auto& [k, v] : lines_)
    if (k == key) return v;
  throw Error("report has no line '" + key + "'");
}

bool Report::has(const std::string& key) const {
  for (const auto& [k, v] : lines_)
    if (k == key) return true;
  return false;
}

std::string Report::render() const {
  std::string out;
  for (const auto& [k, v] : lines_) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

}  // namespace fwkb
