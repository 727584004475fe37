#include "fwkb/sysfile.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fwkb/errors.hpp"

namespace fwkb {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ParseError("invalid numeric value '" + s + "'", line, 1);
  return v;
}

/// Keys of the constants block: E[n], Ep[n], eta[n], lambda[n].
AtomId parse_constant_key(const std::string& key, int line) {
  auto br = key.find('[');
  if (br == std::string::npos || key.back() != ']')
    throw ParseError("invalid constant name '" + key + "'", line, 1);
  const std::string head = key.substr(0, br);
  const std::string idx_s = key.substr(br + 1, key.size() - br - 2);
  int idx = 0;
  try {
    idx = std::stoi(idx_s);
  } catch (...) {
    throw ParseError("invalid constant index in '" + key + "'", line, 1);
  }
  if (idx < 1)
    throw ParseError("constant index must be positive in '" + key + "'", line,
                     1);
  if (head == "E") return atoms::E(idx);
  if (head == "Ep") return atoms::Ep(idx);
  if (head == "eta") return atoms::eta(idx);
  if (head == "lambda") return atoms::lambda(idx);
  throw ParseError("unknown constant '" + key + "'", line, 1);
}

}  // namespace

SystemFile load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open system file '" + path + "'", 0, 0);
  SystemFile sf;
  sf.path = path;

  enum class Section { Top, Constants, Run } section = Section::Top;
  std::string raw;
  int line_no = 0;
  bool saw_coords = false, saw_lagrangian = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line == "[constants]") {
      section = Section::Constants;
      continue;
    }
    if (line == "[run]") {
      section = Section::Run;
      continue;
    }
    if (section == Section::Top) {
      if (line.rfind("coords", 0) == 0) {
        if (saw_coords)
          throw ParseError("duplicate coords line", line_no, 1);
        std::istringstream ss(line.substr(6));
        std::string name;
        while (ss >> name) sf.coords.push_back(name);
        if (sf.coords.empty())
          throw ParseError("coords line declares no coordinates", line_no, 1);
        saw_coords = true;
        continue;
      }
      if (line.rfind("L", 0) == 0 &&
          (line.size() == 1 || line[1] == ' ' || line[1] == '\t')) {
        if (saw_lagrangian)
          throw ParseError("duplicate L line", line_no, 1);
        sf.lagrangian_src = trim(line.substr(1));
        if (sf.lagrangian_src.empty())
          throw ParseError("empty Lagrangian", line_no, 1);
        saw_lagrangian = true;
        continue;
      }
      throw ParseError("unexpected line '" + line + "'", line_no, 1);
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value' line", line_no, 1);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section == Section::Constants) {
      sf.constants[parse_constant_key(key, line_no)] =
          parse_double(value, line_no);
      continue;
    }
    if (key == "t0")
      sf.t0 = parse_double(value, line_no);
    else if (key == "t1")
      sf.t1 = parse_double(value, line_no);
    else if (key == "h")
      sf.h = parse_double(value, line_no);
    else if (key.rfind("mu ", 0) == 0)
      sf.mu_sources.emplace_back(trim(key.substr(3)), value);
    else
      throw ParseError("unknown run key '" + key + "'", line_no, 1);
  }
  if (!saw_coords) throw ParseError("missing coords line", line_no, 1);
  if (!saw_lagrangian) throw ParseError("missing L line", line_no, 1);
  return sf;
}

}  // namespace fwkb
