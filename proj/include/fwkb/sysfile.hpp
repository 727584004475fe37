#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fwkb/atom.hpp"

namespace fwkb {

/// Parsed system description file.
///
///   # comment
///   coords q1 q2 q3
///   L <expression>
///   [constants]
///   E[1] = 1
///   Ep[1] = 1
///   eta[1] = 0
///   lambda[1] = 0
///   [run]
///   t0 = 0
///   t1 = 10
///   h = 0.001
///   mu D0[q3] = 1/2 + sin(t)
///
/// Exactly one coords line and one L line. The constants block fixes
/// E/Ep/eta/lambda numerically (decimal literals allowed); the run block
/// sets the grid and the mu-sector parameter functions (expressions in t).
struct SystemFile {
  std::string path;
  std::vector<std::string> coords;
  std::string lagrangian_src;
  std::map<AtomId, double> constants;
  std::optional<double> t0, t1, h;
  std::vector<std::pair<std::string, std::string>> mu_sources;  // atom, expr
};

SystemFile load_system_file(const std::string& path);

}  // namespace fwkb
