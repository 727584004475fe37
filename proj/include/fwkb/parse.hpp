#pragma once

#include <string>

#include "fwkb/expr.hpp"

namespace fwkb {

/// Parse a source string in the shared expression grammar.
///
/// Precedence: ^ (right-assoc) > unary - > * / > + - (left-assoc).
/// Atoms: D0[c] .. D3[c], p[c], pi[c] with c a declared coordinate name;
/// E[n], Ep[n], eta[n], lambda[n] with n a positive integer; t, p0, A,
/// hbar, i. Functions: sqrt, sin, cos, asin. Numeric literals are
/// nonnegative integers (rationals are formed with /). Exponents must
/// canonicalize to rational constants with denominator 1, 2 or 4.
Expr parse_expr(const std::string& source, const NameTable& names);

}  // namespace fwkb
