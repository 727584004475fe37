#pragma once

#include <complex>
#include <map>

#include "fwkb/expr.hpp"

namespace fwkb {

using Assignment = std::map<AtomId, double>;

/// IEEE double evaluation. Throws EvalError on an unbound atom (or the
/// imaginary unit) and EvalDomainError when the assignment leaves the
/// classically allowed region (negative radicand, |asin argument| > 1,
/// division by zero).
double eval_numeric(const Expr& e, const Assignment& a,
                    const NameTable& names);

/// Complex evaluation: identical rules, with the imaginary unit bound to i.
std::complex<double> eval_complex(const Expr& e, const Assignment& a,
                                  const NameTable& names);

}  // namespace fwkb
