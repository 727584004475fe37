#pragma once

// Shared test helpers: deterministic random expression generators, the
// finite-difference oracle, and golden-string comparison utilities.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fwkb/eval.hpp"
#include "fwkb/expr.hpp"
#include "fwkb/parse.hpp"

namespace fwkb::testing {

inline double urand(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

inline long irand(std::mt19937_64& rng, long lo, long hi) {
  return lo + static_cast<long>(rng() % static_cast<unsigned long>(hi - lo + 1));
}

/// Uncanonicalized expression tree, built and evaluated independently of
/// the Expr factories. Serves as the value-preservation oracle for
/// canonical construction.
struct RawNode {
  enum Op { Const, Atom, Add, Mul, Pow, SinF, CosF, AsinF } op = Const;
  double cval = 0;
  long cnum = 0, cden = 1;
  AtomId atom{};
  long pnum = 1, pden = 1;  // Pow exponent
  std::vector<RawNode> kids;

  double eval(const Assignment& a) const {
    switch (op) {
      case Const:
        return cval;
      case Atom:
        return a.at(atom);
      case Add: {
        double s = 0;
        for (const auto& k : kids) s += k.eval(a);
        return s;
      }
      case Mul: {
        double s = 1;
        for (const auto& k : kids) s *= k.eval(a);
        return s;
      }
      case Pow:
        return std::pow(kids[0].eval(a),
                        static_cast<double>(pnum) / static_cast<double>(pden));
      case SinF:
        return std::sin(kids[0].eval(a));
      case CosF:
        return std::cos(kids[0].eval(a));
      case AsinF:
        return std::asin(kids[0].eval(a));
    }
    return 0;
  }

  Expr build() const {
    switch (op) {
      case Const:
        return constant(Rational(cnum, cden));
      case Atom:
        return fwkb::atom(atom);
      case Add: {
        std::vector<Expr> xs;
        for (const auto& k : kids) xs.push_back(k.build());
        return sum(std::move(xs));
      }
      case Mul: {
        std::vector<Expr> xs;
        for (const auto& k : kids) xs.push_back(k.build());
        return product(std::move(xs));
      }
      case Pow:
        return pow(kids[0].build(), Rational(pnum, pden));
      case SinF:
        return sin(kids[0].build());
      case CosF:
        return cos(kids[0].build());
      case AsinF:
        return asin(kids[0].build());
    }
    return Expr();
  }
};

/// Atoms used by the random generators: two coordinate chains (levels 0-1),
/// momenta, two integration constants and t.
inline std::vector<AtomId> default_pool() {
  return {atoms::chain(1, 0), atoms::chain(1, 1), atoms::chain(2, 0),
          atoms::chain(2, 1), atoms::p(1),        atoms::pi(1),
          atoms::E(1),        atoms::Ep(1),       atoms::t()};
}

inline RawNode random_raw(std::mt19937_64& rng, int depth,
                          const std::vector<AtomId>& pool) {
  RawNode n;
  const long pick = depth <= 0 ? irand(rng, 0, 1) : irand(rng, 0, 7);
  switch (pick) {
    case 0: {
      n.op = RawNode::Const;
      n.cnum = irand(rng, -6, 6);
      n.cden = irand(rng, 1, 4);
      n.cval = static_cast<double>(n.cnum) / static_cast<double>(n.cden);
      return n;
    }
    case 1: {
      n.op = RawNode::Atom;
      n.atom = pool[static_cast<std::size_t>(irand(
          rng, 0, static_cast<long>(pool.size()) - 1))];
      return n;
    }
    case 2:
    case 3: {
      n.op = RawNode::Add;
      const long arity = irand(rng, 2, 3);
      for (long k = 0; k < arity; ++k)
        n.kids.push_back(random_raw(rng, depth - 1, pool));
      return n;
    }
    case 4:
    case 5: {
      n.op = RawNode::Mul;
      const long arity = irand(rng, 2, 3);
      for (long k = 0; k < arity; ++k)
        n.kids.push_back(random_raw(rng, depth - 1, pool));
      return n;
    }
    case 6: {
      n.op = RawNode::Pow;
      static const std::pair<long, long> exps[] = {
          {2, 1}, {3, 1}, {-1, 1}, {-2, 1}, {1, 2}, {3, 2}, {-1, 2}};
      auto [pn, pd] = exps[static_cast<std::size_t>(irand(rng, 0, 6))];
      n.pnum = pn;
      n.pden = pd;
      n.kids.push_back(random_raw(rng, depth - 1, pool));
      return n;
    }
    default: {
      const long f = irand(rng, 0, 2);
      n.op = f == 0 ? RawNode::SinF : (f == 1 ? RawNode::CosF : RawNode::AsinF);
      n.kids.push_back(random_raw(rng, depth - 1, pool));
      return n;
    }
  }
}

/// Canonical random expression (built through the factories). Retries when
/// constant folding hits a domain error (an exact zero under a negative
/// power).
inline Expr random_expr(std::mt19937_64& rng, int depth,
                        const std::vector<AtomId>& pool) {
  for (;;) {
    try {
      return random_raw(rng, depth, pool).build();
    } catch (const EvalDomainError&) {
    }
  }
}

inline Assignment random_assignment(std::mt19937_64& rng,
                                    const std::vector<AtomId>& pool,
                                    double lo = -2.0, double hi = 2.0) {
  Assignment a;
  for (const AtomId& at : pool) a[at] = urand(rng, lo, hi);
  return a;
}

/// True when every fractional-power radicand and reciprocal stays at least
/// `margin` away from its domain boundary at `a` (and asin arguments away
/// from +-1), so finite differences are well-conditioned there.
inline bool away_from_boundaries(const Expr& e, const Assignment& a,
                                 const NameTable& names, double margin) {
  switch (e.kind()) {
    case Kind::Constant:
    case Kind::Atom:
      return true;
    case Kind::Power: {
      if (!away_from_boundaries(e.base(), a, names, margin)) return false;
      try {
        const double b = eval_numeric(e.base(), a, names);
        if (!is_integer(e.exponent()) && b < margin) return false;
        if (e.exponent() < 0 && std::abs(b) < margin) return false;
      } catch (const EvalError&) {
        return false;
      }
      return true;
    }
    case Kind::Asin: {
      if (!away_from_boundaries(e.arg(), a, names, margin)) return false;
      try {
        const double u = eval_numeric(e.arg(), a, names);
        if (std::abs(u) > 1.0 - margin) return false;
      } catch (const EvalError&) {
        return false;
      }
      return true;
    }
    default:
      for (const auto& k : e.kids())
        if (!away_from_boundaries(k, a, names, margin)) return false;
      return true;
  }
}

/// Central finite difference of e with respect to v at a.
inline double finite_difference(const Expr& e, const AtomId& v,
                                const Assignment& a, const NameTable& names,
                                double h = 1e-6) {
  Assignment hi = a, lo = a;
  hi[v] += h;
  lo[v] -= h;
  return (eval_numeric(e, hi, names) - eval_numeric(e, lo, names)) / (2 * h);
}

inline NameTable default_names() { return NameTable({"q1", "q2"}); }

}  // namespace fwkb::testing
