#include "fwkb/model.hpp"

#include <set>

#include "fwkb/errors.hpp"
#include "fwkb/parse.hpp"

namespace fwkb {

LagrangianSystem build_system(const std::vector<std::string>& coords,
                              const std::string& lagrangian_source) {
  if (coords.empty()) throw UnsupportedError("no coordinates declared");
  std::set<std::string> seen;
  for (const auto& c : coords)
    if (!seen.insert(c).second)
      throw UnsupportedError("duplicate coordinate name '" + c + "'");

  PhaseSpace ps{NameTable(coords)};
  Expr lagr = parse_expr(lagrangian_source, ps.names);

  for (const AtomId& a : atoms_of(lagr)) {
    if (atoms::is_momentum(a))
      throw UnsupportedError("momenta are forbidden in a Lagrangian: " +
                             atom_name(a, ps.names));
    if (a.role == Role::ChainVar) {
      if (a.level > 2)
        throw UnsupportedError("level-3 chain atom in a Lagrangian: " +
                               atom_name(a, ps.names));
      continue;
    }
    if (a.role == Role::Time) continue;
    throw UnsupportedError("forbidden atom in a Lagrangian: " +
                           atom_name(a, ps.names));
  }
  return {ps, lagr};
}

Expr shift_time_derivative(const Expr& e) {
  switch (e.kind()) {
    case Kind::Constant:
      return constant(0);
    case Kind::Atom: {
      const AtomId& a = e.atom_id();
      if (a.role == Role::Time) return constant(1);
      if (a.role == Role::ChainVar) {
        if (a.level >= 3)
          throw UnsupportedError(
              "time derivative would leave the chain (level-3 input)");
        return atom(atoms::chain(a.index, a.level + 1));
      }
      if (atoms::is_momentum(a))
        throw UnsupportedError(
            "shift_time_derivative is configuration-space only");
      return constant(0);  // integration and trajectory constants
    }
    case Kind::Sum: {
      std::vector<Expr> kids;
      kids.reserve(e.kids().size());
      for (const auto& k : e.kids()) kids.push_back(shift_time_derivative(k));
      return sum(std::move(kids));
    }
    case Kind::Product: {
      std::vector<Expr> terms;
      const auto& ks = e.kids();
      for (std::size_t j = 0; j < ks.size(); ++j) {
        Expr dj = shift_time_derivative(ks[j]);
        if (dj.is_zero()) continue;
        std::vector<Expr> fs;
        fs.reserve(ks.size());
        for (std::size_t m = 0; m < ks.size(); ++m)
          fs.push_back(m == j ? dj : ks[m]);
        terms.push_back(product(std::move(fs)));
      }
      return sum(std::move(terms));
    }
    case Kind::Power: {
      Expr db = shift_time_derivative(e.base());
      if (db.is_zero()) return constant(0);
      return product(
          {constant(e.exponent()), pow(e.base(), e.exponent() - 1), db});
    }
    case Kind::Sin: {
      Expr du = shift_time_derivative(e.arg());
      if (du.is_zero()) return constant(0);
      return product({cos(e.arg()), du});
    }
    case Kind::Cos: {
      Expr du = shift_time_derivative(e.arg());
      if (du.is_zero()) return constant(0);
      return product({constant(-1), sin(e.arg()), du});
    }
    case Kind::Asin: {
      Expr du = shift_time_derivative(e.arg());
      if (du.is_zero()) return constant(0);
      Expr one_minus_u2 = constant(1) - e.arg() * e.arg();
      return product({du, pow(one_minus_u2, Rational(-1, 2))});
    }
  }
  return constant(0);
}

}  // namespace fwkb
