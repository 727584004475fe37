#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "fwkb/atom.hpp"
#include "fwkb/rational.hpp"

namespace fwkb {

/// Expression node kinds, in canonical-order rank.
enum class Kind : std::uint8_t {
  Constant,
  Atom,
  Power,
  Sin,
  Cos,
  Asin,
  Product,
  Sum,
};

class Expr;
struct ExprNode;

/// Immutable symbolic expression over exact rationals and atoms.
///
/// Every Expr is canonical by construction: sums and products are flat,
/// n-ary, sorted and collected; products distribute over sums; integer
/// powers of sums and products are expanded; power-of-power collapses for
/// integer outer exponents; constants fold exactly. Admitted exponents are
/// rationals with denominator 1, 2 or 4 (quarter powers arise only from
/// wave-function amplitudes).
class Expr {
 public:
  Expr();  // rational zero

  Kind kind() const;
  const Rational& constant_value() const;  // Constant
  const AtomId& atom_id() const;           // Atom
  const Rational& exponent() const;        // Power
  const Expr& base() const;                // Power
  const Expr& arg() const;                 // Sin/Cos/Asin
  const std::vector<Expr>& kids() const;   // Sum/Product

  bool is_constant() const { return kind() == Kind::Constant; }
  bool is_zero() const;
  bool is_one() const;
  bool is_atom(const AtomId& a) const;

  friend int compare(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const ExprNode> node)
      : node_(std::move(node)) {}
  std::shared_ptr<const ExprNode> node_;
  friend struct ExprBuilder;
};

int compare(const Expr& a, const Expr& b);
inline bool operator==(const Expr& a, const Expr& b) {
  return compare(a, b) == 0;
}
inline bool operator!=(const Expr& a, const Expr& b) {
  return compare(a, b) != 0;
}

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const {
    return compare(a, b) < 0;
  }
};

// Canonicalizing factories. All construction goes through these.
Expr constant(const Rational& v);
Expr constant(long n);
Expr rational(long num, long den);
Expr atom(const AtomId& a);
Expr sum(std::vector<Expr> terms);
Expr product(std::vector<Expr> factors);
Expr pow(const Expr& base, const Rational& exponent);
Expr pow(const Expr& base, long num, long den = 1);
Expr sqrt(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr asin(const Expr& e);

inline Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
inline Expr operator-(const Expr& a, const Expr& b) {
  return sum({a, product({constant(-1), b})});
}
inline Expr operator-(const Expr& a) { return product({constant(-1), a}); }
inline Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
inline Expr operator*(const Rational& c, const Expr& e) {
  return product({constant(c), e});
}

/// Partial derivative treating every other atom as independent.
Expr differentiate(const Expr& e, const AtomId& v);

/// Simultaneous substitution of atoms, followed by canonicalization.
Expr substitute(const Expr& e, const std::map<AtomId, Expr>& bindings);

/// Bottom-up re-canonicalization. Identity on canonical input.
Expr simplify(const Expr& e);

/// Replace every power of `base` with the matching power of `half`,
/// reading base^(j/2) as half^j (and base^n as half^(2n)). Used to carry
/// a chosen square-root branch through closed forms.
Expr replace_power_base(const Expr& e, const Expr& base, const Expr& half);

/// Replace every subexpression structurally equal to `target`.
Expr replace_subexpr(const Expr& e, const Expr& target, const Expr& repl);

void for_each_atom(const Expr& e, const std::function<void(const AtomId&)>& f);
std::set<AtomId> atoms_of(const Expr& e);
bool contains_atom(const Expr& e, const AtomId& a);
bool contains_if(const Expr& e, const std::function<bool(const AtomId&)>& pred);

/// Render in the shared grammar; parse(to_string(e)) == e.
std::string to_string(const Expr& e, const NameTable& names);

/// Rendering hook used for display forms (e.g. momenta as dS/d... in the
/// Hamilton-Jacobi equation listing). Atoms found in the map print as the
/// mapped string instead of their grammar name.
std::string to_string_with_overrides(const Expr& e, const NameTable& names,
                                     const std::map<AtomId, std::string>& ov);

}  // namespace fwkb
