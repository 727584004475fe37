#include "fwkb/expr.hpp"

#include <algorithm>
#include <sstream>

#include "fwkb/errors.hpp"

namespace fwkb {

struct ExprNode {
  Kind kind = Kind::Constant;
  Rational value;  // Constant value, or Power exponent
  AtomId atom{};
  std::vector<Expr> kids;  // Power/func: single child; Sum/Product: n-ary
};

struct ExprBuilder {
  static Expr make(ExprNode&& n) {
    return Expr(std::make_shared<const ExprNode>(std::move(n)));
  }
};

namespace {

Expr make_node(ExprNode&& n) { return ExprBuilder::make(std::move(n)); }

const Expr& zero_expr() {
  static const Expr z = [] {
    ExprNode n;
    n.kind = Kind::Constant;
    n.value = 0;
    return make_node(std::move(n));
  }();
  return z;
}

const Expr& one_expr() {
  static const Expr o = [] {
    ExprNode n;
    n.kind = Kind::Constant;
    n.value = 1;
    return make_node(std::move(n));
  }();
  return o;
}

void check_exponent(const Rational& e) {
  const BigInt den = rat_den(e);
  if (den != 1 && den != 2 && den != 4)
    throw UnsupportedError("exponent " + rat_to_string(e) +
                           " not an integer, half-integer or quarter-integer");
}

}  // namespace

Expr::Expr() : node_(zero_expr().node_) {}

Kind Expr::kind() const { return node_->kind; }
const Rational& Expr::constant_value() const { return node_->value; }
const AtomId& Expr::atom_id() const { return node_->atom; }
const Rational& Expr::exponent() const { return node_->value; }
const Expr& Expr::base() const { return node_->kids[0]; }
const Expr& Expr::arg() const { return node_->kids[0]; }
const std::vector<Expr>& Expr::kids() const { return node_->kids; }

bool Expr::is_zero() const {
  return kind() == Kind::Constant && constant_value() == 0;
}
bool Expr::is_one() const {
  return kind() == Kind::Constant && constant_value() == 1;
}
bool Expr::is_atom(const AtomId& a) const {
  return kind() == Kind::Atom && atom_id() == a;
}

int compare(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return 0;
  const Kind ka = a.kind(), kb = b.kind();
  if (ka != kb) return ka < kb ? -1 : 1;
  switch (ka) {
    case Kind::Constant: {
      const Rational &x = a.constant_value(), &y = b.constant_value();
      if (x == y) return 0;
      return x < y ? -1 : 1;
    }
    case Kind::Atom: {
      const AtomId &x = a.atom_id(), &y = b.atom_id();
      if (x == y) return 0;
      return x < y ? -1 : 1;
    }
    case Kind::Power: {
      int c = compare(a.base(), b.base());
      if (c != 0) return c;
      const Rational &x = a.exponent(), &y = b.exponent();
      if (x == y) return 0;
      return x < y ? -1 : 1;
    }
    case Kind::Sin:
    case Kind::Cos:
    case Kind::Asin:
      return compare(a.arg(), b.arg());
    case Kind::Product:
    case Kind::Sum: {
      const auto &xs = a.kids(), &ys = b.kids();
      if (xs.size() != ys.size()) return xs.size() < ys.size() ? -1 : 1;
      for (std::size_t k = 0; k < xs.size(); ++k) {
        int c = compare(xs[k], ys[k]);
        if (c != 0) return c;
      }
      return 0;
    }
  }
  return 0;
}

Expr constant(const Rational& v) {
  if (v == 0) return zero_expr();
  if (v == 1) return one_expr();
  ExprNode n;
  n.kind = Kind::Constant;
  n.value = v;
  return make_node(std::move(n));
}

Expr constant(long v) { return constant(Rational(v)); }
Expr rational(long num, long den) { return constant(Rational(num, den)); }

Expr atom(const AtomId& a) {
  ExprNode n;
  n.kind = Kind::Atom;
  n.atom = a;
  return make_node(std::move(n));
}

namespace {

// Splits a canonical non-Sum term into (rational coefficient, key).
std::pair<Rational, Expr> split_coefficient(const Expr& x) {
  if (x.kind() == Kind::Product && x.kids().front().is_constant()) {
    const Rational c = x.kids().front().constant_value();
    std::vector<Expr> rest(x.kids().begin() + 1, x.kids().end());
    if (rest.size() == 1) return {c, rest[0]};
    ExprNode n;  // kids canonical, sorted, constant-free: rebuild directly
    n.kind = Kind::Product;
    n.kids = std::move(rest);
    return {c, make_node(std::move(n))};
  }
  return {Rational(1), x};
}

Expr attach_coefficient(const Rational& c, const Expr& key) {
  if (c == 1) return key;
  return product({constant(c), key});
}

}  // namespace

Expr sum(std::vector<Expr> terms) {
  std::vector<Expr> flat;
  flat.reserve(terms.size());
  for (auto& t : terms) {
    if (t.kind() == Kind::Sum)
      flat.insert(flat.end(), t.kids().begin(), t.kids().end());
    else
      flat.push_back(std::move(t));
  }
  Rational const_acc = 0;
  std::map<Expr, Rational, ExprLess> collected;
  for (const auto& t : flat) {
    if (t.is_constant()) {
      const_acc += t.constant_value();
      continue;
    }
    auto [c, key] = split_coefficient(t);
    collected[key] += c;
  }
  std::vector<Expr> kids;
  if (const_acc != 0) kids.push_back(constant(const_acc));
  for (const auto& [key, c] : collected)
    if (c != 0) kids.push_back(attach_coefficient(c, key));
  std::sort(kids.begin(), kids.end(),
            [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
  if (kids.empty()) return zero_expr();
  if (kids.size() == 1) return kids[0];
  ExprNode n;
  n.kind = Kind::Sum;
  n.kids = std::move(kids);
  return make_node(std::move(n));
}

Expr product(std::vector<Expr> factors) {
  std::vector<Expr> flat;
  flat.reserve(factors.size());
  for (auto& f : factors) {
    if (f.kind() == Kind::Product)
      flat.insert(flat.end(), f.kids().begin(), f.kids().end());
    else
      flat.push_back(std::move(f));
  }
  // Distribute over the first Sum child, if any.
  for (std::size_t k = 0; k < flat.size(); ++k) {
    if (flat[k].kind() != Kind::Sum) continue;
    std::vector<Expr> rest;
    rest.reserve(flat.size() - 1);
    for (std::size_t j = 0; j < flat.size(); ++j)
      if (j != k) rest.push_back(flat[j]);
    std::vector<Expr> expanded;
    expanded.reserve(flat[k].kids().size());
    for (const auto& term : flat[k].kids()) {
      std::vector<Expr> piece = rest;
      piece.push_back(term);
      expanded.push_back(product(std::move(piece)));
    }
    return sum(std::move(expanded));
  }
  Rational coeff = 1;
  std::map<Expr, Rational, ExprLess> powers;  // base -> accumulated exponent
  for (const auto& f : flat) {
    if (f.is_constant()) {
      coeff *= f.constant_value();
      if (coeff == 0) return zero_expr();
      continue;
    }
    if (f.kind() == Kind::Power)
      powers[f.base()] += f.exponent();
    else
      powers[f] += 1;
  }
  std::vector<Expr> kids;
  bool refold = false;
  for (const auto& [base, e] : powers) {
    if (e == 0) continue;
    Expr f = pow(base, e);
    if (f.is_constant()) {
      coeff *= f.constant_value();
      if (coeff == 0) return zero_expr();
      continue;
    }
    // Power folding may return a shape that merges further (i^3 -> -1*i,
    // (x^2)^(1/2) flattenings, ...). Re-run once when that happens.
    if (!(f.kind() == Kind::Power && f.base() == base &&
          f.exponent() == e) &&
        !(e == 1 && f == base))
      refold = true;
    kids.push_back(std::move(f));
  }
  if (refold) {
    kids.push_back(constant(coeff));
    return product(std::move(kids));
  }
  std::sort(kids.begin(), kids.end(),
            [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
  if (kids.empty()) return constant(coeff);
  if (coeff == 1 && kids.size() == 1) return kids[0];
  if (coeff != 1) kids.insert(kids.begin(), constant(coeff));
  if (kids.size() == 1) return kids[0];
  ExprNode n;
  n.kind = Kind::Product;
  n.kids = std::move(kids);
  return make_node(std::move(n));
}

Expr pow(const Expr& base, const Rational& exponent) {
  check_exponent(exponent);
  if (exponent == 0) return one_expr();
  if (exponent == 1) return base;
  const bool int_exp = is_integer(exponent);

  if (base.is_constant()) {
    const Rational& c = base.constant_value();
    if (c == 0) {
      if (exponent < 0)
        throw EvalDomainError("zero raised to a negative power");
      return zero_expr();
    }
    if (int_exp) return constant(pow_rational(c, to_long(exponent)));
    if (c > 0) {
      const int deg = rat_den(exponent) == 2 ? 2 : 4;
      if (auto root = exact_root(c, deg))
        return constant(pow_rational(*root, to_long(exponent * deg)));
    }
    // Irrational or negative-base radical: keep symbolic.
  }

  if (base.kind() == Kind::Atom && base.atom_id() == atoms::imag() &&
      int_exp) {
    long r = to_long(exponent) % 4;
    if (r < 0) r += 4;
    switch (r) {
      case 0:
        return one_expr();
      case 1:
        return base;
      case 2:
        return constant(-1);
      default:
        return product({constant(-1), atom(atoms::imag())});
    }
  }

  if (base.kind() == Kind::Power && int_exp)
    return pow(base.base(), base.exponent() * exponent);

  if (base.kind() == Kind::Product && int_exp) {
    std::vector<Expr> kids;
    kids.reserve(base.kids().size());
    for (const auto& f : base.kids()) kids.push_back(pow(f, exponent));
    return product(std::move(kids));
  }

  if (base.kind() == Kind::Sum && int_exp && exponent > 1) {
    Expr acc = base;
    for (long k = 1; k < to_long(exponent); ++k) acc = product({acc, base});
    return acc;
  }

  ExprNode n;
  n.kind = Kind::Power;
  n.value = exponent;
  n.kids = {base};
  return make_node(std::move(n));
}

Expr pow(const Expr& base, long num, long den) {
  return pow(base, Rational(num, den));
}

Expr sqrt(const Expr& e) { return pow(e, Rational(1, 2)); }

namespace {

Expr make_unary(Kind k, const Expr& e) {
  ExprNode n;
  n.kind = k;
  n.kids = {e};
  return make_node(std::move(n));
}

}  // namespace

Expr sin(const Expr& e) {
  if (e.is_zero()) return zero_expr();
  return make_unary(Kind::Sin, e);
}

Expr cos(const Expr& e) {
  if (e.is_zero()) return one_expr();
  return make_unary(Kind::Cos, e);
}

Expr asin(const Expr& e) {
  if (e.is_zero()) return zero_expr();
  return make_unary(Kind::Asin, e);
}

Expr differentiate(const Expr& e, const AtomId& v) {
  switch (e.kind()) {
    case Kind::Constant:
      return zero_expr();
    case Kind::Atom:
      return e.atom_id() == v ? one_expr() : zero_expr();
    case Kind::Sum: {
      std::vector<Expr> kids;
      kids.reserve(e.kids().size());
      for (const auto& k : e.kids()) kids.push_back(differentiate(k, v));
      return sum(std::move(kids));
    }
    case Kind::Product: {
      std::vector<Expr> terms;
      const auto& ks = e.kids();
      for (std::size_t j = 0; j < ks.size(); ++j) {
        Expr dj = differentiate(ks[j], v);
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
      Expr db = differentiate(e.base(), v);
      if (db.is_zero()) return zero_expr();
      return product({constant(e.exponent()),
                      pow(e.base(), e.exponent() - 1), db});
    }
    case Kind::Sin: {
      Expr du = differentiate(e.arg(), v);
      if (du.is_zero()) return zero_expr();
      return product({cos(e.arg()), du});
    }
    case Kind::Cos: {
      Expr du = differentiate(e.arg(), v);
      if (du.is_zero()) return zero_expr();
      return product({constant(-1), sin(e.arg()), du});
    }
    case Kind::Asin: {
      Expr du = differentiate(e.arg(), v);
      if (du.is_zero()) return zero_expr();
      Expr one_minus_u2 =
          sum({one_expr(), product({constant(-1), e.arg(), e.arg()})});
      return product({du, pow(one_minus_u2, Rational(-1, 2))});
    }
  }
  return zero_expr();
}

namespace {

Expr rebuild(const Expr& e, const std::map<AtomId, Expr>* bindings) {
  switch (e.kind()) {
    case Kind::Constant:
      return e;
    case Kind::Atom: {
      if (bindings) {
        auto it = bindings->find(e.atom_id());
        if (it != bindings->end()) return it->second;
      }
      return e;
    }
    case Kind::Sum:
    case Kind::Product: {
      std::vector<Expr> kids;
      kids.reserve(e.kids().size());
      for (const auto& k : e.kids()) kids.push_back(rebuild(k, bindings));
      return e.kind() == Kind::Sum ? sum(std::move(kids))
                                   : product(std::move(kids));
    }
    case Kind::Power:
      return pow(rebuild(e.base(), bindings), e.exponent());
    case Kind::Sin:
      return sin(rebuild(e.arg(), bindings));
    case Kind::Cos:
      return cos(rebuild(e.arg(), bindings));
    case Kind::Asin:
      return asin(rebuild(e.arg(), bindings));
  }
  return e;
}

}  // namespace

Expr substitute(const Expr& e, const std::map<AtomId, Expr>& bindings) {
  return rebuild(e, &bindings);
}

Expr simplify(const Expr& e) { return rebuild(e, nullptr); }

Expr replace_power_base(const Expr& e, const Expr& base, const Expr& half) {
  if (e == base) return pow(half, 2);
  switch (e.kind()) {
    case Kind::Constant:
    case Kind::Atom:
      return e;
    case Kind::Power: {
      if (e.base() == base) {
        Rational doubled = e.exponent() * 2;
        if (!is_integer(doubled))
          throw UnsupportedError(
              "replace_power_base: quarter power of the tracked radicand");
        return pow(half, doubled);
      }
      return pow(replace_power_base(e.base(), base, half), e.exponent());
    }
    case Kind::Sin:
      return sin(replace_power_base(e.arg(), base, half));
    case Kind::Cos:
      return cos(replace_power_base(e.arg(), base, half));
    case Kind::Asin:
      return asin(replace_power_base(e.arg(), base, half));
    case Kind::Sum:
    case Kind::Product: {
      std::vector<Expr> kids;
      kids.reserve(e.kids().size());
      for (const auto& k : e.kids())
        kids.push_back(replace_power_base(k, base, half));
      return e.kind() == Kind::Sum ? sum(std::move(kids))
                                   : product(std::move(kids));
    }
  }
  return e;
}

Expr replace_subexpr(const Expr& e, const Expr& target, const Expr& repl) {
  if (e == target) return repl;
  switch (e.kind()) {
    case Kind::Constant:
    case Kind::Atom:
      return e;
    case Kind::Power:
      return pow(replace_subexpr(e.base(), target, repl), e.exponent());
    case Kind::Sin:
      return sin(replace_subexpr(e.arg(), target, repl));
    case Kind::Cos:
      return cos(replace_subexpr(e.arg(), target, repl));
    case Kind::Asin:
      return asin(replace_subexpr(e.arg(), target, repl));
    case Kind::Sum:
    case Kind::Product: {
      std::vector<Expr> kids;
      kids.reserve(e.kids().size());
      for (const auto& k : e.kids())
        kids.push_back(replace_subexpr(k, target, repl));
      return e.kind() == Kind::Sum ? sum(std::move(kids))
                                   : product(std::move(kids));
    }
  }
  return e;
}

void for_each_atom(const Expr& e,
                   const std::function<void(const AtomId&)>& f) {
  switch (e.kind()) {
    case Kind::Constant:
      return;
    case Kind::Atom:
      f(e.atom_id());
      return;
    default:
      for (const auto& k : e.kids()) for_each_atom(k, f);
  }
}

std::set<AtomId> atoms_of(const Expr& e) {
  std::set<AtomId> out;
  for_each_atom(e, [&](const AtomId& a) { out.insert(a); });
  return out;
}

bool contains_atom(const Expr& e, const AtomId& a) {
  return contains_if(e, [&](const AtomId& x) { return x == a; });
}

bool contains_if(const Expr& e,
                 const std::function<bool(const AtomId&)>& pred) {
  switch (e.kind()) {
    case Kind::Constant:
      return false;
    case Kind::Atom:
      return pred(e.atom_id());
    default:
      for (const auto& k : e.kids())
        if (contains_if(k, pred)) return true;
      return false;
  }
}

// ---------------------------------------------------------------------------
// Printing

std::string atom_name(const AtomId& a, const NameTable& names) {
  auto coord = [&](int i) -> std::string {
    if (i >= 1 && i <= names.size()) return names.coord(i);
    return "q" + std::to_string(i);
  };
  switch (a.role) {
    case Role::ChainVar:
      return "D" + std::to_string(a.level) + "[" + coord(a.index) + "]";
    case Role::MomP:
      return "p[" + coord(a.index) + "]";
    case Role::MomPi:
      return "pi[" + coord(a.index) + "]";
    case Role::MomP0:
      return "p0";
    case Role::Time:
      return "t";
    case Role::EnergyE:
      return "E[" + std::to_string(a.index) + "]";
    case Role::EnergyEp:
      return "Ep[" + std::to_string(a.index) + "]";
    case Role::Eta:
      return "eta[" + std::to_string(a.index) + "]";
    case Role::Lambda:
      return "lambda[" + std::to_string(a.index) + "]";
    case Role::ConstA:
      return "A";
    case Role::Hbar:
      return "hbar";
    case Role::Imag:
      return "i";
  }
  return "?";
}

namespace {

struct Printer {
  const NameTable& names;
  const std::map<AtomId, std::string>* overrides = nullptr;

  std::string atom_str(const AtomId& a) const {
    if (overrides) {
      auto it = overrides->find(a);
      if (it != overrides->end()) return it->second;
    }
    return atom_name(a, names);
  }

  // Returns string plus a flag telling whether it needs parentheses when
  // used as a product factor / power base.
  std::string print(const Expr& e) const {
    switch (e.kind()) {
      case Kind::Constant:
        return rat_to_string(e.constant_value());
      case Kind::Atom:
        return atom_str(e.atom_id());
      case Kind::Sin:
        return "sin(" + print(e.arg()) + ")";
      case Kind::Cos:
        return "cos(" + print(e.arg()) + ")";
      case Kind::Asin:
        return "asin(" + print(e.arg()) + ")";
      case Kind::Power:
        return print_power(e);
      case Kind::Product:
        return print_product(e, /*lead_sign=*/true);
      case Kind::Sum:
        return print_sum(e);
    }
    return "?";
  }

  std::string parenthesize_factor(const Expr& e) const {
    // Factors inside a product: sums need parens; a leading constant is
    // handled by the caller; powers/atoms/functions bind tighter.
    if (e.kind() == Kind::Sum) return "(" + print(e) + ")";
    return print(e);
  }

  std::string print_power(const Expr& e) const {
    const Expr& b = e.base();
    const Rational& x = e.exponent();
    if (x == Rational(1, 2)) return "sqrt(" + print(b) + ")";
    std::string bs;
    const bool base_parens =
        b.kind() == Kind::Sum || b.kind() == Kind::Product ||
        b.kind() == Kind::Power ||
        (b.is_constant() &&
         (b.constant_value() < 0 || !is_integer(b.constant_value())));
    bs = base_parens ? "(" + print(b) + ")" : print(b);
    std::string es = rat_to_string(x);
    if (x < 0 || !is_integer(x)) es = "(" + es + ")";
    return bs + "^" + es;
  }

  // lead_sign: include a leading '-' for a negative coefficient (used when
  // the product stands alone; sums handle signs themselves).
  std::string print_product(const Expr& e, bool lead_sign) const {
    Rational c = 1;
    std::vector<const Expr*> fs;
    for (const auto& k : e.kids()) {
      if (k.is_constant())
        c = k.constant_value();
      else
        fs.push_back(&k);
    }
    std::string out;
    if (c < 0 && lead_sign) {
      out += "-";
      c = -c;
    }
    bool emitted = false;
    if (c != 1 || fs.empty()) {
      out += rat_to_string(c);
      emitted = true;
    }
    for (const Expr* f : fs) {
      if (emitted) out += "*";
      out += parenthesize_factor(*f);
      emitted = true;
    }
    return out;
  }

  std::string print_sum(const Expr& e) const {
    std::string out;
    bool first = true;
    for (const auto& term : e.kids()) {
      bool negative = false;
      std::string body;
      if (term.is_constant()) {
        Rational v = term.constant_value();
        negative = v < 0;
        body = rat_to_string(negative ? Rational(-v) : v);
      } else if (term.kind() == Kind::Product) {
        Rational c = 1;
        for (const auto& k : term.kids())
          if (k.is_constant()) c = k.constant_value();
        negative = c < 0;
        if (negative) {
          // Reprint with the sign stripped.
          std::string s = print_product(term, true);
          body = s.substr(1);
        } else {
          body = print_product(term, false);
        }
      } else {
        body = print(term);
      }
      if (first) {
        out += negative ? "-" + body : body;
        first = false;
      } else {
        out += negative ? " - " + body : " + " + body;
      }
    }
    return out;
  }
};

}  // namespace

std::string to_string(const Expr& e, const NameTable& names) {
  return Printer{names}.print(e);
}

std::string to_string_with_overrides(const Expr& e, const NameTable& names,
                                     const std::map<AtomId, std::string>& ov) {
  return Printer{names, &ov}.print(e);
}

}  // namespace fwkb
