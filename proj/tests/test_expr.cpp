#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fwkb/errors.hpp"
#include "support.hpp"

using namespace fwkb;
using namespace fwkb::testing;

namespace {
const NameTable kQ({"q"});
const NameTable kQ3({"q1", "q2", "q3"});

Expr P(const std::string& s, const NameTable& n = kQ) {
  return parse_expr(s, n);
}
}  // namespace

TEST_CASE("parse: worked examples") {
  Expr l1 = P("1/2*(D2[q1]^2 - D1[q1]^2)", kQ3);
  CHECK(l1.kind() == Kind::Sum);
  CHECK(l1 == rational(1, 2) * pow(atom(atoms::chain(1, 2)), 2) -
                  rational(1, 2) * pow(atom(atoms::chain(1, 1)), 2));

  CHECK(P("0") == constant(0));
  CHECK(P("0").kind() == Kind::Constant);

  Expr l2 = P("D1[q3]*D2[q3] + D1[q3]*D0[q3] + D0[q2]*D1[q2]", kQ3);
  CHECK(l2.kind() == Kind::Sum);
  CHECK(l2.kids().size() == 3);
}

TEST_CASE("parse: errors carry position") {
  CHECK_THROWS_AS(P("1.5*D1[q]"), ParseError);
  CHECK_THROWS_AS(P("bogus"), ParseError);
  CHECK_THROWS_AS(P("D1[qq]"), ParseError);
  CHECK_THROWS_AS(P("D1[q] +"), ParseError);
  CHECK_THROWS_AS(P("D1[q]^D0[q]"), ParseError);
  CHECK_THROWS_AS(P("D1[q]^(1/3)"), ParseError);
  try {
    P("1/2*(D2[q]^2 -");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
    CHECK(e.column > 10);
  }
}

TEST_CASE("parse: precedence and associativity") {
  CHECK(P("2^3^2") == constant(512));          // ^ right-associative
  CHECK(P("-D1[q]^2") == -pow(atom(atoms::chain(1, 1)), 2));
  CHECK(P("6/4") == rational(3, 2));           // lowest terms
  CHECK(P("1 - 2 - 3") == constant(-4));       // left-associative
  CHECK(P("sqrt(D0[q])") == pow(atom(atoms::chain(1, 0)), 1, 2));
}

TEST_CASE("canonical form basics") {
  CHECK(P("D0[q] + 0") == P("D0[q]"));
  CHECK(P("2*3") == constant(6));
  CHECK(P("D0[q]*D0[q]") == pow(atom(atoms::chain(1, 0)), 2));
  CHECK(P("D0[q] - D0[q]") == constant(0));
  CHECK(P("(D0[q]+D1[q])^2") ==
        P("D0[q]^2 + 2*D0[q]*D1[q] + D1[q]^2"));
  CHECK(P("sqrt(4)") == constant(2));
  CHECK(P("sqrt(2)").kind() == Kind::Power);  // stays symbolic
  CHECK(P("i^2") == constant(-1));
  CHECK(P("i^3") == -atom(atoms::imag()));
  CHECK(P("1/2*i*2*i") == constant(-1));
}

TEST_CASE("radical rule") {
  const std::string r = "2*Ep[1]+E[1]^2-(D1[q]+E[1])^2";
  CHECK(P("(sqrt(" + r + "))^2") == P(r));
  // Only integer outer exponents collapse: (x^2)^(1/2) is not x.
  Expr nested = P("(D0[q]^2)^(1/2)");
  CHECK(nested.kind() == Kind::Power);
  CHECK(nested.base().kind() == Kind::Power);
  // Power merging with fractional exponents on a shared radicand base.
  Expr g = P(r);
  CHECK(pow(g, -1) * pow(g, 1, 2) == pow(g, Rational(-1, 2)));
}

TEST_CASE("differentiate: worked examples") {
  CHECK(differentiate(P("1/2*D2[q]^2"), atoms::chain(1, 2)) == P("D2[q]"));
  CHECK(differentiate(P("D1[q3]*D2[q3]", kQ3), atoms::chain(3, 2)) ==
        P("D1[q3]", kQ3));
  // d/dx sqrt(c - x^2) against a central finite difference.
  Expr e = P("sqrt(E[1] - D1[q]^2)");
  Expr d = differentiate(e, atoms::chain(1, 1));
  Assignment a{{atoms::E(1), 1.0}, {atoms::chain(1, 1), 0.3}};
  const double sym = eval_numeric(d, a, kQ);
  const double fd = finite_difference(e, atoms::chain(1, 1), a, kQ);
  CHECK(sym == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("differentiate: linearity after canonicalization") {
  std::mt19937_64 rng(7001);
  const auto pool = default_pool();
  const NameTable names = default_names();
  for (int k = 0; k < 100; ++k) {
    Expr e1 = random_expr(rng, 3, pool);
    Expr e2 = random_expr(rng, 3, pool);
    Rational ca(irand(rng, -5, 5)), cb(irand(rng, -5, 5));
    const AtomId v = pool[static_cast<std::size_t>(
        irand(rng, 0, static_cast<long>(pool.size()) - 1))];
    Expr lhs = differentiate(constant(ca) * e1 + constant(cb) * e2, v);
    Expr rhs = constant(ca) * differentiate(e1, v) +
               constant(cb) * differentiate(e2, v);
    CHECK(lhs == rhs);
  }
}

TEST_CASE("differentiate: 500-case finite-difference agreement") {
  std::mt19937_64 rng(7002);
  const auto pool = default_pool();
  const NameTable names = default_names();
  int done = 0;
  long attempts = 0;
  while (done < 500 && ++attempts < 50000) {
    Expr e = random_expr(rng, 3, pool);
    const AtomId v = pool[static_cast<std::size_t>(
        irand(rng, 0, static_cast<long>(pool.size()) - 1))];
    Assignment a = random_assignment(rng, pool);
    if (!away_from_boundaries(e, a, names, 1e-3)) continue;
    double sym, fd;
    try {
      sym = eval_numeric(differentiate(e, v), a, names);
      fd = finite_difference(e, v, a, names);
    } catch (const EvalError&) {
      continue;
    }
    if (!std::isfinite(sym) || !std::isfinite(fd)) continue;
    if (std::abs(sym) > 1e8) continue;  // ill-conditioned for an FD probe
    ++done;
    CHECK(std::abs(sym - fd) <= 1e-6 * std::max(1.0, std::abs(sym)));
  }
  CHECK(done == 500);
}

TEST_CASE("simplify: idempotence and value preservation on 10^4 raw trees") {
  std::mt19937_64 rng(7003);
  const auto pool = default_pool();
  const NameTable names = default_names();
  int done = 0;
  long attempts = 0;
  while (done < 10000 && ++attempts < 200000) {
    RawNode raw = random_raw(rng, 3, pool);
    Expr built;
    try {
      built = raw.build();
    } catch (const EvalDomainError&) {
      continue;  // e.g. constant-folded division by zero
    }
    CHECK(simplify(built) == built);  // canonical construction is a fixpoint
    Assignment a = random_assignment(rng, pool);
    double direct, canonical;
    try {
      direct = raw.eval(a);
      canonical = eval_numeric(built, a, names);
    } catch (const EvalError&) {
      continue;
    }
    if (!std::isfinite(direct) || !std::isfinite(canonical)) continue;
    if (std::abs(direct) > 1e9) continue;
    ++done;
    CHECK(std::abs(direct - canonical) <=
          1e-10 * std::max(1.0, std::abs(direct)));
  }
  CHECK(done == 10000);
}

TEST_CASE("substitute: worked examples") {
  Expr h = P("-1/2*(pi[q]^2 - D1[q]^2) + p[q]*D1[q] + pi[q]*D2[q]");
  Expr sub = substitute(h, {{atoms::chain(1, 2), atom(atoms::pi(1))}});
  CHECK(sub == P("p[q]*D1[q] + 1/2*pi[q]^2 + 1/2*D1[q]^2"));

  Expr e = P("sqrt(D0[q]) + t");
  CHECK(substitute(e, {}) == e);
}

TEST_CASE("substitute: chained equals simultaneous on disjoint bindings") {
  std::mt19937_64 rng(7004);
  const NameTable names = default_names();
  // Domain atoms disjoint from every atom of the replacement ranges.
  const std::vector<AtomId> domain{atoms::chain(1, 0), atoms::chain(1, 1)};
  const std::vector<AtomId> range_pool{atoms::chain(2, 0), atoms::chain(2, 1),
                                       atoms::E(1), atoms::t()};
  const auto pool = default_pool();
  for (int k = 0; k < 100; ++k) {
    Expr e = random_expr(rng, 3, pool);
    Expr r1 = random_expr(rng, 2, range_pool);
    Expr r2 = random_expr(rng, 2, range_pool);
    std::map<AtomId, Expr> both{{domain[0], r1}, {domain[1], r2}};
    Expr simultaneous = substitute(e, both);
    Expr chained = substitute(substitute(e, {{domain[0], r1}}),
                              {{domain[1], r2}});
    CHECK(simultaneous == chained);
  }
}

TEST_CASE("eval: worked examples") {
  Expr rhs = P("sqrt(2*Ep[1]+E[1]^2)*sin(eta[1]+t) - E[1]");
  Assignment a{{atoms::E(1), 1.0},
               {atoms::Ep(1), 1.0},
               {atoms::eta(1), 0.0},
               {atoms::t(), std::acos(-1.0) / 2}};
  CHECK(eval_numeric(rhs, a, kQ) ==
        doctest::Approx(0.7320508075688772).epsilon(1e-12));

  CHECK(eval_numeric(P("7/2"), {}, kQ) == 3.5);

  CHECK_THROWS_AS(eval_numeric(P("sqrt(0-1)"), {}, kQ), EvalDomainError);
  CHECK_THROWS_AS(eval_numeric(P("D0[q]"), {}, kQ), EvalError);
  CHECK_THROWS_AS(eval_numeric(P("asin(2)"), {}, kQ), EvalDomainError);
  CHECK_THROWS_AS(eval_numeric(P("i*D0[q]"),
                               {{atoms::chain(1, 0), 1.0}}, kQ),
                  EvalError);
}

TEST_CASE("print/parse round trip on random expressions") {
  std::mt19937_64 rng(7005);
  const auto pool = default_pool();
  const NameTable names = default_names();
  for (int k = 0; k < 500; ++k) {
    Expr e;
    try {
      e = random_expr(rng, 4, pool);
    } catch (const EvalDomainError&) {
      continue;
    }
    const std::string s = to_string(e, names);
    CAPTURE(s);
    CHECK(parse_expr(s, names) == e);
  }
  // Quarter powers print and parse too (amplitude forms).
  Expr amp = pow(P("2*Ep[1]-2*E[1]*D1[q]"), Rational(-1, 4));
  CHECK(parse_expr(to_string(amp, kQ), kQ) == amp);
}

TEST_CASE("atom ordering is the fixed (role, index, level) order") {
  Expr s = P("pi[q1]^2 + D0[q1] + E[1] + t + D1[q1]", kQ3);
  const auto& kids = s.kids();
  REQUIRE(kids.size() == 5);
  CHECK(kids[0] == atom(atoms::chain(1, 0)));
  CHECK(kids[1] == atom(atoms::chain(1, 1)));
  CHECK(kids[2] == atom(atoms::t()));
  CHECK(kids[3] == atom(atoms::E(1)));
  CHECK(kids[4] == pow(atom(atoms::pi(1)), 2));
}
