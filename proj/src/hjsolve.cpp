#include "fwkb/hjsolve.hpp"

#include <cmath>

#include "fwkb/errors.hpp"
#include "fwkb/eval.hpp"

namespace fwkb {

namespace {

Expr E_(int a) { return atom(atoms::E(a)); }
Expr Ep_(int a) { return atom(atoms::Ep(a)); }

/// Coefficients of a univariate polynomial in `x`, or nothing if `e` is not
/// polynomial in that atom (or touches other atoms).
std::optional<std::map<long, Rational>> polynomial_coeffs(const Expr& e,
                                                          const AtomId& x) {
  std::map<long, Rational> out;
  auto add_term = [&](const Expr& term) -> bool {
    Rational c = 1;
    long deg = 0;
    std::vector<Expr> factors;
    if (term.kind() == Kind::Product)
      factors = term.kids();
    else
      factors = {term};
    for (const auto& f : factors) {
      if (f.is_constant()) {
        c *= f.constant_value();
      } else if (f.kind() == Kind::Atom && f.atom_id() == x) {
        deg += 1;
      } else if (f.kind() == Kind::Power && f.base().is_atom(x) &&
                 is_integer(f.exponent()) && f.exponent() > 0) {
        deg += to_long(f.exponent());
      } else {
        return false;
      }
    }
    out[deg] += c;
    return true;
  };
  if (e.kind() == Kind::Sum) {
    for (const auto& t : e.kids())
      if (!add_term(t)) return std::nullopt;
  } else if (!e.is_zero() && !add_term(e)) {
    return std::nullopt;
  }
  return out;
}

struct SectorAccumulator {
  Rational kinetic;  // coefficient of pi_a^2
  Rational r, s;     // p_a D1[q_a] and D0[q_a] D1[q_a] couplings
  Rational v0, v1, v2;
};

}  // namespace

const SectorSolution& HJSolution::sector(int index) const {
  for (const auto& s : sectors)
    if (s.index == index) return s;
  throw Error("no solved sector for coordinate index " +
              std::to_string(index));
}

const TrajectorySector& Trajectory::sector(int index) const {
  for (const auto& s : sectors)
    if (s.index == index) return s;
  throw Error("no trajectory sector for coordinate index " +
              std::to_string(index));
}

std::vector<HjpdeForm> build_hjpdes(const CanonicalSystem& cs) {
  const NameTable& names = cs.sys.ps.names;
  std::map<AtomId, std::string> overrides;
  overrides[atoms::p0()] = "(dS/dt)";
  for (int i = 1; i <= cs.sys.ps.size(); ++i) {
    overrides[atoms::p(i)] = "(dS/dD0[" + names.coord(i) + "])";
    overrides[atoms::pi(i)] = "(dS/dD1[" + names.coord(i) + "])";
  }
  std::vector<HjpdeForm> out;
  out.push_back({"H'0", cs.hprime0,
                 to_string_with_overrides(cs.hprime0, names, overrides) +
                     " = 0"});
  for (int mu : cs.hessian.mu_indices) {
    Expr cp = cs.constraint_p(mu);
    out.push_back({"H'p[" + names.coord(mu) + "]", cp,
                   to_string_with_overrides(cp, names, overrides) + " = 0"});
  }
  for (int mu : cs.hessian.mu_indices) {
    Expr cpi = cs.constraint_pi(mu);
    out.push_back({"H'pi[" + names.coord(mu) + "]", cpi,
                   to_string_with_overrides(cpi, names, overrides) + " = 0"});
  }
  return out;
}

HJSolution solve_separable(const CanonicalSystem& cs) {
  const NameTable& names = cs.sys.ps.names;
  const auto offending = [&](const Expr& term) {
    return UnsupportedError(
        "non-separable under the additive ansatz; offending term: " +
        to_string(term, names));
  };

  if (contains_atom(cs.h0, atoms::t()))
    throw UnsupportedError("non-separable: time-dependent Hamiltonian");

  const auto& as = cs.hessian.a_indices;
  std::map<int, SectorAccumulator> acc;
  for (int a : as) acc[a];
  Rational floating_constant = 0;

  // Bucket H0 term by term into the supported sector decomposition
  //   H0 = sum_a [ (r p_a + s D0[q_a]) D1[q_a] + 1/2 pi_a^2 + V_a(D1[q_a]) ].
  std::vector<Expr> terms =
      cs.h0.kind() == Kind::Sum ? cs.h0.kids() : std::vector<Expr>{cs.h0};
  for (const Expr& term : terms) {
    if (term.is_zero()) continue;
    if (term.is_constant()) {
      floating_constant += term.constant_value();
      continue;
    }
    Rational c = 1;
    std::vector<Expr> factors;
    if (term.kind() == Kind::Product) {
      for (const auto& f : term.kids()) {
        if (f.is_constant())
          c = f.constant_value();
        else
          factors.push_back(f);
      }
    } else {
      factors = {term};
    }
    // Identify the sector by the unique coordinate index the term touches.
    int index = 0;
    bool uniform = true;
    for_each_atom(term, [&](const AtomId& at) {
      if (at.index == 0) return;
      if (index == 0)
        index = at.index;
      else if (index != at.index)
        uniform = false;
    });
    if (!uniform || index == 0 || !acc.count(index)) throw offending(term);
    SectorAccumulator& sec = acc[index];

    const AtomId q0 = atoms::chain(index, 0), q1 = atoms::chain(index, 1);
    const AtomId p = atoms::p(index), pi = atoms::pi(index);
    if (factors.size() == 1) {
      const Expr& f = factors[0];
      if (f.kind() == Kind::Power && f.base().is_atom(pi) &&
          f.exponent() == 2) {
        sec.kinetic += c;
        continue;
      }
      if (f.is_atom(q1)) {
        sec.v1 += c;
        continue;
      }
      if (f.kind() == Kind::Power && f.base().is_atom(q1) &&
          f.exponent() == 2) {
        sec.v2 += c;
        continue;
      }
      throw offending(term);
    }
    if (factors.size() == 2) {
      if (factors[0].is_atom(q0) && factors[1].is_atom(q1)) {
        sec.s += c;
        continue;
      }
      if (factors[0].is_atom(q1) && factors[1].is_atom(p)) {
        sec.r += c;
        continue;
      }
      if (factors[0].is_atom(q0) && factors[1].is_atom(p)) throw offending(term);
      throw offending(term);
    }
    throw offending(term);
  }

  HJSolution hj{cs, Expr(), {}, {}, Expr(), {}};

  // mu parts: direct integration of the constraint right-hand sides.
  for (int mu : cs.hessian.mu_indices) {
    MuSolution ms;
    ms.index = mu;
    const AtomId q0 = atoms::chain(mu, 0), q1 = atoms::chain(mu, 1);
    struct Part {
      const Expr rhs;
      const AtomId x;
      const char* what;
    };
    const Part parts[2] = {{-cs.h_p.at(mu), q0, "p"},
                           {-cs.h_pi.at(mu), q1, "pi"}};
    Expr integrated[2];
    for (int k = 0; k < 2; ++k) {
      for (const AtomId& at : atoms_of(parts[k].rhs))
        if (at != parts[k].x)
          throw UnsupportedError(
              "constraint H^" + std::string(parts[k].what) + "[" +
              names.coord(mu) +
              "] depends on more than its own coordinate; the additive "
              "ansatz does not separate it: " +
              to_string(parts[k].rhs, names));
      auto coeffs = polynomial_coeffs(parts[k].rhs, parts[k].x);
      if (!coeffs)
        throw UnsupportedError("constraint right-hand side is not polynomial: " +
                               to_string(parts[k].rhs, names));
      std::vector<Expr> terms_k;
      for (const auto& [deg, cc] : *coeffs)
        terms_k.push_back(constant(cc / Rational(deg + 1)) *
                          pow(atom(parts[k].x), deg + 1));
      integrated[k] = sum(std::move(terms_k));
    }
    ms.f = integrated[0];
    ms.fp = integrated[1];
    hj.mus.push_back(std::move(ms));
  }

  // a parts.
  bool constant_absorbed = (floating_constant == 0);
  for (int a : as) {
    const SectorAccumulator& sec = acc.at(a);
    if (sec.kinetic != Rational(1, 2))
      throw UnsupportedError(
          "sector " + names.coord(a) +
          ": kinetic term is not 1/2*pi^2 (coefficient " +
          rat_to_string(sec.kinetic) + ")");
    if (sec.r == 0)
      throw UnsupportedError("sector " + names.coord(a) +
                             ": no p*D1 coupling to carry the separation "
                             "constant");
    SectorSolution sol;
    sol.index = a;
    sol.r = sec.r;
    sol.s = sec.s;
    sol.v0 = sec.v0;
    sol.v1 = sec.v1;
    sol.v2 = sec.v2;
    if (!constant_absorbed) {
      sol.v0 += floating_constant;
      constant_absorbed = true;
    }

    const Expr x0 = atom(atoms::chain(a, 0));
    const Expr x = atom(atoms::chain(a, 1));
    const Rational inv_r = Rational(1) / sol.r;

    // W_a from r dW/dq0 + s q0 = E_a.
    sol.dw_dq = constant(inv_r) * E_(a) - constant(sol.s * inv_r) * x0;
    sol.w = constant(inv_r) * E_(a) * x0 -
            constant(sol.s * inv_r / 2) * x0 * x0;

    // Radicand rho = 2(E'_a - U) with U = (E_a + v1) x + v2 x^2 + v0.
    Expr lin = E_(a) + constant(sol.v1);
    sol.rho = constant(2) * Ep_(a) - constant(2 * sol.v0) -
              constant(2) * lin * x - constant(2 * sol.v2) * x * x;
    sol.dwp_dq = pow(sol.rho, 1, 2);

    if (sol.v2 == 0) {
      sol.family = RadicandFamily::Affine;
      sol.k = lin;
      sol.m = constant(sol.v0);
      sol.wp = product(
          {rational(-1, 3), pow(sol.k, -1), pow(sol.rho, 3, 2)});
      sol.dwp_dEp = product({constant(-1), pow(sol.k, -1), sol.dwp_dq});
      sol.dwp_dE =
          x * pow(sol.k, -1) * sol.dwp_dq +
          rational(1, 3) * (pow(sol.k, -2) * pow(sol.rho, 3, 2));
    } else if (sol.v2 > 0) {
      sol.family = RadicandFamily::Arcsine;
      sol.omega = pow(constant(2 * sol.v2), 1, 2);
      sol.bshift = product({constant(Rational(1) / (2 * sol.v2)), lin});
      sol.a2 = constant(2) * Ep_(a) - constant(2 * sol.v0) +
               constant(Rational(1) / (2 * sol.v2)) * lin * lin;
      Expr u = x + sol.bshift;
      if ((sol.a2 - pow(sol.omega, 2) * u * u) != sol.rho)
        throw Error("arcsine family internal inconsistency");
      Expr asin_arg = product({sol.omega, u, pow(sol.a2, -1, 2)});
      sol.wp = rational(1, 2) * (u * sol.dwp_dq) +
               rational(1, 2) * (sol.a2 * pow(sol.omega, -1) * asin(asin_arg));
      // dW'/dc = B_c rho^(1/2) + (A2_c / (2 w)) asin(w u / A).
      sol.dwp_dEp = pow(sol.omega, -1) * asin(asin_arg);
      sol.dwp_dE =
          constant(Rational(1) / (2 * sol.v2)) * sol.dwp_dq +
          constant(Rational(1) / (2 * sol.v2)) *
              (lin * pow(sol.omega, -1) * asin(asin_arg));
    } else {
      throw UnsupportedError(
          "sector " + names.coord(a) +
          ": potential with negative quadratic coefficient is outside the "
          "closed-form integral table");
    }
    hj.sectors.push_back(std::move(sol));
  }
  if (!constant_absorbed)
    throw UnsupportedError(
        "constant Hamiltonian offset with no dynamical sector to absorb it");

  // f(t) = - sum_a E'_a t.
  std::vector<Expr> ft;
  for (int a : as) ft.push_back(-(Ep_(a) * atom(atoms::t())));
  hj.f_t = sum(std::move(ft));

  std::vector<Expr> pieces{hj.f_t};
  for (const auto& s : hj.sectors) {
    pieces.push_back(s.w);
    pieces.push_back(s.wp);
  }
  for (const auto& m : hj.mus) {
    pieces.push_back(m.f);
    pieces.push_back(m.fp);
  }
  pieces.push_back(atom(atoms::A()));
  hj.action = sum(std::move(pieces));

  // Gradient table.
  hj.gradient[atoms::t()] = differentiate(hj.f_t, atoms::t());
  for (const auto& s : hj.sectors) {
    hj.gradient[atoms::chain(s.index, 0)] = s.dw_dq;
    hj.gradient[atoms::chain(s.index, 1)] = s.dwp_dq;
  }
  for (const auto& m : hj.mus) {
    hj.gradient[atoms::chain(m.index, 0)] = -cs.h_p.at(m.index);
    hj.gradient[atoms::chain(m.index, 1)] = -cs.h_pi.at(m.index);
  }

  // The Hamilton-Jacobi residual must vanish structurally.
  std::map<AtomId, Expr> grads;
  for (int a : as) {
    grads[atoms::p(a)] = hj.gradient.at(atoms::chain(a, 0));
    grads[atoms::pi(a)] = hj.gradient.at(atoms::chain(a, 1));
  }
  Expr residual = hj.gradient.at(atoms::t()) + substitute(cs.h0, grads);
  if (!residual.is_zero())
    throw Error("Hamilton-Jacobi residual failed to vanish: " +
                to_string(residual, names));
  for (int mu : cs.hessian.mu_indices) {
    if (!(hj.gradient.at(atoms::chain(mu, 0)) + cs.h_p.at(mu)).is_zero() ||
        !(hj.gradient.at(atoms::chain(mu, 1)) + cs.h_pi.at(mu)).is_zero())
      throw Error("constraint gradient equations failed to close");
  }
  return hj;
}

namespace {

/// Numeric sanity check that the chosen square-root branch makes
/// d D1[q_a]/dt = pi_a and d D0[q_a]/dt = D1[q_a] hold along the closed
/// forms. Probes a few constant assignments to avoid degenerate points.
void check_branch(const TrajectorySector& ts, const NameTable& names) {
  const double h = 1e-6;
  const double candidates[][2] = {{1.0, 1.0}, {2.0, 5.0}, {1.0, 8.0}};
  for (const auto& ee : candidates) {
    Assignment base{{atoms::E(ts.index), ee[0]},
                    {atoms::Ep(ts.index), ee[1]},
                    {atoms::eta(ts.index), 0.0},
                    {atoms::lambda(ts.index), 0.0}};
    try {
      auto at = [&](const Expr& e, double tval) {
        Assignment a = base;
        a[atoms::t()] = tval;
        return eval_numeric(e, a, names);
      };
      const double t0 = 0.1;
      const double dq1 = (at(ts.q1, t0 + h) - at(ts.q1, t0 - h)) / (2 * h);
      const double dq0 = (at(ts.q0, t0 + h) - at(ts.q0, t0 - h)) / (2 * h);
      if (std::abs(dq1 - at(ts.pi, t0)) > 1e-5 ||
          std::abs(dq0 - at(ts.q1, t0)) > 1e-5)
        throw Error("square-root branch inconsistent with the equations of "
                    "motion in sector " +
                    names.coord(ts.index));
      return;  // one clean probe suffices
    } catch (const EvalError&) {
      continue;  // degenerate probe point; try the next constants
    }
  }
  throw Error("could not find a nondegenerate probe point for sector " +
              names.coord(ts.index));
}

}  // namespace

Trajectory derive_trajectories(const HJSolution& hj) {
  Trajectory out{hj, {}, {}, {}, {}};
  const NameTable& names = hj.cs.sys.ps.names;
  for (const auto& sec : hj.sectors) {
    TrajectorySector ts;
    ts.index = sec.index;
    const int a = sec.index;
    const Expr psi = atom(atoms::eta(a)) + atom(atoms::t());
    const AtomId x_atom = atoms::chain(a, 1);
    const AtomId x0_atom = atoms::chain(a, 0);

    Expr branch_sqrt_rho;  // rho^(1/2) along the trajectory
    if (sec.family == RadicandFamily::Affine) {
      // eta = -t - rho^(1/2)/k  =>  rho^(1/2) = -k (eta + t).
      ts.q1 = (Ep_(a) - sec.m) * pow(sec.k, -1) -
              rational(1, 2) * (sec.k * psi * psi);
      branch_sqrt_rho = -(sec.k * psi);
    } else {
      // eta = -t + (1/w) asin(w u / A)  =>  asin(w u / A) = w (eta + t).
      Expr theta = product({sec.omega, psi});
      Expr A = pow(sec.a2, 1, 2);
      ts.q1 = pow(sec.omega, -1) * A * sin(theta) - sec.bshift;
      branch_sqrt_rho = A * cos(theta);
    }
    ts.pi = branch_sqrt_rho;

    // lambda_a = dW/dE + dW'/dE; the W part contributes D0[q_a]/r.
    Expr g = replace_power_base(sec.dwp_dE, sec.rho, branch_sqrt_rho);
    if (sec.family == RadicandFamily::Arcsine) {
      Expr u = atom(x_atom) + sec.bshift;
      Expr asin_arg = product({sec.omega, u, pow(sec.a2, -1, 2)});
      g = replace_subexpr(g, asin(asin_arg), product({sec.omega, psi}));
    }
    g = substitute(g, {{x_atom, ts.q1}});
    ts.q0 = constant(sec.r) * (atom(atoms::lambda(a)) - g);
    ts.p = substitute(sec.dw_dq, {{x0_atom, ts.q0}});

    check_branch(ts, names);
    out.sectors.push_back(std::move(ts));
  }
  for (int mu : hj.cs.hessian.mu_indices) {
    out.arbitrary.push_back(mu);
    out.mu_p[mu] = -hj.cs.h_p.at(mu);
    out.mu_pi[mu] = -hj.cs.h_pi.at(mu);
  }
  return out;
}

}  // namespace fwkb
