#include "fwkb/wkb.hpp"

#include <cmath>
#include <random>

#include "fwkb/errors.hpp"

namespace fwkb {

namespace {

Expr minus_i() { return product({constant(-1), atom(atoms::imag())}); }

bool touches_momentum(const Expr& e) {
  return contains_if(e, [](const AtomId& a) { return atoms::is_momentum(a); });
}

}  // namespace

Expr WaveFunction::amplitude() const {
  std::vector<Expr> fs = amplitude_factors;
  return product(std::move(fs));
}

namespace {

/// Amplitude factor 1/sqrt(g) for a gradient g, collapsing one power level
/// so that (rho^(1/2))^(-1/2) lands on rho^(-1/4) directly.
Expr amplitude_factor(const Expr& gradient) {
  if (gradient.is_zero())
    throw Error("identically zero action gradient; amplitude undefined");
  if (gradient.kind() == Kind::Power)
    return pow(gradient.base(), gradient.exponent() * Rational(-1, 2));
  return pow(gradient, Rational(-1, 2));
}

}  // namespace

WaveFunction build_wave_function(const HJSolution& hj,
                                 const CanonicalSystem& cs) {
  WaveFunction psi;
  psi.phase = hj.action;
  psi.gradient = hj.gradient;
  for (int a : cs.hessian.a_indices) {
    psi.amplitude_factors.push_back(
        amplitude_factor(hj.gradient.at(atoms::chain(a, 0))));
    psi.amplitude_factors.push_back(
        amplitude_factor(hj.gradient.at(atoms::chain(a, 1))));
  }
  for (const Expr& f : psi.amplitude_factors) {
    if (contains_atom(f, atoms::t()) || contains_atom(f, atoms::hbar()))
      throw Error("amplitude depends on t or hbar");
    for (int mu : cs.hessian.mu_indices)
      if (contains_atom(f, atoms::chain(mu, 0)) ||
          contains_atom(f, atoms::chain(mu, 1)))
        throw Error("amplitude depends on a constrained coordinate");
  }
  return psi;
}

namespace {

struct SeriesAccumulator {
  std::vector<Expr> r0, r1, r2;

  HbarSeries collect() const {
    return {sum(std::vector<Expr>(r0)), sum(std::vector<Expr>(r1)),
            sum(std::vector<Expr>(r2))};
  }
};

struct OperatorApplier {
  const WaveFunction& psi;
  std::map<AtomId, Expr> log_amp_cache;  // v -> (d_v A)/A

  const Expr& log_amplitude_derivative(const AtomId& v) {
    auto it = log_amp_cache.find(v);
    if (it != log_amp_cache.end()) return it->second;
    std::vector<Expr> terms;
    for (const Expr& f : psi.amplitude_factors) {
      Expr df = differentiate(f, v);
      if (df.is_zero()) continue;
      Expr inv = f.kind() == Kind::Power
                     ? pow(f.base(), -f.exponent())
                     : pow(f, -1);
      terms.push_back(product({df, inv}));
    }
    return log_amp_cache.emplace(v, sum(std::move(terms))).first->second;
  }

  const Expr& phase_gradient(const AtomId& v) const {
    auto it = psi.gradient.find(v);
    if (it == psi.gradient.end())
      throw UnsupportedError("operator differentiates along " +
                             std::to_string(static_cast<int>(v.role)) +
                             " with no action gradient recorded");
    return it->second;
  }

  /// One application of (hbar/i) d/dv to a graded symbol (g0, g1, g2).
  void apply_momentum(const AtomId& v, Expr& g0, Expr& g1, Expr& g2) {
    const Expr& sv = phase_gradient(v);
    const Expr& av = log_amplitude_derivative(v);
    const Expr mi = minus_i();
    Expr n0 = product({g0, sv});
    Expr n1 = sum({product({mi, differentiate(g0, v)}), product({g1, sv}),
                   product({g0, mi, av})});
    Expr n2 = sum({product({mi, differentiate(g1, v)}), product({g2, sv}),
                   product({g1, mi, av})});
    g0 = n0;
    g1 = n1;
    g2 = n2;
  }
};

}  // namespace

HbarSeries apply_operator_series_terms(const Expr& op, const WaveFunction& psi,
                                       std::vector<Expr>* r0_terms) {
  if (contains_atom(op, atoms::hbar()))
    throw UnsupportedError("operator already contains hbar");
  if (contains_if(op, [](const AtomId& a) {
        return a.role == Role::ChainVar && a.level >= 2;
      }))
    throw UnsupportedError("operator contains level-2/3 chain atoms");

  OperatorApplier applier{psi, {}};
  SeriesAccumulator acc;
  const std::vector<Expr> terms =
      op.kind() == Kind::Sum ? op.kids() : std::vector<Expr>{op};

  for (const Expr& term : terms) {
    if (term.is_zero()) continue;
    std::vector<Expr> coord_factors;
    std::vector<std::pair<AtomId, long>> momenta;
    std::vector<Expr> factors;
    if (term.kind() == Kind::Product)
      factors = term.kids();
    else
      factors = {term};
    long degree = 0;
    for (const Expr& f : factors) {
      if (f.kind() == Kind::Atom && atoms::is_momentum(f.atom_id())) {
        momenta.emplace_back(f.atom_id(), 1);
        degree += 1;
      } else if (f.kind() == Kind::Power && f.base().kind() == Kind::Atom &&
                 atoms::is_momentum(f.base().atom_id()) &&
                 is_integer(f.exponent()) && f.exponent() > 0) {
        long d = to_long(f.exponent());
        momenta.emplace_back(f.base().atom_id(), d);
        degree += d;
      } else {
        if (touches_momentum(f))
          throw UnsupportedError(
              "momentum appears non-polynomially in an operator term");
        coord_factors.push_back(f);
      }
    }
    if (degree > 2)
      throw UnsupportedError("operator momentum degree exceeds two");

    Expr coord = product(std::vector<Expr>(coord_factors));
    for (const auto& [mom, d] : momenta) {
      const AtomId conj = atoms::conjugate_coordinate(mom);
      if (contains_atom(coord, conj))
        throw UnsupportedError(
            "ordering ambiguity: a momentum multiplies a function of its "
            "own conjugate coordinate");
    }

    Expr g0 = constant(1), g1 = constant(0), g2 = constant(0);
    for (const auto& [mom, d] : momenta)
      for (long k = 0; k < d; ++k)
        applier.apply_momentum(atoms::conjugate_coordinate(mom), g0, g1, g2);

    Expr t0 = product({coord, g0});
    acc.r0.push_back(t0);
    acc.r1.push_back(product({coord, g1}));
    acc.r2.push_back(product({coord, g2}));
    if (r0_terms) r0_terms->push_back(t0);
  }
  return acc.collect();
}

HbarSeries apply_operator_series(const Expr& op, const WaveFunction& psi) {
  return apply_operator_series_terms(op, psi, nullptr);
}

// ---------------------------------------------------------------------------
// Classically-allowed sampling

namespace {

struct DomainConditions {
  std::vector<Expr> positive;   // base >= margin (fractional powers)
  std::vector<Expr> away_zero;  // |base| >= margin (negative integer powers)
  std::vector<Expr> asin_args;  // |arg| <= 1 - margin
};

void collect_conditions(const Expr& e, DomainConditions& out) {
  switch (e.kind()) {
    case Kind::Constant:
    case Kind::Atom:
      return;
    case Kind::Power:
      if (!is_integer(e.exponent()))
        out.positive.push_back(e.base());
      else if (e.exponent() < 0)
        out.away_zero.push_back(e.base());
      collect_conditions(e.base(), out);
      return;
    case Kind::Asin:
      out.asin_args.push_back(e.arg());
      collect_conditions(e.arg(), out);
      return;
    default:
      for (const auto& k : e.kids()) collect_conditions(k, out);
  }
}

/// Deterministic uniform double in [lo, hi) independent of the standard
/// library's distribution implementation.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u =
      static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
  return lo + u * (hi - lo);
}

}  // namespace

std::vector<Assignment> sample_allowed_points(const std::vector<Expr>& exprs,
                                              const NameTable& names,
                                              std::uint64_t seed, int count,
                                              double margin) {
  DomainConditions cond;
  std::set<AtomId> sampled;
  std::set<AtomId> fixed_one;
  for (const Expr& e : exprs) {
    collect_conditions(e, cond);
    for (const AtomId& a : atoms_of(e)) {
      if (a.role == Role::ChainVar || a.role == Role::Time)
        sampled.insert(a);
      else if (a.role == Role::EnergyE || a.role == Role::EnergyEp)
        fixed_one.insert(a);
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<Assignment> out;
  out.reserve(static_cast<std::size_t>(count));
  long attempts = 0;
  const long max_attempts = 20000L * count;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > max_attempts)
      throw Error("classically-allowed sampler: acceptance region too small");
    Assignment a;
    for (const AtomId& at : sampled) a[at] = uniform(rng, -2.0, 2.0);
    for (const AtomId& at : fixed_one) a[at] = 1.0;
    bool ok = true;
    try {
      for (const Expr& b : cond.positive)
        if (eval_numeric(b, a, names) < margin) {
          ok = false;
          break;
        }
      if (ok)
        for (const Expr& b : cond.away_zero)
          if (std::abs(eval_numeric(b, a, names)) < margin) {
            ok = false;
            break;
          }
      if (ok)
        for (const Expr& b : cond.asin_args)
          if (std::abs(eval_numeric(b, a, names)) > 1.0 - margin) {
            ok = false;
            break;
          }
    } catch (const EvalError&) {
      ok = false;
    }
    if (ok) out.push_back(std::move(a));
  }
  return out;
}

double max_abs_term_sum_serial(const std::vector<Expr>& terms,
                               const std::vector<Assignment>& points,
                               const NameTable& names) {
  double worst = 0.0;
  for (const Assignment& a : points) {
    std::complex<double> acc = 0.0;
    for (const Expr& t : terms) acc += eval_complex(t, a, names);
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

double max_abs_term_sum(const std::vector<Expr>& terms,
                        const std::vector<Assignment>& points,
                        const NameTable& names) {
  double worst = 0.0;
  const long n = static_cast<long>(points.size());
#pragma omp parallel for reduction(max : worst) schedule(static)
  for (long k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (const Expr& t : terms) acc += eval_complex(t, points[k], names);
    const double mag = std::abs(acc);
    if (mag > worst) worst = mag;
  }
  return worst;
}

WkbReport verify_quantization(const CanonicalSystem& cs,
                              const WaveFunction& psi, std::uint64_t seed,
                              int points) {
  const NameTable& names = cs.sys.ps.names;
  WkbReport rep;
  rep.seed = seed;
  rep.points = points;

  {
    std::size_t k = 0;
    for (int a : cs.hessian.a_indices) {
      rep.amplitudes.emplace_back("psi0[" + names.coord(a) + "]",
                                  psi.amplitude_factors.at(k++));
      rep.amplitudes.emplace_back("phi0[" + names.coord(a) + "]",
                                  psi.amplitude_factors.at(k++));
    }
  }

  std::vector<std::pair<std::string, Expr>> ops;
  ops.emplace_back("H'0", cs.hprime0);
  for (int mu : cs.hessian.mu_indices)
    ops.emplace_back("H'p[" + names.coord(mu) + "]", cs.constraint_p(mu));
  for (int mu : cs.hessian.mu_indices)
    ops.emplace_back("H'pi[" + names.coord(mu) + "]", cs.constraint_pi(mu));

  for (std::size_t k = 0; k < ops.size(); ++k) {
    OperatorCheck chk;
    chk.name = ops[k].first;
    chk.is_constraint = k > 0;
    chk.series = apply_operator_series_terms(ops[k].second, psi,
                                             &chk.r0_terms);
    chk.r0_symbolic_zero = chk.series.r0.is_zero();
    chk.exact_annihilation = chk.is_constraint && chk.r0_symbolic_zero &&
                             chk.series.r1.is_zero() &&
                             chk.series.r2.is_zero();
    rep.checks.push_back(std::move(chk));
  }

  // One shared sample of classically-allowed points for every numeric check.
  std::vector<Expr> domain_exprs = psi.amplitude_factors;
  for (const auto& chk : rep.checks) {
    for (const Expr& t : chk.r0_terms) domain_exprs.push_back(t);
    domain_exprs.push_back(chk.series.r1);
    domain_exprs.push_back(chk.series.r2);
  }
  const std::vector<Assignment> pts =
      sample_allowed_points(domain_exprs, names, seed, points);

  for (auto& chk : rep.checks) {
    chk.numeric_max_r0 = max_abs_term_sum(chk.r0_terms, pts, names);
    if (!chk.r0_symbolic_zero && chk.numeric_max_r0 > 1e-10)
      throw QuantizationError(
          "semiclassical condition fails for " + chk.name +
          ": R0 = " + to_string(chk.series.r0, names) +
          " with sampled max |R0| = " + std::to_string(chk.numeric_max_r0));
  }
  return rep;
}

}  // namespace fwkb
