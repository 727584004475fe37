#include "fwkb/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "fwkb/errors.hpp"

namespace fwkb {

EomSystem derive_eom(const CanonicalSystem& cs) {
  EomSystem out{cs, {}};
  const auto& as = cs.hessian.a_indices;
  const auto& mus = cs.hessian.mu_indices;

  auto rate_for = [&](const AtomId& var, const AtomId& diff_by,
                      int sign) -> EomRate {
    EomRate r;
    r.var = var;
    r.c_t = constant(sign) * differentiate(cs.hprime0, diff_by);
    for (int mu : mus) {
      r.c_mu_q0[mu] =
          constant(sign) * differentiate(cs.constraint_p(mu), diff_by);
      r.c_mu_q1[mu] =
          constant(sign) * differentiate(cs.constraint_pi(mu), diff_by);
    }
    return r;
  };

  for (int a : as) {
    out.rates.push_back(rate_for(atoms::chain(a, 0), atoms::p(a), +1));
    out.rates.push_back(rate_for(atoms::chain(a, 1), atoms::pi(a), +1));
  }
  for (int i = 1; i <= cs.sys.ps.size(); ++i) {
    out.rates.push_back(rate_for(atoms::p(i), atoms::chain(i, 0), -1));
    out.rates.push_back(rate_for(atoms::pi(i), atoms::chain(i, 1), -1));
  }
  return out;
}

namespace {

struct RhsEvaluator {
  const EomSystem& eom;
  const NameTable& names;
  std::map<int, Expr> mu_q0, mu_q1;        // parameter functions of t
  std::map<int, Expr> mu_q0_dot, mu_q1_dot;  // their time derivatives

  RhsEvaluator(const EomSystem& e, const MuParams& mu)
      : eom(e), names(e.cs.sys.ps.names) {
    for (int m : e.cs.hessian.mu_indices) {
      Expr f0 = mu.q0.count(m) ? mu.q0.at(m) : constant(1);
      Expr f1 = mu.q1.count(m) ? mu.q1.at(m) : constant(1);
      mu_q0[m] = f0;
      mu_q1[m] = f1;
      mu_q0_dot[m] = differentiate(f0, atoms::t());
      mu_q1_dot[m] = differentiate(f1, atoms::t());
    }
  }

  /// Extends a state with t and the mu-sector parameter values.
  Assignment full_assignment(double t, const Assignment& state) const {
    Assignment a = state;
    a[atoms::t()] = t;
    Assignment tonly{{atoms::t(), t}};
    for (const auto& [m, f] : mu_q0)
      a[atoms::chain(m, 0)] = eval_numeric(f, tonly, names);
    for (const auto& [m, f] : mu_q1)
      a[atoms::chain(m, 1)] = eval_numeric(f, tonly, names);
    return a;
  }

  std::vector<double> rates(double t, const Assignment& state) const {
    Assignment a = full_assignment(t, state);
    Assignment tonly{{atoms::t(), t}};
    std::vector<double> out;
    out.reserve(eom.rates.size());
    for (const auto& r : eom.rates) {
      double v = eval_numeric(r.c_t, a, names);
      for (const auto& [m, c] : r.c_mu_q0)
        v += eval_numeric(c, a, names) *
             eval_numeric(mu_q0_dot.at(m), tonly, names);
      for (const auto& [m, c] : r.c_mu_q1)
        v += eval_numeric(c, a, names) *
             eval_numeric(mu_q1_dot.at(m), tonly, names);
      out.push_back(v);
    }
    return out;
  }
};

}  // namespace

NumericRun integrate(const EomSystem& eom, const RunSpec& spec) {
  if (spec.h <= 0) throw Error("step size must be positive");
  if (spec.t1 < spec.t0) throw Error("empty time interval");
  RhsEvaluator rhs(eom, spec.mu);

  NumericRun run;
  run.t0 = spec.t0;
  run.t1 = spec.t1;
  run.h = spec.h;
  for (const auto& r : eom.rates) run.columns.push_back(r.var);
  for (int mu : eom.cs.hessian.mu_indices) {
    run.columns.push_back(atoms::chain(mu, 0));
    run.columns.push_back(atoms::chain(mu, 1));
  }
  std::sort(run.columns.begin(), run.columns.end());

  Assignment state;
  for (const auto& r : eom.rates) {
    auto it = spec.initial.find(r.var);
    if (it == spec.initial.end())
      throw UnsupportedError("initial state does not bind " +
                             atom_name(r.var, eom.cs.sys.ps.names));
    state[r.var] = it->second;
  }

  const long steps =
      std::lround(std::ceil((spec.t1 - spec.t0) / spec.h - 1e-9));
  auto record = [&](double t, const Assignment& st) {
    Assignment full = rhs.full_assignment(t, st);
    std::vector<double> row;
    row.reserve(run.columns.size());
    for (const AtomId& c : run.columns) row.push_back(full.at(c));
    run.times.push_back(t);
    run.states.push_back(std::move(row));
  };

  record(spec.t0, state);
  double t = spec.t0;
  for (long step = 0; step < steps; ++step) {
    const double h = std::min(spec.h, spec.t1 - t);
    auto advance = [&](const std::vector<double>& k, double frac) {
      Assignment s = state;
      std::size_t idx = 0;
      for (const auto& r : eom.rates) s[r.var] += frac * h * k[idx++];
      return s;
    };
    try {
      const std::vector<double> k1 = rhs.rates(t, state);
      const std::vector<double> k2 =
          rhs.rates(t + h / 2, advance(k1, 0.5));
      const std::vector<double> k3 =
          rhs.rates(t + h / 2, advance(k2, 0.5));
      const std::vector<double> k4 = rhs.rates(t + h, advance(k3, 1.0));
      std::size_t idx = 0;
      for (const auto& r : eom.rates) {
        state[r.var] +=
            h / 6.0 * (k1[idx] + 2 * k2[idx] + 2 * k3[idx] + k4[idx]);
        ++idx;
      }
    } catch (const EvalError& err) {
      throw VerificationError("evaluation failed at t = " +
                              std::to_string(t) + ": " + err.what());
    }
    t += h;
    record(t, state);
  }
  return run;
}

SectorConstants solve_sector_constants(const HJSolution& hj, int index,
                                       const Assignment& state, double t0) {
  const NameTable& names = hj.cs.sys.ps.names;
  const SectorSolution& sec = hj.sector(index);
  auto need = [&](const AtomId& a) -> double {
    auto it = state.find(a);
    if (it == state.end())
      throw UnsupportedError("constants unsolvable: state does not bind " +
                             atom_name(a, names));
    return it->second;
  };
  const double q0v = need(atoms::chain(index, 0));
  const double q1v = need(atoms::chain(index, 1));
  const double pv = need(atoms::p(index));
  const double piv = need(atoms::pi(index));

  SectorConstants c;
  // c_a = r p + s q0 is the separation constant E_a.
  c.E = to_double(sec.r) * pv + to_double(sec.s) * q0v;
  // Sector energy E'_a = E q1 + pi^2/2 + V(q1).
  c.Ep = c.E * q1v + piv * piv / 2 + to_double(sec.v0) +
         to_double(sec.v1) * q1v + to_double(sec.v2) * q1v * q1v;

  Assignment consts{{atoms::E(index), c.E}, {atoms::Ep(index), c.Ep}};
  if (sec.family == RadicandFamily::Affine) {
    const double k = eval_numeric(sec.k, consts, names);
    if (std::abs(k) < 1e-9)
      throw DegenerateConstantError(
          "degenerate constant: E-coupling k vanishes in sector " +
          names.coord(index) + " (affine family)");
    c.eta = -t0 - piv / k;
  } else {
    const double a2 = eval_numeric(sec.a2, consts, names);
    if (a2 < 1e-12)
      throw DegenerateConstantError(
          "degenerate constant: empty classically allowed region in sector " +
          names.coord(index) + " (arcsine family)");
    const double omega = eval_numeric(sec.omega, consts, names);
    const double b = eval_numeric(sec.bshift, consts, names);
    const double theta = std::atan2(omega * (q1v + b), piv);
    c.eta = theta / omega - t0;
  }

  // q0(t) is linear in lambda with coefficient r.
  Trajectory traj;  // local closed forms for this sector only
  {
    // Rebuild just this sector's closed forms via the public API.
    traj = derive_trajectories(hj);
  }
  const TrajectorySector& ts = traj.sector(index);
  Assignment full = consts;
  full[atoms::eta(index)] = c.eta;
  full[atoms::lambda(index)] = 0.0;
  full[atoms::t()] = t0;
  const double base = eval_numeric(ts.q0, full, names);
  c.lambda = (q0v - base) / to_double(sec.r);

  // The recovered constants must reproduce the state.
  full[atoms::lambda(index)] = c.lambda;
  const double rq0 = eval_numeric(ts.q0, full, names);
  const double rq1 = eval_numeric(ts.q1, full, names);
  const double rpi = eval_numeric(ts.pi, full, names);
  const double rp = eval_numeric(ts.p, full, names);
  const double err = std::max({std::abs(rq0 - q0v), std::abs(rq1 - q1v),
                               std::abs(rpi - piv), std::abs(rp - pv)});
  if (err > 1e-6)
    throw UnsupportedError(
        "constants unsolvable: state at t0 is not on a closed-form "
        "trajectory of sector " +
        names.coord(index) + " (residual " + std::to_string(err) + ")");
  return c;
}

ComparisonReport compare(const NumericRun& run, const Trajectory& traj,
                         double tol) {
  const HJSolution& hj = traj.hj;
  const NameTable& names = hj.cs.sys.ps.names;
  ComparisonReport rep;
  rep.tol = tol;

  if (run.states.empty()) throw Error("empty run");
  Assignment initial;
  for (std::size_t c = 0; c < run.columns.size(); ++c)
    initial[run.columns[c]] = run.states.front()[c];

  Assignment consts;
  for (const auto& sec : hj.sectors) {
    SectorConstants sc =
        solve_sector_constants(hj, sec.index, initial, run.times.front());
    rep.E[sec.index] = sc.E;
    rep.Ep[sec.index] = sc.Ep;
    rep.eta[sec.index] = sc.eta;
    rep.lambda[sec.index] = sc.lambda;
    consts[atoms::E(sec.index)] = sc.E;
    consts[atoms::Ep(sec.index)] = sc.Ep;
    consts[atoms::eta(sec.index)] = sc.eta;
    consts[atoms::lambda(sec.index)] = sc.lambda;
  }

  // Column expressions to compare: a-sector atoms against closed forms,
  // mu-sector momenta against the constraint surface.
  std::map<AtomId, Expr> reference;
  for (const auto& ts : traj.sectors) {
    reference[atoms::chain(ts.index, 0)] = ts.q0;
    reference[atoms::chain(ts.index, 1)] = ts.q1;
    reference[atoms::p(ts.index)] = ts.p;
    reference[atoms::pi(ts.index)] = ts.pi;
  }
  for (const auto& [mu, e] : traj.mu_p) reference[atoms::p(mu)] = e;
  for (const auto& [mu, e] : traj.mu_pi) reference[atoms::pi(mu)] = e;

  for (std::size_t row = 0; row < run.states.size(); ++row) {
    Assignment a = consts;
    a[atoms::t()] = run.times[row];
    for (std::size_t c = 0; c < run.columns.size(); ++c)
      a[run.columns[c]] = run.states[row][c];
    for (std::size_t c = 0; c < run.columns.size(); ++c) {
      auto it = reference.find(run.columns[c]);
      if (it == reference.end()) continue;
      const double expect = eval_numeric(it->second, a, names);
      const double dev = std::abs(expect - run.states[row][c]);
      double& slot = rep.max_deviation[run.columns[c]];
      if (dev > slot) slot = dev;
      if (dev > rep.overall) rep.overall = dev;
    }
  }
  rep.pass = rep.overall < tol;
  return rep;
}

void write_csv(const NumericRun& run, const NameTable& names,
               std::ostream& os) {
  os << "t";
  for (const AtomId& c : run.columns) os << "," << atom_name(c, names);
  os << "\n";
  char buf[64];
  for (std::size_t row = 0; row < run.states.size(); ++row) {
    std::snprintf(buf, sizeof buf, "%.17g", run.times[row]);
    os << buf;
    for (double v : run.states[row]) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << "," << buf;
    }
    os << "\n";
  }
}

}  // namespace fwkb
