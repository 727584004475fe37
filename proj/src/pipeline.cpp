#include "fwkb/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "fwkb/parse.hpp"

namespace fwkb {

namespace {

std::string join_names(const NameTable& names, const std::vector<int>& idx) {
  std::string out;
  for (int i : idx) {
    if (!out.empty()) out += " ";
    out += names.coord(i);
  }
  return out;
}

std::string hessian_to_string(const HessianReport& h) {
  std::string out = "[";
  for (std::size_t r = 0; r < h.w.size(); ++r) {
    if (r) out += ", ";
    out += "[";
    for (std::size_t c = 0; c < h.w[r].size(); ++c) {
      if (c) out += ", ";
      out += rat_to_string(h.w[r][c]);
    }
    out += "]";
  }
  return out + "]";
}

}  // namespace

AnalyzeResult analyze_stage(const SystemFile& sf) {
  LagrangianSystem sys = build_system(sf.coords, sf.lagrangian_src);
  HessianReport h = hessian_and_rank(sys);
  CanonicalSystem cs = legendre_transform(sys, h);
  ConstraintClassification cls = classify_and_check_integrability(cs);
  return {std::move(sys), std::move(cs), std::move(cls)};
}

SolveResult solve_stage(const SystemFile& sf) {
  AnalyzeResult ar = analyze_stage(sf);
  std::vector<HjpdeForm> forms = build_hjpdes(ar.cs);
  HJSolution hj = solve_separable(ar.cs);
  Trajectory traj = derive_trajectories(hj);
  return {std::move(ar), std::move(forms), std::move(hj), std::move(traj)};
}

Assignment run_constants(const SystemFile& sf, const HJSolution& hj) {
  Assignment consts;
  for (const auto& sec : hj.sectors) {
    consts[atoms::E(sec.index)] = 1.0;
    consts[atoms::Ep(sec.index)] = 1.0;
    consts[atoms::eta(sec.index)] = 0.0;
    consts[atoms::lambda(sec.index)] = 0.0;
  }
  for (const auto& [a, v] : sf.constants) {
    if (!consts.count(a))
      throw UnsupportedError("constant " +
                             atom_name(a, hj.cs.sys.ps.names) +
                             " does not belong to a solved sector");
    consts[a] = v;
  }
  const NameTable& names = hj.cs.sys.ps.names;
  for (const auto& sec : hj.sectors) {
    if (sec.family == RadicandFamily::Affine) {
      if (std::abs(eval_numeric(sec.k, consts, names)) < 1e-9)
        throw DegenerateConstantError(
            "degenerate constant: E-coupling vanishes in sector " +
            names.coord(sec.index) + " (affine family)");
    } else {
      if (eval_numeric(sec.a2, consts, names) < 1e-12)
        throw DegenerateConstantError(
            "degenerate constant: empty classically allowed region in "
            "sector " +
            names.coord(sec.index) + " (arcsine family)");
    }
  }
  return consts;
}

namespace {

MuParams mu_params_from_file(const SystemFile& sf, const CanonicalSystem& cs) {
  const NameTable& names = cs.sys.ps.names;
  MuParams mu;
  for (const auto& [atom_s, expr_s] : sf.mu_sources) {
    Expr f = parse_expr(expr_s, names);
    for (const AtomId& a : atoms_of(f))
      if (a.role != Role::Time)
        throw UnsupportedError("mu-parameter function may depend on t only: " +
                               expr_s);
    // atom_s names D0[...] or D1[...] of a mu coordinate
    Expr target = parse_expr(atom_s, names);
    if (target.kind() != Kind::Atom ||
        target.atom_id().role != Role::ChainVar)
      throw UnsupportedError("mu-parameter key must be a chain atom: " +
                             atom_s);
    const AtomId a = target.atom_id();
    bool is_mu = false;
    for (int m : cs.hessian.mu_indices) is_mu |= (m == a.index);
    if (!is_mu || a.level > 1)
      throw UnsupportedError(
          "mu-parameter key must be a level-0/1 atom of a constrained "
          "coordinate: " +
          atom_s);
    if (a.level == 0)
      mu.q0[a.index] = f;
    else
      mu.q1[a.index] = f;
  }
  return mu;
}

}  // namespace

VerifyResult verify_stage(const SystemFile& sf, const VerifyOptions& opts) {
  SolveResult sr = solve_stage(sf);
  const NameTable& names = sr.hj.cs.sys.ps.names;
  Assignment consts = run_constants(sf, sr.hj);

  RunSpec spec;
  spec.t0 = sf.t0.value_or(0.0);
  spec.t1 = sf.t1.value_or(10.0);
  spec.h = sf.h.value_or(1e-3);
  spec.mu = mu_params_from_file(sf, sr.hj.cs);

  // Seed the run from the closed forms at t0 (mu momenta on the
  // constraint surface).
  Assignment at0 = consts;
  at0[atoms::t()] = spec.t0;
  for (const auto& ts : sr.trajectory.sectors) {
    spec.initial[atoms::chain(ts.index, 0)] = eval_numeric(ts.q0, at0, names);
    spec.initial[atoms::chain(ts.index, 1)] = eval_numeric(ts.q1, at0, names);
    spec.initial[atoms::p(ts.index)] = eval_numeric(ts.p, at0, names);
    spec.initial[atoms::pi(ts.index)] = eval_numeric(ts.pi, at0, names);
  }
  Assignment t_only{{atoms::t(), spec.t0}};
  for (int mu : sr.hj.cs.hessian.mu_indices) {
    Expr f0 = spec.mu.q0.count(mu) ? spec.mu.q0.at(mu) : constant(1);
    Expr f1 = spec.mu.q1.count(mu) ? spec.mu.q1.at(mu) : constant(1);
    Assignment a = t_only;
    a[atoms::chain(mu, 0)] = eval_numeric(f0, t_only, names);
    a[atoms::chain(mu, 1)] = eval_numeric(f1, t_only, names);
    spec.initial[atoms::p(mu)] =
        eval_numeric(-sr.hj.cs.h_p.at(mu), a, names);
    spec.initial[atoms::pi(mu)] =
        eval_numeric(-sr.hj.cs.h_pi.at(mu), a, names);
  }

  EomSystem eom = derive_eom(sr.hj.cs);
  VerifyResult vr{std::move(sr), spec, integrate(eom, spec), {}, 0.0, {}, {}};
  vr.comparison = compare(vr.run, vr.solve.trajectory, opts.tol);

  // Conservation and constraint preservation along the run.
  const CanonicalSystem& cs = vr.solve.hj.cs;
  double h0_ref = 0.0;
  for (std::size_t row = 0; row < vr.run.states.size(); ++row) {
    Assignment a;
    a[atoms::t()] = vr.run.times[row];
    for (std::size_t c = 0; c < vr.run.columns.size(); ++c)
      a[vr.run.columns[c]] = vr.run.states[row][c];
    const double h0 = eval_numeric(cs.h0, a, names);
    if (row == 0)
      h0_ref = h0;
    else
      vr.h0_drift = std::max(vr.h0_drift, std::abs(h0 - h0_ref));
    for (int mu : cs.hessian.mu_indices) {
      vr.constraint_drift_p[mu] =
          std::max(vr.constraint_drift_p[mu],
                   std::abs(eval_numeric(cs.constraint_p(mu), a, names)));
      vr.constraint_drift_pi[mu] =
          std::max(vr.constraint_drift_pi[mu],
                   std::abs(eval_numeric(cs.constraint_pi(mu), a, names)));
    }
  }

  if (opts.csv_path) {
    std::ofstream out(*opts.csv_path);
    if (!out)
      throw Error("cannot open CSV output file '" + *opts.csv_path + "'");
    write_csv(vr.run, names, out);
  }
  if (!vr.comparison.pass)
    throw VerificationError(
        "numeric run deviates from the closed forms: max deviation " +
        std::to_string(vr.comparison.overall) + " exceeds tolerance " +
        std::to_string(opts.tol));
  return vr;
}

QuantizeResult quantize_stage(const SystemFile& sf,
                              const QuantizeOptions& opts) {
  SolveResult sr = solve_stage(sf);
  WaveFunction psi = build_wave_function(sr.hj, sr.hj.cs);
  if (opts.perturb_phase) {
    const NameTable& names = sr.hj.cs.sys.ps.names;
    Expr p = parse_expr(*opts.perturb_phase, names);
    psi.phase = psi.phase + p;
    for (auto& [v, g] : psi.gradient) g = g + differentiate(p, v);
  }
  WkbReport wkb = verify_quantization(sr.hj.cs, psi, opts.seed, opts.points);
  return {std::move(sr), std::move(psi), std::move(wkb)};
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

void render_header(Report& rep, const char* command, const SystemFile& sf) {
  rep.add("command", command);
  rep.add("file", sf.path);
  std::string coords;
  for (const auto& c : sf.coords) {
    if (!coords.empty()) coords += " ";
    coords += c;
  }
  rep.add("coords", coords);
}

void render_analyze_into(Report& rep, const SystemFile& sf,
                         const AnalyzeResult& r) {
  const NameTable& names = r.sys.ps.names;
  rep.add("L", to_string(r.sys.lagrangian, names));
  rep.add("hessian", hessian_to_string(r.cs.hessian));
  rep.add("hessian.rank", std::to_string(r.cs.hessian.rank));
  rep.add_bool("hessian.regular", r.cs.hessian.regular());
  rep.add("a.indices", join_names(names, r.cs.hessian.a_indices));
  rep.add("mu.indices", join_names(names, r.cs.hessian.mu_indices));
  for (int a : r.cs.hessian.a_indices) {
    rep.add("w[" + names.coord(a) + "]",
            to_string(r.cs.accel.at(a), names));
    rep.add("p.onshell[" + names.coord(a) + "]",
            to_string(r.cs.onshell_p.at(a), names));
  }
  for (int mu : r.cs.hessian.mu_indices) {
    rep.add("constraint.Hp[" + names.coord(mu) + "]",
            to_string(r.cs.constraint_p(mu), names));
    rep.add("constraint.Hpi[" + names.coord(mu) + "]",
            to_string(r.cs.constraint_pi(mu), names));
  }
  rep.add("H0", to_string(r.cs.h0, names));
  for (const auto& b : r.classification.brackets) {
    rep.add("bracket.{" + b.lhs + "," + b.rhs + "}",
            to_string(b.value, names));
    if (!(b.value == b.on_surface))
      rep.add("bracket.{" + b.lhs + "," + b.rhs + "}.on_surface",
              to_string(b.on_surface, names));
  }
  if (r.cs.hessian.regular())
    rep.add("classification", "regular (no constraints)");
  else
    rep.add("classification", r.classification.first_class
                                  ? "first-class"
                                  : "not first-class");
  rep.add_bool("integrable", r.classification.integrable);
}

void render_solve_into(Report& rep, const SolveResult& r) {
  const NameTable& names = r.hj.cs.sys.ps.names;
  for (const auto& f : r.hjpdes) rep.add("hjpde." + f.label, f.rendered);
  rep.add("S.f", to_string(r.hj.f_t, names));
  for (const auto& s : r.hj.sectors) {
    rep.add("S.W[" + names.coord(s.index) + "]", to_string(s.w, names));
    rep.add("S.Wp[" + names.coord(s.index) + "]", to_string(s.wp, names));
  }
  for (const auto& m : r.hj.mus) {
    rep.add("S.fmu[" + names.coord(m.index) + "]", to_string(m.f, names));
    rep.add("S.fpmu[" + names.coord(m.index) + "]", to_string(m.fp, names));
  }
  rep.add("S", to_string(r.hj.action, names));
  rep.add("hj.residual", "0");
  for (const auto& ts : r.trajectory.sectors) {
    const std::string n = names.coord(ts.index);
    rep.add("traj.D0[" + n + "]", to_string(ts.q0, names));
    rep.add("traj.D1[" + n + "]", to_string(ts.q1, names));
    rep.add("traj.p[" + n + "]", to_string(ts.p, names));
    rep.add("traj.pi[" + n + "]", to_string(ts.pi, names));
  }
  for (int mu : r.trajectory.arbitrary) {
    const std::string n = names.coord(mu);
    rep.add("traj.D0[" + n + "]", "arbitrary parameter");
    rep.add("traj.D1[" + n + "]", "arbitrary parameter");
    rep.add("traj.p[" + n + "]",
            to_string(r.trajectory.mu_p.at(mu), names));
    rep.add("traj.pi[" + n + "]",
            to_string(r.trajectory.mu_pi.at(mu), names));
  }
}

}  // namespace

Report render_analyze(const SystemFile& sf, const AnalyzeResult& r) {
  Report rep;
  render_header(rep, "analyze", sf);
  render_analyze_into(rep, sf, r);
  return rep;
}

Report render_solve(const SystemFile& sf, const SolveResult& r) {
  Report rep;
  render_header(rep, "solve", sf);
  render_analyze_into(rep, sf, r.analyze);
  render_solve_into(rep, r);
  return rep;
}

Report render_verify(const SystemFile& sf, const VerifyResult& r,
                     const VerifyOptions& opts) {
  Report rep;
  render_header(rep, "verify", sf);
  render_analyze_into(rep, sf, r.solve.analyze);
  render_solve_into(rep, r.solve);
  const NameTable& names = r.solve.hj.cs.sys.ps.names;
  rep.add_double("verify.t0", r.spec.t0);
  rep.add_double("verify.t1", r.spec.t1);
  rep.add_double("verify.h", r.spec.h);
  rep.add_double("verify.tol", opts.tol);
  for (const auto& [idx, v] : r.comparison.E)
    rep.add_double("verify.constant.E[" + std::to_string(idx) + "]", v);
  for (const auto& [idx, v] : r.comparison.Ep)
    rep.add_double("verify.constant.Ep[" + std::to_string(idx) + "]", v);
  for (const auto& [m, f] : r.spec.mu.q0)
    rep.add("verify.mu.D0[" + names.coord(m) + "]", to_string(f, names));
  for (const auto& [m, f] : r.spec.mu.q1)
    rep.add("verify.mu.D1[" + names.coord(m) + "]", to_string(f, names));
  for (const auto& [a, d] : r.comparison.max_deviation)
    rep.add_double("deviation." + atom_name(a, names), d);
  rep.add_double("deviation.max", r.comparison.overall);
  rep.add_double("conservation.H0.drift", r.h0_drift);
  for (const auto& [m, d] : r.constraint_drift_p)
    rep.add_double("constraint.drift.Hp[" + names.coord(m) + "]", d);
  for (const auto& [m, d] : r.constraint_drift_pi)
    rep.add_double("constraint.drift.Hpi[" + names.coord(m) + "]", d);
  rep.add_bool("verify.pass", r.comparison.pass);
  if (opts.csv_path) rep.add("csv", *opts.csv_path);
  return rep;
}

Report render_quantize(const SystemFile& sf, const QuantizeResult& r) {
  Report rep;
  render_header(rep, "quantize", sf);
  render_analyze_into(rep, sf, r.solve.analyze);
  render_solve_into(rep, r.solve);
  const NameTable& names = r.solve.hj.cs.sys.ps.names;
  rep.add("quantize.seed", std::to_string(r.wkb.seed));
  rep.add("quantize.points", std::to_string(r.wkb.points));
  for (const auto& [label, e] : r.wkb.amplitudes)
    rep.add("amplitude." + label, to_string(e, names));
  bool all_pass = true;
  for (const auto& chk : r.wkb.checks) {
    rep.add("op." + chk.name + ".R0", to_string(chk.series.r0, names));
    rep.add("op." + chk.name + ".R1", to_string(chk.series.r1, names));
    rep.add("op." + chk.name + ".R2", to_string(chk.series.r2, names));
    rep.add_bool("op." + chk.name + ".R0.symbolic_zero",
                 chk.r0_symbolic_zero);
    rep.add_double("op." + chk.name + ".numeric_max_R0", chk.numeric_max_r0);
    if (chk.is_constraint)
      rep.add("op." + chk.name + ".annihilation",
              chk.exact_annihilation ? "exact" : "not exact");
    all_pass = all_pass && (chk.r0_symbolic_zero ||
                            chk.numeric_max_r0 <= 1e-10);
  }
  rep.add("quantize.verdict", all_pass ? "pass" : "fail");
  return rep;
}

// ---------------------------------------------------------------------------
// Command-line front end

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{
      "fwkb - constrained second-order Lagrangian analysis, separable "
      "Hamilton-Jacobi solution and WKB quantization checks"};
  app.require_subcommand(1);

  std::string file;
  VerifyOptions vopts;
  QuantizeOptions qopts;
  std::string csv_path, perturb;

  CLI::App* analyze = app.add_subcommand("analyze", "singularity analysis, "
                                                    "constraints and H0");
  CLI::App* solve =
      app.add_subcommand("solve", "separable Hamilton-Jacobi solution and "
                                  "closed-form trajectories");
  CLI::App* verify = app.add_subcommand(
      "verify", "integrate the equations of motion and compare against the "
                "closed forms");
  CLI::App* quantize = app.add_subcommand(
      "quantize", "build the wave function and grade the operator "
                  "conditions in powers of hbar");
  for (CLI::App* sub : {analyze, solve, verify, quantize})
    sub->add_option("file", file, "system description file")->required();
  verify->add_option("--csv", csv_path, "write the trajectory as CSV");
  verify->add_option("--tol", vopts.tol, "verification threshold");
  quantize->add_option("--seed", qopts.seed, "sampling seed");
  quantize->add_option("--points", qopts.points, "number of sampled points");
  quantize->add_option("--perturb", perturb,
                       "add a phase perturbation before checking (debug aid)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitParse;
  }

  try {
    SystemFile sf = load_system_file(file);
    if (analyze->parsed()) {
      out << render_analyze(sf, analyze_stage(sf)).render();
    } else if (solve->parsed()) {
      out << render_solve(sf, solve_stage(sf)).render();
    } else if (verify->parsed()) {
      if (!csv_path.empty()) vopts.csv_path = csv_path;
      out << render_verify(sf, verify_stage(sf, vopts), vopts).render();
    } else if (quantize->parsed()) {
      if (!perturb.empty()) qopts.perturb_phase = perturb;
      out << render_quantize(sf, quantize_stage(sf, qopts)).render();
    }
    return kExitOk;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const QuantizationError& e) {
    err << "quantization inconsistency: " << e.what() << "\n";
    return kExitQuantization;
  } catch (const VerificationError& e) {
    err << "verification failure: " << e.what() << "\n";
    return kExitVerification;
  } catch (const UnsupportedError& e) {
    err << "unsupported structure: " << e.what() << "\n";
    return kExitUnsupported;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUnsupported;
  }
}

}  // namespace fwkb
