#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fwkb/dynamics.hpp"
#include "fwkb/hjsolve.hpp"

namespace fwkb {

/// Semiclassical wave function Psi = amplitude * exp(i S / hbar), kept
/// structurally as the pair (amplitude, phase); the exponential is never
/// expanded. The gradient table carries the closed-form first derivatives
/// of S, so all operator bookkeeping stays inside the polynomial-and-
/// radical fragment the canonicalizer decides.
struct WaveFunction {
  std::vector<Expr> amplitude_factors;  // one psi0/phi0 factor per entry
  Expr phase;                           // S
  std::map<AtomId, Expr> gradient;      // dS/dv, v in coords and t

  Expr amplitude() const;
};

/// (operator applied to Psi) / Psi = R0 + hbar R1 + hbar^2 R2 with
/// coefficients free of hbar; i is carried exactly.
struct HbarSeries {
  Expr r0, r1, r2;
};

WaveFunction build_wave_function(const HJSolution& hj,
                                 const CanonicalSystem& cs);

/// Quantizes op by p0 -> (hbar/i) d/dt, p_i -> (hbar/i) d/dD0[q_i],
/// pi_i -> (hbar/i) d/dD1[q_i] (coordinates left, derivatives right),
/// applies it to Psi and grades the quotient by powers of hbar.
/// Momentum degree above two, or a momentum multiplying a function of its
/// own conjugate coordinate, is rejected.
HbarSeries apply_operator_series(const Expr& op, const WaveFunction& psi);

/// Like apply_operator_series, also returning the per-term hbar^0
/// contributions before summation (the numeric sampling evaluates their
/// float sum, which is a genuine cancellation test).
HbarSeries apply_operator_series_terms(const Expr& op, const WaveFunction& psi,
                                       std::vector<Expr>* r0_terms);

struct OperatorCheck {
  std::string name;
  bool is_constraint = false;
  HbarSeries series;
  std::vector<Expr> r0_terms;
  bool r0_symbolic_zero = false;
  bool exact_annihilation = false;  // constraints: R1 and R2 vanish too
  double numeric_max_r0 = 0.0;
};

struct WkbReport {
  std::vector<std::pair<std::string, Expr>> amplitudes;
  std::vector<OperatorCheck> checks;
  std::uint64_t seed = 0;
  int points = 0;
};

/// Runs the operator conditions for H'0 and every primary constraint:
/// R0 must vanish symbolically (constraints: all orders), with a numeric
/// fallback over seeded classically-allowed phase points at E = E' = 1.
/// Throws QuantizationError when R0 survives both checks.
WkbReport verify_quantization(const CanonicalSystem& cs,
                              const WaveFunction& psi, std::uint64_t seed,
                              int points = 1000);

/// Sampled classically-allowed phase points (all radical and reciprocal
/// bases of `exprs` at least `margin` away from their boundaries).
std::vector<Assignment> sample_allowed_points(const std::vector<Expr>& exprs,
                                              const NameTable& names,
                                              std::uint64_t seed, int count,
                                              double margin = 1e-2);

/// max over points of |sum of term values|. The OpenMP kernel and the
/// serial reference compute identical results; the parallel form is the
/// production path and the serial one is kept for testing and benchmarks.
double max_abs_term_sum_serial(const std::vector<Expr>& terms,
                               const std::vector<Assignment>& points,
                               const NameTable& names);
double max_abs_term_sum(const std::vector<Expr>& terms,
                        const std::vector<Assignment>& points,
                        const NameTable& names);

}  // namespace fwkb
