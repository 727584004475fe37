#include "fwkb/legendre.hpp"

#include <algorithm>

#include "fwkb/errors.hpp"

namespace fwkb {

namespace {

bool has_level_at_least(const Expr& e, int level) {
  return contains_if(e, [&](const AtomId& a) {
    return a.role == Role::ChainVar && a.level >= level;
  });
}

bool has_any_momentum(const Expr& e) {
  return contains_if(e, [](const AtomId& a) { return atoms::is_momentum(a); });
}

/// Determinant of the principal submatrix on `idx` by fraction-free
/// elimination over exact rationals.
Rational principal_determinant(const std::vector<std::vector<Rational>>& w,
                               const std::vector<int>& idx) {
  const std::size_t n = idx.size();
  std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      m[r][c] = w[static_cast<std::size_t>(idx[r] - 1)]
                 [static_cast<std::size_t>(idx[c] - 1)];
  Rational det = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && m[piv][col] == 0) ++piv;
    if (piv == n) return 0;
    if (piv != col) {
      std::swap(m[piv], m[col]);
      det = -det;
    }
    det *= m[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      if (m[r][col] == 0) continue;
      Rational f = m[r][col] / m[col][col];
      for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return det;
}

int matrix_rank(std::vector<std::vector<Rational>> m) {
  const std::size_t n = m.size();
  int rank = 0;
  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < n; ++col) {
    std::size_t piv = row;
    while (piv < n && m[piv][col] == 0) ++piv;
    if (piv == n) continue;
    std::swap(m[piv], m[row]);
    for (std::size_t r = row + 1; r < n; ++r) {
      if (m[r][col] == 0) continue;
      Rational f = m[r][col] / m[row][col];
      for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[row][c];
    }
    ++row;
    ++rank;
  }
  return rank;
}

/// First size-r index combination (lexicographic) with invertible principal
/// submatrix. For a symmetric matrix of rank r one always exists.
std::vector<int> smallest_invertible_subset(
    const std::vector<std::vector<Rational>>& w, int rank) {
  const int n = static_cast<int>(w.size());
  std::vector<int> pick(static_cast<std::size_t>(rank));
  for (int k = 0; k < rank; ++k) pick[static_cast<std::size_t>(k)] = k + 1;
  while (true) {
    if (principal_determinant(w, pick) != 0) return pick;
    // next combination
    int k = rank - 1;
    while (k >= 0 && pick[static_cast<std::size_t>(k)] == n - rank + k + 1)
      --k;
    if (k < 0)
      throw UnsupportedError(
          "no invertible principal Hessian block of the computed rank");
    ++pick[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < rank; ++j)
      pick[static_cast<std::size_t>(j)] =
          pick[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace

Expr CanonicalSystem::constraint_p(int mu) const {
  return atom(atoms::p(mu)) + h_p.at(mu);
}

Expr CanonicalSystem::constraint_pi(int mu) const {
  return atom(atoms::pi(mu)) + h_pi.at(mu);
}

HessianReport hessian_and_rank(const LagrangianSystem& sys) {
  const int n = sys.ps.size();
  HessianReport rep;
  rep.w.assign(static_cast<std::size_t>(n),
               std::vector<Rational>(static_cast<std::size_t>(n)));
  for (int i = 1; i <= n; ++i) {
    Expr di = differentiate(sys.lagrangian, atoms::chain(i, 2));
    for (int j = 1; j <= n; ++j) {
      Expr wij = differentiate(di, atoms::chain(j, 2));
      if (!wij.is_constant())
        throw UnsupportedError(
            "non-constant Hessian entry W[" + std::to_string(i) + "][" +
            std::to_string(j) + "] = " + to_string(wij, sys.ps.names) +
            "; only Lagrangians quadratic in the level-2 atoms are supported");
      rep.w[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] =
          wij.constant_value();
    }
  }
  rep.rank = matrix_rank(rep.w);
  if (rep.rank > 0)
    rep.a_indices = smallest_invertible_subset(rep.w, rep.rank);
  for (int i = 1; i <= n; ++i)
    if (std::find(rep.a_indices.begin(), rep.a_indices.end(), i) ==
        rep.a_indices.end())
      rep.mu_indices.push_back(i);
  return rep;
}

CanonicalSystem legendre_transform(const LagrangianSystem& sys,
                                   const HessianReport& hessian) {
  const NameTable& names = sys.ps.names;
  CanonicalSystem cs{sys, hessian, {}, {}, {}, {}, Expr(), Expr()};
  const auto& as = hessian.a_indices;
  const auto& mus = hessian.mu_indices;

  // Solve pi_a = dL/dD2[q_a] for the a-sector accelerations (a linear
  // system with the invertible principal Hessian block as matrix).
  // Row a: sum_b W_ab * D2[q_b] = pi_a - (dL/dD2[q_a] with a-sector
  // accelerations removed).
  const std::size_t r = as.size();
  std::vector<std::vector<Rational>> m(r, std::vector<Rational>(r));
  std::vector<Expr> rhs(r);
  for (std::size_t row = 0; row < r; ++row) {
    const int a = as[row];
    Expr dla = differentiate(sys.lagrangian, atoms::chain(a, 2));
    std::map<AtomId, Expr> wipe;
    for (std::size_t col = 0; col < r; ++col) {
      const int b = as[col];
      m[row][col] = hessian.w[static_cast<std::size_t>(a - 1)]
                             [static_cast<std::size_t>(b - 1)];
      wipe[atoms::chain(b, 2)] = constant(0);
    }
    rhs[row] = atom(atoms::pi(a)) - substitute(dla, wipe);
  }
  // Gaussian elimination with Expr right-hand sides.
  for (std::size_t col = 0; col < r; ++col) {
    std::size_t piv = col;
    while (piv < r && m[piv][col] == 0) ++piv;
    if (piv == r) throw UnsupportedError("acceleration system not solvable");
    std::swap(m[piv], m[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t row = 0; row < r; ++row) {
      if (row == col || m[row][col] == 0) continue;
      Rational f = m[row][col] / m[col][col];
      for (std::size_t c = 0; c < r; ++c) m[row][c] -= f * m[col][c];
      rhs[row] = rhs[row] - constant(f) * rhs[col];
    }
  }
  std::map<AtomId, Expr> accel_sub;
  for (std::size_t row = 0; row < r; ++row) {
    Expr wa = product({constant(Rational(1) / m[row][row]), rhs[row]});
    cs.accel[as[row]] = wa;
    accel_sub[atoms::chain(as[row], 2)] = wa;
  }

  // Primary constraints from the mu-sector momentum definitions.
  for (int mu : mus) {
    Expr pi_rhs =
        substitute(differentiate(sys.lagrangian, atoms::chain(mu, 2)),
                   accel_sub);
    if (has_level_at_least(pi_rhs, 2) || has_any_momentum(pi_rhs))
      throw UnsupportedError(
          "constraint for pi[" + names.coord(mu) +
          "] still involves momenta or accelerations: " +
          to_string(pi_rhs, names));
    cs.h_pi[mu] = -pi_rhs;

    Expr dl_d1 = differentiate(sys.lagrangian, atoms::chain(mu, 1));
    Expr dl_d2 = differentiate(sys.lagrangian, atoms::chain(mu, 2));
    Expr p_rhs = substitute(dl_d1 - shift_time_derivative(dl_d2), accel_sub);
    if (has_level_at_least(p_rhs, 2) || has_any_momentum(p_rhs))
      throw UnsupportedError(
          "constraint for p[" + names.coord(mu) +
          "] still involves momenta or accelerations: " +
          to_string(p_rhs, names));
    cs.h_p[mu] = -p_rhs;
  }

  // On-shell a-sector momentum reports (display only; may contain D3).
  for (int a : as) {
    Expr dl_d1 = differentiate(sys.lagrangian, atoms::chain(a, 1));
    Expr dl_d2 = differentiate(sys.lagrangian, atoms::chain(a, 2));
    cs.onshell_p[a] = dl_d1 - shift_time_derivative(dl_d2);
  }

  // H0 = -L(w_a substituted) + sum_a p_a D1[q_a] + sum_a pi_a w_a
  //      - sum_mu D1[q_mu] H^p_mu - sum_mu D2[q_mu] H^pi_mu.
  std::vector<Expr> terms;
  terms.push_back(-substitute(sys.lagrangian, accel_sub));
  for (int a : as) {
    terms.push_back(atom(atoms::p(a)) * atom(atoms::chain(a, 1)));
    terms.push_back(atom(atoms::pi(a)) * cs.accel.at(a));
  }
  for (int mu : mus) {
    terms.push_back(-(atom(atoms::chain(mu, 1)) * cs.h_p.at(mu)));
    terms.push_back(-(atom(atoms::chain(mu, 2)) * cs.h_pi.at(mu)));
  }
  cs.h0 = sum(std::move(terms));
  if (has_level_at_least(cs.h0, 2) ||
      contains_atom(cs.h0, atoms::hbar()))
    throw UnsupportedError("Hamiltonian failed its purity check: " +
                           to_string(cs.h0, names));
  for (int mu : mus)
    if (contains_atom(cs.h0, atoms::p(mu)) ||
        contains_atom(cs.h0, atoms::pi(mu)))
      throw UnsupportedError(
          "Hamiltonian depends on a constrained momentum: " +
          to_string(cs.h0, names));
  cs.hprime0 = atom(atoms::p0()) + cs.h0;
  return cs;
}

Expr poisson_bracket(const Expr& a, const Expr& b, const PhaseSpace& ps) {
  for (const Expr* e : {&a, &b})
    if (has_level_at_least(*e, 2))
      throw UnsupportedError(
          "Poisson bracket inputs must be phase-space expressions "
          "(chain levels 0-1 only)");
  std::vector<Expr> terms;
  for (int i = 1; i <= ps.size(); ++i) {
    const AtomId q0 = atoms::chain(i, 0), q1 = atoms::chain(i, 1);
    const AtomId p = atoms::p(i), pi = atoms::pi(i);
    terms.push_back(differentiate(a, q0) * differentiate(b, p));
    terms.push_back(-(differentiate(a, p) * differentiate(b, q0)));
    terms.push_back(differentiate(a, q1) * differentiate(b, pi));
    terms.push_back(-(differentiate(a, pi) * differentiate(b, q1)));
  }
  return sum(std::move(terms));
}

ConstraintClassification classify_and_check_integrability(
    const CanonicalSystem& cs) {
  ConstraintClassification out;
  std::vector<std::pair<std::string, Expr>> gens;
  gens.emplace_back("H'0", cs.hprime0);
  const NameTable& names = cs.sys.ps.names;
  for (int mu : cs.hessian.mu_indices)
    gens.emplace_back("H'p[" + names.coord(mu) + "]", cs.constraint_p(mu));
  for (int mu : cs.hessian.mu_indices)
    gens.emplace_back("H'pi[" + names.coord(mu) + "]", cs.constraint_pi(mu));

  std::map<AtomId, Expr> surface;
  for (int mu : cs.hessian.mu_indices) {
    surface[atoms::p(mu)] = -cs.h_p.at(mu);
    surface[atoms::pi(mu)] = -cs.h_pi.at(mu);
  }

  for (std::size_t x = 0; x < gens.size(); ++x) {
    for (std::size_t y = x + 1; y < gens.size(); ++y) {
      BracketEntry entry;
      entry.lhs = gens[x].first;
      entry.rhs = gens[y].first;
      entry.value = poisson_bracket(gens[x].second, gens[y].second, cs.sys.ps);
      entry.on_surface = substitute(entry.value, surface);
      out.brackets.push_back(std::move(entry));
    }
  }
  for (const auto& e : out.brackets) {
    if (!e.zero_on_surface()) {
      out.first_class = false;
      out.integrable = false;
    }
  }
  return out;
}

}  // namespace fwkb
