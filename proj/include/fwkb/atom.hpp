#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "fwkb/errors.hpp"

namespace fwkb {

/// Atom roles, in the fixed total order used for canonical forms.
enum class Role : std::uint8_t {
  ChainVar,   // D0[q_i] .. D3[q_i], level = chain depth
  MomP,       // p_i, conjugate to D0[q_i]
  MomPi,      // pi_i, conjugate to D1[q_i]
  MomP0,      // p0, conjugate to t
  Time,       // t
  EnergyE,    // separation constant E_a
  EnergyEp,   // separation constant E'_a
  Eta,        // trajectory constant eta_a
  Lambda,     // trajectory constant lambda_a
  ConstA,     // additive action constant A
  Hbar,       // hbar
  Imag,       // exact imaginary unit
};

/// One atom of the algebra. Exactly one AtomId exists per
/// (role, index, level) triple; atoms compare by this triple.
struct AtomId {
  Role role = Role::Time;
  std::int16_t index = 0;  // coordinate index (1-based) for indexed roles
  std::int16_t level = 0;  // chain level for ChainVar, 0 otherwise

  friend auto operator<=>(const AtomId&, const AtomId&) = default;
};

namespace atoms {

inline AtomId chain(int i, int level) {
  return {Role::ChainVar, static_cast<std::int16_t>(i),
          static_cast<std::int16_t>(level)};
}
inline AtomId p(int i) { return {Role::MomP, static_cast<std::int16_t>(i), 0}; }
inline AtomId pi(int i) {
  return {Role::MomPi, static_cast<std::int16_t>(i), 0};
}
inline AtomId p0() { return {Role::MomP0, 0, 0}; }
inline AtomId t() { return {Role::Time, 0, 0}; }
inline AtomId E(int i) {
  return {Role::EnergyE, static_cast<std::int16_t>(i), 0};
}
inline AtomId Ep(int i) {
  return {Role::EnergyEp, static_cast<std::int16_t>(i), 0};
}
inline AtomId eta(int i) {
  return {Role::Eta, static_cast<std::int16_t>(i), 0};
}
inline AtomId lambda(int i) {
  return {Role::Lambda, static_cast<std::int16_t>(i), 0};
}
inline AtomId A() { return {Role::ConstA, 0, 0}; }
inline AtomId hbar() { return {Role::Hbar, 0, 0}; }
inline AtomId imag() { return {Role::Imag, 0, 0}; }

inline bool is_momentum(const AtomId& a) {
  return a.role == Role::MomP || a.role == Role::MomPi ||
         a.role == Role::MomP0;
}
inline bool is_coordinate(const AtomId& a) { return a.role == Role::ChainVar; }

/// Coordinate a momentum differentiates along under quantization
/// (p_i -> D0[q_i], pi_i -> D1[q_i], p0 -> t).
inline AtomId conjugate_coordinate(const AtomId& m) {
  switch (m.role) {
    case Role::MomP:
      return chain(m.index, 0);
    case Role::MomPi:
      return chain(m.index, 1);
    case Role::MomP0:
      return t();
    default:
      throw Error("conjugate_coordinate: not a momentum atom");
  }
}

}  // namespace atoms

/// Coordinate names of one system, defining the index <-> name mapping
/// used by the parser and printer.
class NameTable {
 public:
  NameTable() = default;
  explicit NameTable(std::vector<std::string> coords)
      : coords_(std::move(coords)) {}

  int size() const { return static_cast<int>(coords_.size()); }

  const std::string& coord(int index) const {  // 1-based
    return coords_.at(static_cast<std::size_t>(index - 1));
  }

  /// 1-based index of a coordinate name, or 0 when unknown.
  int find(const std::string& name) const {
    for (std::size_t k = 0; k < coords_.size(); ++k)
      if (coords_[k] == name) return static_cast<int>(k + 1);
    return 0;
  }

  const std::vector<std::string>& all() const { return coords_; }

 private:
  std::vector<std::string> coords_;
};

/// Grammar-level name of an atom ("D1[q2]", "p[q]", "Ep[1]", "hbar", ...).
std::string atom_name(const AtomId& a, const NameTable& names);

}  // namespace fwkb
