#include "fwkb/eval.hpp"

#include <cmath>

#include "fwkb/errors.hpp"

namespace fwkb {

namespace {

constexpr double kImagTol = 0.0;  // exact: i only enters through the atom

struct Evaluator {
  const Assignment& assignment;
  const NameTable& names;
  bool allow_imag;

  std::complex<double> eval(const Expr& e) const {
    switch (e.kind()) {
      case Kind::Constant:
        return {to_double(e.constant_value()), 0.0};
      case Kind::Atom: {
        const AtomId& a = e.atom_id();
        if (a == atoms::imag()) {
          if (!allow_imag)
            throw EvalError("imaginary unit in real-valued evaluation");
          return {0.0, 1.0};
        }
        auto it = assignment.find(a);
        if (it == assignment.end())
          throw EvalError("unbound atom " + atom_name(a, names));
        return {it->second, 0.0};
      }
      case Kind::Sum: {
        std::complex<double> acc = 0.0;
        for (const auto& k : e.kids()) acc += eval(k);
        return acc;
      }
      case Kind::Product: {
        std::complex<double> acc = 1.0;
        for (const auto& k : e.kids()) acc *= eval(k);
        return acc;
      }
      case Kind::Power:
        return eval_power(e);
      case Kind::Sin:
        return std::sin(eval(e.arg()));
      case Kind::Cos:
        return std::cos(eval(e.arg()));
      case Kind::Asin: {
        std::complex<double> u = eval(e.arg());
        if (u.imag() == kImagTol) {
          if (std::abs(u.real()) > 1.0)
            throw EvalDomainError("asin argument outside [-1, 1]");
          return {std::asin(u.real()), 0.0};
        }
        return std::asin(u);
      }
    }
    return 0.0;
  }

  std::complex<double> eval_power(const Expr& e) const {
    const std::complex<double> b = eval(e.base());
    const Rational& x = e.exponent();
    if (is_integer(x)) {
      long n = to_long(x);
      if (b == std::complex<double>(0.0, 0.0) && n < 0)
        throw EvalDomainError("division by zero");
      std::complex<double> acc = 1.0;
      long m = n < 0 ? -n : n;
      std::complex<double> base = b;
      while (m > 0) {
        if (m & 1) acc *= base;
        base *= base;
        m >>= 1;
      }
      return n < 0 ? 1.0 / acc : acc;
    }
    // Fractional power: real nonnegative base required.
    if (b.imag() != 0.0)
      throw EvalDomainError("fractional power of a complex base");
    double br = b.real();
    if (br < 0.0)
      throw EvalDomainError("negative radicand under a fractional power");
    if (br == 0.0 && x < 0) throw EvalDomainError("division by zero");
    return {std::pow(br, to_double(x)), 0.0};
  }
};

}  // namespace

double eval_numeric(const Expr& e, const Assignment& a,
                    const NameTable& names) {
  return Evaluator{a, names, /*allow_imag=*/false}.eval(e).real();
}

std::complex<double> eval_complex(const Expr& e, const Assignment& a,
                                  const NameTable& names) {
  return Evaluator{a, names, /*allow_imag=*/true}.eval(e);
}

}  // namespace fwkb
