#include "fwkb/parse.hpp"

#include <cctype>
#include <optional>
#include <vector>

#include "fwkb/errors.hpp"

namespace fwkb {

namespace {

enum class Tok {
  Number,
  Ident,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  LParen,
  RParen,
  LBracket,
  RBracket,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  Token next() {
    skip_space();
    const int line = line_, col = col_;
    if (pos_ >= src_.size()) return {Tok::End, "", line, col};
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return lex_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return lex_ident();
    advance();
    switch (c) {
      case '+':
        return {Tok::Plus, "+", line, col};
      case '-':
        return {Tok::Minus, "-", line, col};
      case '*':
        return {Tok::Star, "*", line, col};
      case '/':
        return {Tok::Slash, "/", line, col};
      case '^':
        return {Tok::Caret, "^", line, col};
      case '(':
        return {Tok::LParen, "(", line, col};
      case ')':
        return {Tok::RParen, ")", line, col};
      case '[':
        return {Tok::LBracket, "[", line, col};
      case ']':
        return {Tok::RBracket, "]", line, col};
      default:
        throw ParseError(std::string("unexpected character '") + c + "'",
                         line, col);
    }
  }

 private:
  void advance() {
    if (pos_ < src_.size()) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_space() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      advance();
  }

  Token lex_number() {
    const int line = line_, col = col_;
    std::string digits;
    while (pos_ < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      digits += src_[pos_];
      advance();
    }
    if (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '.' || c == 'e' || c == 'E')
        throw ParseError("non-rational numeric literal", line, col);
    }
    return {Tok::Number, digits, line, col};
  }

  Token lex_ident() {
    const int line = line_, col = col_;
    std::string name;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_')) {
      name += src_[pos_];
      advance();
    }
    return {Tok::Ident, name, line, col};
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(const std::string& src, const NameTable& names)
      : lexer_(src), names_(names) {
    current_ = lexer_.next();
  }

  Expr parse() {
    Expr e = parse_binding(0);
    if (current_.kind != Tok::End)
      throw ParseError("unexpected trailing input '" + current_.text + "'",
                       current_.line, current_.column);
    return e;
  }

 private:
  static int infix_binding(Tok k) {
    switch (k) {
      case Tok::Plus:
      case Tok::Minus:
        return 10;
      case Tok::Star:
      case Tok::Slash:
        return 20;
      case Tok::Caret:
        return 40;
      default:
        return 0;
    }
  }

  Token advance() {
    Token t = current_;
    current_ = lexer_.next();
    return t;
  }

  Token expect(Tok k, const std::string& what) {
    if (current_.kind != k)
      throw ParseError("expected " + what + ", found '" + current_.text + "'",
                       current_.line, current_.column);
    return advance();
  }

  Expr parse_binding(int min_bp) {
    Expr lhs = parse_prefix();
    while (true) {
      const int bp = infix_binding(current_.kind);
      if (bp == 0 || bp <= min_bp) break;
      const Token op = advance();
      // ^ is right-associative: recurse with bp-1.
      Expr rhs = parse_binding(op.kind == Tok::Caret ? bp - 1 : bp);
      switch (op.kind) {
        case Tok::Plus:
          lhs = lhs + rhs;
          break;
        case Tok::Minus:
          lhs = lhs - rhs;
          break;
        case Tok::Star:
          lhs = lhs * rhs;
          break;
        case Tok::Slash:
          lhs = lhs * checked_reciprocal(rhs, op);
          break;
        case Tok::Caret:
          lhs = checked_power(lhs, rhs, op);
          break;
        default:
          break;
      }
    }
    return lhs;
  }

  static Expr checked_reciprocal(const Expr& e, const Token& at) {
    if (e.is_zero()) throw ParseError("division by zero", at.line, at.column);
    return pow(e, -1);
  }

  static Expr checked_power(const Expr& base, const Expr& exponent,
                            const Token& at) {
    if (!exponent.is_constant())
      throw ParseError("exponent must be a rational constant", at.line,
                       at.column);
    const Rational& x = exponent.constant_value();
    const BigInt den = rat_den(x);
    if (den != 1 && den != 2 && den != 4)
      throw ParseError(
          "exponent must be an integer, half-integer or quarter-integer",
          at.line, at.column);
    if (rat_num(x) > 1024 || rat_num(x) < -1024)
      throw ParseError("exponent magnitude too large", at.line, at.column);
    if (base.is_zero() && x < 0)
      throw ParseError("division by zero", at.line, at.column);
    return pow(base, x);
  }

  Expr parse_prefix() {
    switch (current_.kind) {
      case Tok::Number: {
        Token t = advance();
        return constant(Rational(BigInt(t.text)));
      }
      case Tok::Minus: {
        advance();
        Expr operand = parse_binding(30);  // binds looser than ^ only
        return -operand;
      }
      case Tok::Plus: {
        advance();
        return parse_binding(30);
      }
      case Tok::LParen: {
        advance();
        Expr e = parse_binding(0);
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident:
        return parse_ident();
      default:
        throw ParseError("expected an expression, found '" + current_.text +
                             "'",
                         current_.line, current_.column);
    }
  }

  Expr parse_ident() {
    Token t = advance();
    const std::string& n = t.text;
    if (n == "sqrt" || n == "sin" || n == "cos" || n == "asin") {
      expect(Tok::LParen, "'(' after function name");
      Expr arg = parse_binding(0);
      expect(Tok::RParen, "')'");
      if (n == "sqrt") return sqrt(arg);
      if (n == "sin") return sin(arg);
      if (n == "cos") return cos(arg);
      return asin(arg);
    }
    if (n == "t") return atom(atoms::t());
    if (n == "p0") return atom(atoms::p0());
    if (n == "A") return atom(atoms::A());
    if (n == "hbar") return atom(atoms::hbar());
    if (n == "i") return atom(atoms::imag());
    if (n == "D0" || n == "D1" || n == "D2" || n == "D3") {
      int idx = bracketed_coordinate(t);
      return atom(atoms::chain(idx, n[1] - '0'));
    }
    if (n == "p") return atom(atoms::p(bracketed_coordinate(t)));
    if (n == "pi") return atom(atoms::pi(bracketed_coordinate(t)));
    if (n == "E" || n == "Ep" || n == "eta" || n == "lambda") {
      int idx = bracketed_index(t);
      if (n == "E") return atom(atoms::E(idx));
      if (n == "Ep") return atom(atoms::Ep(idx));
      if (n == "eta") return atom(atoms::eta(idx));
      return atom(atoms::lambda(idx));
    }
    throw ParseError("unknown atom name '" + n + "'", t.line, t.column);
  }

  int bracketed_coordinate(const Token& head) {
    expect(Tok::LBracket, "'[' after '" + head.text + "'");
    Token name = expect(Tok::Ident, "coordinate name");
    expect(Tok::RBracket, "']'");
    int idx = names_.find(name.text);
    if (idx == 0)
      throw ParseError("unknown coordinate '" + name.text + "'", name.line,
                       name.column);
    return idx;
  }

  int bracketed_index(const Token& head) {
    expect(Tok::LBracket, "'[' after '" + head.text + "'");
    Token num = expect(Tok::Number, "constant index");
    expect(Tok::RBracket, "']'");
    int idx = std::stoi(num.text);
    if (idx < 1)
      throw ParseError("constant index must be positive", num.line,
                       num.column);
    return idx;
  }

  Lexer lexer_;
  const NameTable& names_;
  Token current_;
};

}  // namespace

Expr parse_expr(const std::string& source, const NameTable& names) {
  return Parser(source, names).parse();
}

}  // namespace fwkb
