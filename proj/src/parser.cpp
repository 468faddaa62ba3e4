#include "hjet/parser.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <optional>

namespace hjet {

namespace {

enum class Tok { kNumber, kIdent, kPlus, kMinus, kStar, kSlash, kCaret, kLParen, kRParen, kComma, kEnd };

struct Token {
  Tok type;
  std::size_t offset;
  std::string text;
  Number value{Rational(0)};
};

class Lexer {
 public:
  Lexer(const std::string& text, const SymbolTable& context) : text_(text), context_(context) {
    advance();
  }

  const Token& current() const { return current_; }

  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    current_.offset = pos_;
    if (pos_ >= text_.size()) {
      current_.type = Tok::kEnd;
      current_.text.clear();
      return;
    }
    char c = text_[pos_];
    switch (c) {
      case '+': current_.type = Tok::kPlus; ++pos_; return;
      case '-': current_.type = Tok::kMinus; ++pos_; return;
      case '*': current_.type = Tok::kStar; ++pos_; return;
      case '/': current_.type = Tok::kSlash; ++pos_; return;
      case '^': current_.type = Tok::kCaret; ++pos_; return;
      case '(': current_.type = Tok::kLParen; ++pos_; return;
      case ')': current_.type = Tok::kRParen; ++pos_; return;
      case ',': current_.type = Tok::kComma; ++pos_; return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      lex_ident();
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

 private:
  void lex_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    bool is_float = false;
    if (pos_ + 1 < text_.size() && text_[pos_] == '.' &&
        std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
      is_float = true;
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t probe = pos_ + 1;
      if (probe < text_.size() && (text_[probe] == '+' || text_[probe] == '-')) ++probe;
      if (probe < text_.size() && std::isdigit(static_cast<unsigned char>(text_[probe]))) {
        is_float = true;
        pos_ = probe;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    std::string lit = text_.substr(start, pos_ - start);
    current_.type = Tok::kNumber;
    current_.text = lit;
    if (is_float) {
      current_.value = Number(std::strtod(lit.c_str(), nullptr));
    } else {
      errno = 0;
      char* end = nullptr;
      long long v = std::strtoll(lit.c_str(), &end, 10);
      if (errno != 0) throw ParseError("integer literal out of range", start);
      current_.value = Number(Rational(v));
    }
  }

  void lex_ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);
    // Momentum-name suffix: ident '.' digits, accepted when declared.
    if (pos_ < text_.size() && text_[pos_] == '.') {
      std::size_t probe = pos_ + 1;
      while (probe < text_.size() && std::isdigit(static_cast<unsigned char>(text_[probe]))) ++probe;
      if (probe > pos_ + 1) {
        std::string full = text_.substr(start, probe - start);
        if (context_.contains(full)) {
          name = full;
          pos_ = probe;
        }
      }
    }
    current_.type = Tok::kIdent;
    current_.text = name;
  }

  const std::string& text_;
  const SymbolTable& context_;
  std::size_t pos_ = 0;
  Token current_;
};

bool is_function_name(const std::string& s) {
  return s == "sin" || s == "cos" || s == "exp" || s == "log" || s == "sqrt";
}

class Parser {
 public:
  Parser(const std::string& text, const SymbolTable& context)
      : lexer_(text, context), context_(context) {}

  Expr parse() {
    Expr e = parse_sum();
    if (lexer_.current().type != Tok::kEnd)
      throw ParseError("unexpected trailing input", lexer_.current().offset);
    return e;
  }

 private:
  Expr parse_sum() {
    std::vector<Expr> parts{parse_term()};
    while (true) {
      Tok t = lexer_.current().type;
      if (t == Tok::kPlus) {
        lexer_.advance();
        parts.push_back(parse_term());
      } else if (t == Tok::kMinus) {
        lexer_.advance();
        parts.push_back(neg(parse_term()));
      } else {
        break;
      }
    }
    return add(std::move(parts));
  }

  Expr parse_term() {
    Expr e = parse_unary();
    while (true) {
      Tok t = lexer_.current().type;
      if (t == Tok::kStar) {
        lexer_.advance();
        e = mul({e, parse_unary()});
      } else if (t == Tok::kSlash) {
        std::size_t off = lexer_.current().offset;
        lexer_.advance();
        e = checked_divide(e, parse_unary(), off);
      } else {
        break;
      }
    }
    return e;
  }

  Expr parse_unary() {
    if (lexer_.current().type == Tok::kMinus) {
      lexer_.advance();
      return neg(parse_unary());
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (lexer_.current().type != Tok::kCaret) return base;
    std::size_t off = lexer_.current().offset;
    lexer_.advance();
    Expr exponent = parse_unary();  // right-associative, allows x^-2
    Rational r = exponent_value(exponent, off);
    try {
      return pow(std::move(base), r);
    } catch (const DomainError& err) {
      throw ParseError(err.what(), off);
    }
  }

  Expr parse_primary() {
    const Token& tok = lexer_.current();
    switch (tok.type) {
      case Tok::kNumber: {
        Expr e = constant(tok.value);
        lexer_.advance();
        return e;
      }
      case Tok::kIdent: {
        std::string name = tok.text;
        std::size_t off = tok.offset;
        lexer_.advance();
        if (lexer_.current().type == Tok::kLParen) {
          if (!is_function_name(name))
            throw ParseError("unknown function: " + name, off);
          lexer_.advance();
          Expr arg = parse_sum();
          if (lexer_.current().type == Tok::kComma)
            throw ParseError(name + " takes exactly one argument", lexer_.current().offset);
          expect(Tok::kRParen, "expected ')'");
          return make_call(name, std::move(arg), off);
        }
        if (!context_.contains(name))
          throw ParseError("unknown identifier: " + name, off);
        return sym(context_.get(name));
      }
      case Tok::kLParen: {
        lexer_.advance();
        Expr e = parse_sum();
        expect(Tok::kRParen, "expected ')'");
        return e;
      }
      case Tok::kEnd:
        throw ParseError("unexpected end of input", tok.offset);
      default:
        throw ParseError("unexpected token", tok.offset);
    }
  }

  Expr make_call(const std::string& name, Expr arg, std::size_t off) {
    try {
      if (name == "sin") return sin(std::move(arg));
      if (name == "cos") return cos(std::move(arg));
      if (name == "exp") return exp(std::move(arg));
      if (name == "log") return log(std::move(arg));
      return sqrt(std::move(arg));
    } catch (const DomainError& err) {
      throw ParseError(err.what(), off);
    }
  }

  Expr checked_divide(Expr num, Expr den, std::size_t off) {
    try {
      return divide(std::move(num), std::move(den));
    } catch (const DomainError& err) {
      throw ParseError(err.what(), off);
    }
  }

  Rational exponent_value(const Expr& e, std::size_t off) {
    if (e.kind() != ExprKind::kConstant)
      throw ParseError("exponent must be an integer or rational constant", off);
    const Number& v = e.value();
    if (v.exact()) return v.rational();
    // Doubles are dyadic rationals; accept when exactly representable.
    double x = v.to_double();
    std::int64_t den = 1;
    for (int i = 0; i < 62 && x != std::floor(x); ++i) {
      x *= 2;
      den <<= 1;
    }
    if (x != std::floor(x) || std::abs(x) > 9.0e18)
      throw ParseError("exponent must be an integer or rational constant", off);
    return Rational(static_cast<std::int64_t>(x), den);
  }

  void expect(Tok t, const char* message) {
    if (lexer_.current().type != t) throw ParseError(message, lexer_.current().offset);
    lexer_.advance();
  }

  Lexer lexer_;
  const SymbolTable& context_;
};

}  // namespace

Expr parse_expr(const std::string& text, const SymbolTable& context) {
  return Parser(text, context).parse();
}

}  // namespace hjet
