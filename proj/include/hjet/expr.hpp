#ifndef HJET_EXPR_HPP
#define HJET_EXPR_HPP

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "hjet/number.hpp"
#include "hjet/symbol.hpp"

namespace hjet {

enum class ExprKind { kConstant, kSymbol, kSum, kProduct, kPower, kFunc };
enum class FuncKind { kSin, kCos, kExp, kLog };

class Expr;
struct ExprNode;

/// Immutable symbolic expression. Every constructor normalizes, so any
/// two Exprs that are equal as polynomials in their atoms (symbols,
/// function applications, non-expandable powers) compare structurally
/// equal. Safe to share and send across threads.
///
/// Normal form: a flattened sum of terms, each term a rational-or-float
/// coefficient times a sorted list of atom^exponent factors. Products
/// distribute over sums, positive integer powers of sums expand, like
/// terms and like factors collect, constant subtrees fold (exact
/// rationals until a float enters). Everything else (function
/// applications, fractional or negative powers of compound bases) is
/// kept as an opaque atom. Unary negation folds into the coefficient;
/// quotients become negative powers.
class Expr {
 public:
  Expr();  // the constant 0

  ExprKind kind() const;
  const Number& value() const;          // kConstant
  const Symbol& symbol() const;         // kSymbol
  FuncKind func() const;                // kFunc
  const Rational& exponent() const;     // kPower
  const std::vector<Expr>& children() const;
  const Expr& base() const;             // kPower
  const Expr& arg() const;              // kFunc

  bool is_constant() const { return kind() == ExprKind::kConstant; }

  friend bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }
  friend bool operator!=(const Expr& a, const Expr& b) { return compare(a, b) != 0; }

  /// Total structural order (used for canonical child ordering).
  static int compare(const Expr& a, const Expr& b);

  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  const ExprNode& node() const { return *node_; }

 private:
  std::shared_ptr<const ExprNode> node_;
};

// Constructors. All return normalized expressions.
Expr constant(Number v);
Expr constant(Rational v);
Expr constant(std::int64_t v);
Expr constant(double v);
Expr sym(Symbol s);
Expr add(std::vector<Expr> parts);
Expr mul(std::vector<Expr> parts);
Expr pow(Expr base, Rational exponent);
Expr neg(Expr e);
Expr divide(Expr num, Expr den);
Expr apply(FuncKind fn, Expr arg);
Expr sin(Expr e);
Expr cos(Expr e);
Expr exp(Expr e);
Expr log(Expr e);
Expr sqrt(Expr e);

inline Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
inline Expr operator-(const Expr& a, const Expr& b) { return add({a, neg(b)}); }
inline Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
inline Expr operator/(const Expr& a, const Expr& b) { return divide(a, b); }
inline Expr operator-(const Expr& a) { return neg(a); }

/// Partial derivative treating all other symbols as independent.
Expr diff(const Expr& e, const Symbol& s);

/// Simultaneous substitution (single pass; a replacement may mention
/// other bound symbols without being re-substituted), then normalization.
using Bindings = std::map<std::string, Expr>;
Expr substitute(const Expr& e, const Bindings& bindings);

using EvalEnv = std::map<std::string, double>;
/// IEEE double evaluation, left to right over normalized children.
/// Throws UnboundSymbolError / NonFiniteError.
double eval(const Expr& e, const EvalEnv& env);

/// Sound, incomplete zero test: true only if the normal form is the
/// constant 0. No trig identities, no radical simplification.
bool is_proved_zero(const Expr& e);

/// Rebuilds the expression through the normalizing constructors.
/// Idempotent: normalize(normalize(e)) == normalize(e).
Expr normalize(const Expr& e);

std::set<Symbol> free_symbols(const Expr& e);
bool depends_on(const Expr& e, const Symbol& s);

/// Canonical infix form; re-parses (in a context containing the free
/// symbols) to a structurally equal expression.
std::string to_string(const Expr& e);

}  // namespace hjet

#endif  // HJET_EXPR_HPP
