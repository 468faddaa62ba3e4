#include "hjet/expr.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace hjet {

struct ExprNode {
  ExprKind kind = ExprKind::kConstant;
  Number value;
  Symbol symbol;
  FuncKind fn = FuncKind::kSin;
  Rational exponent{1};
  std::vector<Expr> children;
};

namespace {

Expr make_node(ExprNode node) {
  return Expr(std::make_shared<const ExprNode>(std::move(node)));
}

const Expr& zero_expr() {
  static const Expr z = [] {
    ExprNode n;
    n.kind = ExprKind::kConstant;
    n.value = Number(Rational(0));
    return make_node(std::move(n));
  }();
  return z;
}

int kind_rank(ExprKind k) {
  switch (k) {
    case ExprKind::kConstant: return 0;
    case ExprKind::kSymbol: return 1;
    case ExprKind::kFunc: return 2;
    case ExprKind::kPower: return 3;
    case ExprKind::kSum: return 4;
    case ExprKind::kProduct: return 5;
  }
  return 6;
}

}  // namespace

Expr::Expr() : node_(zero_expr().node_) {}

ExprKind Expr::kind() const { return node_->kind; }
const Number& Expr::value() const { return node_->value; }
const Symbol& Expr::symbol() const { return node_->symbol; }
FuncKind Expr::func() const { return node_->fn; }
const Rational& Expr::exponent() const { return node_->exponent; }
const std::vector<Expr>& Expr::children() const { return node_->children; }
const Expr& Expr::base() const { return node_->children[0]; }
const Expr& Expr::arg() const { return node_->children[0]; }

int Expr::compare(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return 0;
  int ra = kind_rank(a.kind());
  int rb = kind_rank(b.kind());
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (a.kind()) {
    case ExprKind::kConstant:
      return Number::compare(a.value(), b.value());
    case ExprKind::kSymbol:
      return a.symbol().name().compare(b.symbol().name());
    case ExprKind::kFunc: {
      if (a.func() != b.func())
        return static_cast<int>(a.func()) < static_cast<int>(b.func()) ? -1 : 1;
      return compare(a.arg(), b.arg());
    }
    case ExprKind::kPower: {
      int c = compare(a.base(), b.base());
      if (c != 0) return c;
      return Rational::compare(a.exponent(), b.exponent());
    }
    case ExprKind::kSum:
    case ExprKind::kProduct: {
      const auto& ca = a.children();
      const auto& cb = b.children();
      size_t n = std::min(ca.size(), cb.size());
      for (size_t i = 0; i < n; ++i) {
        int c = compare(ca[i], cb[i]);
        if (c != 0) return c;
      }
      if (ca.size() != cb.size()) return ca.size() < cb.size() ? -1 : 1;
      return 0;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Normalizing constructors
// ---------------------------------------------------------------------------

namespace {

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return Expr::compare(a, b) < 0; }
};

// A term is coefficient * product of (atom ^ exponent), factors sorted by
// atom. Product nodes always store [optional constant] ++ factor exprs in
// this order, so decomposition is positional.
using Factor = std::pair<Expr, Rational>;
using FactorList = std::vector<Factor>;

struct FactorListLess {
  bool operator()(const FactorList& a, const FactorList& b) const {
    size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) {
      int c = Expr::compare(a[i].first, b[i].first);
      if (c != 0) return c < 0;
      c = Rational::compare(a[i].second, b[i].second);
      if (c != 0) return c < 0;
    }
    return a.size() < b.size();
  }
};

std::pair<Number, FactorList> decompose_term(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::kConstant:
      return {e.value(), {}};
    case ExprKind::kPower:
      return {Number(Rational(1)), {{e.base(), e.exponent()}}};
    case ExprKind::kProduct: {
      Number coeff{Rational(1)};
      FactorList factors;
      for (const Expr& c : e.children()) {
        if (c.kind() == ExprKind::kConstant) {
          coeff = Number::mul(coeff, c.value());
        } else if (c.kind() == ExprKind::kPower) {
          factors.emplace_back(c.base(), c.exponent());
        } else {
          factors.emplace_back(c, Rational(1));
        }
      }
      return {coeff, std::move(factors)};
    }
    default:
      return {Number(Rational(1)), {{e, Rational(1)}}};
  }
}

Expr rebuild_term(const Number& coeff, const FactorList& factors) {
  if (coeff.is_zero()) return zero_expr();
  if (factors.empty()) return constant(coeff);
  std::vector<Expr> kids;
  kids.reserve(factors.size() + 1);
  if (!coeff.is_one()) kids.push_back(constant(coeff));
  for (const auto& [atom, exp] : factors) {
    if (exp.is_one()) {
      kids.push_back(atom);
    } else {
      ExprNode p;
      p.kind = ExprKind::kPower;
      p.exponent = exp;
      p.children = {atom};
      kids.push_back(make_node(std::move(p)));
    }
  }
  if (kids.size() == 1) return kids[0];
  ExprNode n;
  n.kind = ExprKind::kProduct;
  n.children = std::move(kids);
  return make_node(std::move(n));
}

Rational add_exponents(const Rational& a, const Rational& b) {
  auto r = Rational::add(a, b);
  if (!r) throw DomainError("exponent overflow");
  return *r;
}

bool is_expandable(const Expr& atom, const Rational& exp) {
  return atom.kind() == ExprKind::kSum && exp.is_integer() && exp.num() > 0;
}

Expr multiply_by_sum(const Expr& a, const Expr& s);

}  // namespace

Expr constant(Number v) {
  ExprNode n;
  n.kind = ExprKind::kConstant;
  n.value = v;
  return make_node(std::move(n));
}
Expr constant(Rational v) { return constant(Number(v)); }
Expr constant(std::int64_t v) { return constant(Number(Rational(v))); }
Expr constant(double v) { return constant(Number(v)); }

Expr sym(Symbol s) {
  ExprNode n;
  n.kind = ExprKind::kSymbol;
  n.symbol = std::move(s);
  return make_node(std::move(n));
}

Expr add(std::vector<Expr> parts) {
  std::map<FactorList, Number, FactorListLess> terms;
  std::vector<Expr> flat;
  for (Expr& p : parts) {
    if (p.kind() == ExprKind::kSum) {
      for (const Expr& c : p.children()) flat.push_back(c);
    } else {
      flat.push_back(std::move(p));
    }
  }
  for (const Expr& t : flat) {
    auto [coeff, factors] = decompose_term(t);
    auto it = terms.find(factors);
    if (it == terms.end()) {
      if (!coeff.is_zero()) terms.emplace(std::move(factors), coeff);
    } else {
      it->second = Number::add(it->second, coeff);
      if (it->second.is_zero()) terms.erase(it);
    }
  }
  if (terms.empty()) return zero_expr();
  std::vector<Expr> kids;
  kids.reserve(terms.size());
  for (const auto& [factors, coeff] : terms) kids.push_back(rebuild_term(coeff, factors));
  if (kids.size() == 1) return kids[0];
  ExprNode n;
  n.kind = ExprKind::kSum;
  n.children = std::move(kids);
  return make_node(std::move(n));
}

Expr mul(std::vector<Expr> parts) {
  Number coeff{Rational(1)};
  std::map<Expr, Rational, ExprLess> fmap;
  std::vector<Expr> flat;
  for (Expr& p : parts) {
    if (p.kind() == ExprKind::kProduct) {
      for (const Expr& c : p.children()) flat.push_back(c);
    } else {
      flat.push_back(std::move(p));
    }
  }
  for (const Expr& f : flat) {
    switch (f.kind()) {
      case ExprKind::kConstant:
        coeff = Number::mul(coeff, f.value());
        break;
      case ExprKind::kPower: {
        auto [it, inserted] = fmap.emplace(f.base(), f.exponent());
        if (!inserted) it->second = add_exponents(it->second, f.exponent());
        break;
      }
      default: {
        auto [it, inserted] = fmap.emplace(f, Rational(1));
        if (!inserted) it->second = add_exponents(it->second, Rational(1));
        break;
      }
    }
  }
  if (coeff.is_zero()) return zero_expr();

  FactorList factors;
  std::vector<std::pair<Expr, std::int64_t>> expand;
  for (auto& [atom, exp] : fmap) {
    if (exp.is_zero()) continue;
    if (is_expandable(atom, exp)) {
      expand.emplace_back(atom, exp.num());
      continue;
    }
    if (atom.kind() == ExprKind::kConstant) {
      if (auto folded = Number::pow(atom.value(), exp)) {
        coeff = Number::mul(coeff, *folded);
        continue;
      }
    }
    factors.emplace_back(atom, exp);
  }
  if (coeff.is_zero()) return zero_expr();
  Expr acc = rebuild_term(coeff, factors);
  for (const auto& [sum, n] : expand) {
    for (std::int64_t i = 0; i < n; ++i) acc = multiply_by_sum(acc, sum);
  }
  return acc;
}

namespace {

Expr multiply_by_sum(const Expr& a, const Expr& s) {
  const std::vector<Expr> a_terms =
      a.kind() == ExprKind::kSum ? a.children() : std::vector<Expr>{a};
  const std::vector<Expr> s_terms =
      s.kind() == ExprKind::kSum ? s.children() : std::vector<Expr>{s};
  std::vector<Expr> out;
  out.reserve(a_terms.size() * s_terms.size());
  for (const Expr& ta : a_terms)
    for (const Expr& ts : s_terms) out.push_back(mul({ta, ts}));
  return add(std::move(out));
}

}  // namespace

Expr pow(Expr base, Rational exponent) {
  if (exponent.is_zero()) return constant(std::int64_t{1});
  if (exponent.is_one()) return base;
  switch (base.kind()) {
    case ExprKind::kConstant: {
      if (auto folded = Number::pow(base.value(), exponent)) return constant(*folded);
      break;  // e.g. 2^(1/2): kept symbolic
    }
    case ExprKind::kPower: {
      // (b^r)^n == b^(r*n) for integer n; fractional outer exponents on a
      // power base are kept nested (branch issues otherwise).
      if (exponent.is_integer()) {
        auto r = Rational::mul(base.exponent(), exponent);
        if (!r) throw DomainError("exponent overflow");
        return pow(base.base(), *r);
      }
      break;
    }
    case ExprKind::kProduct: {
      if (exponent.is_integer()) {
        std::vector<Expr> kids;
        kids.reserve(base.children().size());
        for (const Expr& c : base.children()) kids.push_back(pow(c, exponent));
        return mul(std::move(kids));
      }
      break;
    }
    case ExprKind::kSum: {
      if (exponent.is_integer() && exponent.num() > 0) {
        if (exponent.num() > 32) throw DomainError("sum power too large to expand");
        Expr acc = constant(std::int64_t{1});
        for (std::int64_t i = 0; i < exponent.num(); ++i) acc = multiply_by_sum(acc, base);
        return acc;
      }
      break;
    }
    default:
      break;
  }
  ExprNode n;
  n.kind = ExprKind::kPower;
  n.exponent = exponent;
  n.children = {std::move(base)};
  return make_node(std::move(n));
}

Expr neg(Expr e) { return mul({constant(std::int64_t{-1}), std::move(e)}); }

Expr divide(Expr num, Expr den) { return mul({std::move(num), pow(std::move(den), Rational(-1))}); }

Expr apply(FuncKind fn, Expr arg) {
  if (arg.kind() == ExprKind::kConstant) {
    const Number& v = arg.value();
    if (v.exact()) {
      if (v.is_zero()) {
        switch (fn) {
          case FuncKind::kSin: return constant(std::int64_t{0});
          case FuncKind::kCos: return constant(std::int64_t{1});
          case FuncKind::kExp: return constant(std::int64_t{1});
          case FuncKind::kLog: break;  // log 0: kept, surfaces at eval
        }
      } else if (v.is_one() && fn == FuncKind::kLog) {
        return constant(std::int64_t{0});
      }
    } else {
      double x = v.to_double();
      double y = 0;
      switch (fn) {
        case FuncKind::kSin: y = std::sin(x); break;
        case FuncKind::kCos: y = std::cos(x); break;
        case FuncKind::kExp: y = std::exp(x); break;
        case FuncKind::kLog: y = std::log(x); break;
      }
      if (std::isfinite(y)) return constant(y);
      // Out-of-domain constants stay symbolic; eval reports them.
    }
  }
  ExprNode n;
  n.kind = ExprKind::kFunc;
  n.fn = fn;
  n.children = {std::move(arg)};
  return make_node(std::move(n));
}

Expr sin(Expr e) { return apply(FuncKind::kSin, std::move(e)); }
Expr cos(Expr e) { return apply(FuncKind::kCos, std::move(e)); }
Expr exp(Expr e) { return apply(FuncKind::kExp, std::move(e)); }
Expr log(Expr e) { return apply(FuncKind::kLog, std::move(e)); }
Expr sqrt(Expr e) { return pow(std::move(e), Rational(1, 2)); }

// ---------------------------------------------------------------------------
// Calculus and evaluation
// ---------------------------------------------------------------------------

Expr diff(const Expr& e, const Symbol& s) {
  switch (e.kind()) {
    case ExprKind::kConstant:
      return zero_expr();
    case ExprKind::kSymbol:
      return e.symbol() == s ? constant(std::int64_t{1}) : zero_expr();
    case ExprKind::kSum: {
      std::vector<Expr> parts;
      parts.reserve(e.children().size());
      for (const Expr& c : e.children()) parts.push_back(diff(c, s));
      return add(std::move(parts));
    }
    case ExprKind::kProduct: {
      const auto& kids = e.children();
      std::vector<Expr> parts;
      for (size_t i = 0; i < kids.size(); ++i) {
        if (kids[i].kind() == ExprKind::kConstant) continue;
        std::vector<Expr> prod;
        prod.reserve(kids.size());
        for (size_t j = 0; j < kids.size(); ++j)
          prod.push_back(i == j ? diff(kids[j], s) : kids[j]);
        parts.push_back(mul(std::move(prod)));
      }
      return add(std::move(parts));
    }
    case ExprKind::kPower: {
      auto down = Rational::add(e.exponent(), Rational(-1));
      if (!down) throw DomainError("exponent overflow");
      return mul({constant(e.exponent()), pow(e.base(), *down), diff(e.base(), s)});
    }
    case ExprKind::kFunc: {
      Expr inner = diff(e.arg(), s);
      switch (e.func()) {
        case FuncKind::kSin: return mul({cos(e.arg()), inner});
        case FuncKind::kCos: return mul({constant(std::int64_t{-1}), sin(e.arg()), inner});
        case FuncKind::kExp: return mul({exp(e.arg()), inner});
        case FuncKind::kLog: return mul({pow(e.arg(), Rational(-1)), inner});
      }
    }
  }
  return zero_expr();
}

Expr substitute(const Expr& e, const Bindings& bindings) {
  switch (e.kind()) {
    case ExprKind::kConstant:
      return e;
    case ExprKind::kSymbol: {
      auto it = bindings.find(e.symbol().name());
      return it == bindings.end() ? e : it->second;
    }
    case ExprKind::kSum: {
      std::vector<Expr> kids;
      kids.reserve(e.children().size());
      for (const Expr& c : e.children()) kids.push_back(substitute(c, bindings));
      return add(std::move(kids));
    }
    case ExprKind::kProduct: {
      std::vector<Expr> kids;
      kids.reserve(e.children().size());
      for (const Expr& c : e.children()) kids.push_back(substitute(c, bindings));
      return mul(std::move(kids));
    }
    case ExprKind::kPower:
      return pow(substitute(e.base(), bindings), e.exponent());
    case ExprKind::kFunc:
      return apply(e.func(), substitute(e.arg(), bindings));
  }
  return e;
}

namespace {

double eval_pow(double base, const Rational& r) {
  if (r.is_integer()) {
    std::int64_t n = r.num();
    bool invert = n < 0;
    if (invert) n = -n;
    double acc = 1.0;
    double b = base;
    while (n > 0) {
      if (n & 1) acc *= b;
      n >>= 1;
      if (n) b *= b;
    }
    return invert ? 1.0 / acc : acc;
  }
  return std::pow(base, r.to_double());
}

}  // namespace

double eval(const Expr& e, const EvalEnv& env) {
  double result = 0;
  switch (e.kind()) {
    case ExprKind::kConstant:
      return e.value().to_double();
    case ExprKind::kSymbol: {
      auto it = env.find(e.symbol().name());
      if (it == env.end()) throw UnboundSymbolError("unbound symbol: " + e.symbol().name());
      return it->second;
    }
    case ExprKind::kSum: {
      result = 0;
      for (const Expr& c : e.children()) result += eval(c, env);
      break;
    }
    case ExprKind::kProduct: {
      result = 1;
      for (const Expr& c : e.children()) result *= eval(c, env);
      break;
    }
    case ExprKind::kPower:
      result = eval_pow(eval(e.base(), env), e.exponent());
      break;
    case ExprKind::kFunc: {
      double x = eval(e.arg(), env);
      switch (e.func()) {
        case FuncKind::kSin: result = std::sin(x); break;
        case FuncKind::kCos: result = std::cos(x); break;
        case FuncKind::kExp: result = std::exp(x); break;
        case FuncKind::kLog: result = std::log(x); break;
      }
      break;
    }
  }
  if (!std::isfinite(result))
    throw NonFiniteError("non-finite result evaluating " + to_string(e));
  return result;
}

bool is_proved_zero(const Expr& e) {
  return e.kind() == ExprKind::kConstant && e.value().is_zero();
}

Expr normalize(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::kConstant:
    case ExprKind::kSymbol:
      return e;
    case ExprKind::kSum: {
      std::vector<Expr> kids;
      for (const Expr& c : e.children()) kids.push_back(normalize(c));
      return add(std::move(kids));
    }
    case ExprKind::kProduct: {
      std::vector<Expr> kids;
      for (const Expr& c : e.children()) kids.push_back(normalize(c));
      return mul(std::move(kids));
    }
    case ExprKind::kPower:
      return pow(normalize(e.base()), e.exponent());
    case ExprKind::kFunc:
      return apply(e.func(), normalize(e.arg()));
  }
  return e;
}

namespace {

void collect_symbols(const Expr& e, std::set<Symbol>& out) {
  switch (e.kind()) {
    case ExprKind::kSymbol:
      out.insert(e.symbol());
      return;
    case ExprKind::kConstant:
      return;
    default:
      for (const Expr& c : e.children()) collect_symbols(c, out);
  }
}

}  // namespace

std::set<Symbol> free_symbols(const Expr& e) {
  std::set<Symbol> out;
  collect_symbols(e, out);
  return out;
}

bool depends_on(const Expr& e, const Symbol& s) {
  switch (e.kind()) {
    case ExprKind::kSymbol:
      return e.symbol() == s;
    case ExprKind::kConstant:
      return false;
    default:
      for (const Expr& c : e.children())
        if (depends_on(c, s)) return true;
      return false;
  }
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {

const char* func_name(FuncKind fn) {
  switch (fn) {
    case FuncKind::kSin: return "sin";
    case FuncKind::kCos: return "cos";
    case FuncKind::kExp: return "exp";
    case FuncKind::kLog: return "log";
  }
  return "?";
}

std::string print_expr(const Expr& e);

std::string print_base(const Expr& e) {
  bool parens = false;
  switch (e.kind()) {
    case ExprKind::kSum:
    case ExprKind::kProduct:
    case ExprKind::kPower:
      parens = true;
      break;
    case ExprKind::kConstant:
      parens = e.value().is_negative() || (e.value().exact() && !e.value().rational().is_integer()) ||
               !e.value().exact();
      break;
    default:
      break;
  }
  std::string s = print_expr(e);
  return parens ? "(" + s + ")" : s;
}

std::string print_factor(const Expr& atom, const Rational& exp) {
  if (exp.is_one()) {
    return atom.kind() == ExprKind::kSum ? "(" + print_expr(atom) + ")" : print_expr(atom);
  }
  if (exp == Rational(1, 2)) return "sqrt(" + print_expr(atom) + ")";
  std::string es = exp.is_integer() ? std::to_string(exp.num()) : "(" + exp.str() + ")";
  return print_base(atom) + "^" + es;
}

// |coeff| * positive-exponent factors / negative-exponent factors
std::string print_term_magnitude(const Number& coeff, const FactorList& factors) {
  Number mag = coeff.is_negative() ? coeff.negated() : coeff;
  std::vector<std::string> nums;
  std::vector<std::string> dens;
  for (const auto& [atom, exp] : factors) {
    if (exp.is_negative()) {
      dens.push_back(print_factor(atom, exp.negated()));
    } else {
      nums.push_back(print_factor(atom, exp));
    }
  }
  std::string s;
  if (!mag.is_one() || nums.empty()) s = mag.str();
  for (const std::string& f : nums) {
    if (!s.empty()) s += "*";
    s += f;
  }
  for (const std::string& f : dens) s += "/" + f;
  return s;
}

std::string print_expr(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::kConstant:
      return e.value().str();
    case ExprKind::kSymbol:
      return e.symbol().name();
    case ExprKind::kFunc:
      return std::string(func_name(e.func())) + "(" + print_expr(e.arg()) + ")";
    case ExprKind::kPower: {
      if (!e.exponent().is_negative()) return print_factor(e.base(), e.exponent());
      auto [coeff, factors] = decompose_term(e);
      return print_term_magnitude(coeff, factors);  // 1/(...)
    }
    case ExprKind::kProduct: {
      auto [coeff, factors] = decompose_term(e);
      std::string s = print_term_magnitude(coeff, factors);
      return coeff.is_negative() ? "-" + s : s;
    }
    case ExprKind::kSum: {
      std::string s;
      bool first = true;
      for (const Expr& t : e.children()) {
        auto [coeff, factors] = decompose_term(t);
        std::string body = print_term_magnitude(coeff, factors);
        if (first) {
          s = coeff.is_negative() ? "-" + body : body;
          first = false;
        } else {
          s += coeff.is_negative() ? " - " + body : " + " + body;
        }
      }
      return s;
    }
  }
  return "0";
}

}  // namespace

std::string to_string(const Expr& e) { return print_expr(e); }

}  // namespace hjet
