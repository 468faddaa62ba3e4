#ifndef HJET_JET_CONTEXT_HPP
#define HJET_JET_CONTEXT_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hjet/expr.hpp"
#include "hjet/multi_index.hpp"
#include "hjet/symbol.hpp"

namespace hjet {

/// Coordinate universe for an order-(k+1) field theory on n base
/// dimensions with m dependent variables:
///   x<i>                       base coordinates
///   u<a>, u<a>_<digits>        jet coordinates u^a_I, |I| <= 2k+2
///                              (digits = base indices of I, ascending)
///   P<a>_<digits>.<i>          momenta p^{I.i}_a, |I| <= k ("P1_.2" for
///                              empty I)
///   ubar<a>_<digits>           derivative-slot markers of the implicit
///                              Hamilton system, |I| = k+1
/// Jet tables are pre-generated to order 2k+2, the order of the
/// Euler-Lagrange equations. Immutable after construction; parameters
/// must be declared at construction time.
class JetContext {
 public:
  JetContext(int n, int m, int k, const std::vector<std::string>& parameters = {});

  int n() const { return n_; }
  int m() const { return m_; }
  int k() const { return k_; }

  const SymbolTable& symbols() const { return table_; }

  Symbol base(int i) const;                              // x^i
  Symbol jet(int alpha, const MultiIndex& I) const;      // u^alpha_I
  Symbol momentum(int alpha, const MultiIndex& I, int i) const;
  Symbol ubar(int alpha, const MultiIndex& I) const;     // |I| = k+1
  Symbol parameter(const std::string& name) const;
  const std::vector<Symbol>& parameters() const { return params_; }

  static std::string jet_name(int alpha, const MultiIndex& I);
  static std::string momentum_name(int alpha, const MultiIndex& I, int i);

  /// (alpha, I) for jet-coordinate symbols, nullopt otherwise.
  std::optional<std::pair<int, MultiIndex>> as_jet(const Symbol& s) const;
  bool is_momentum(const Symbol& s) const;

  /// Largest |I| over jet symbols of e (0 if none).
  int max_jet_order(const Expr& e) const;

  /// Total derivative D_i e = de/dx^i + sum u^alpha_{Ii} de/du^alpha_I.
  /// e may use jets of order <= 2k+1 and must not contain momenta.
  Expr total_derivative(const Expr& e, int i) const;
  /// D_I, applied index by index (order immaterial: D_i D_j = D_j D_i).
  Expr iterated_total_derivative(const Expr& e, const MultiIndex& I) const;

 private:
  int n_, m_, k_;
  SymbolTable table_;
  std::vector<Symbol> params_;
  std::map<std::string, std::pair<int, MultiIndex>> jet_index_;
};

using JetContextPtr = std::shared_ptr<const JetContext>;

}  // namespace hjet

#endif  // HJET_JET_CONTEXT_HPP
