#ifndef HJET_FIELD_THEORY_HPP
#define HJET_FIELD_THEORY_HPP

#include <map>
#include <string>
#include <vector>

#include "hjet/expr.hpp"
#include "hjet/jet_context.hpp"
#include "hjet/system.hpp"

namespace hjet::field {

/// Order-(k+1) Lagrangian field theory: a density L over x^i and
/// u^alpha_I with |I| <= k+1 (no momenta).
class FieldProblem {
 public:
  FieldProblem(JetContextPtr ctx, Expr lagrangian,
               std::map<std::string, double> parameter_values = {});

  static FieldProblem from_text(int n, int m, int k, const std::string& lagrangian,
                                const std::vector<std::string>& parameters = {},
                                std::map<std::string, double> parameter_values = {});

  const JetContext& ctx() const { return *ctx_; }
  const JetContextPtr& ctx_ptr() const { return ctx_; }
  const Expr& lagrangian() const { return lagrangian_; }
  const std::map<std::string, double>& parameter_values() const { return parameter_values_; }

 private:
  JetContextPtr ctx_;
  Expr lagrangian_;
  std::map<std::string, double> parameter_values_;
};

struct JetKey {
  int alpha;
  MultiIndex I;
  friend bool operator<(const JetKey& a, const JetKey& b) {
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    return a.I < b.I;
  }
};

struct MomKey {
  int alpha;
  MultiIndex I;
  int i;
  friend bool operator<(const MomKey& a, const MomKey& b) {
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    if (!(a.I == b.I)) return a.I < b.I;
    return a.i < b.i;
  }
};

/// Holonomic connection in pi_k, represented by its top prescription:
/// nabla^alpha_I(x, u_{<=k}) for every alpha and |I| = k+1 (lower-order
/// derivative slots are the jet coordinates themselves).
class HolonomicConnection {
 public:
  HolonomicConnection(JetContextPtr ctx, std::map<JetKey, Expr> components);

  const JetContext& ctx() const { return *ctx_; }
  const JetContextPtr& ctx_ptr() const { return ctx_; }
  const Expr& component(int alpha, const MultiIndex& I) const;
  const std::map<JetKey, Expr>& components() const { return components_; }

 private:
  JetContextPtr ctx_;
  std::map<JetKey, Expr> components_;
};

/// Section of the multimomentum bundle over J^k pi: components
/// T^{I.i}_alpha(x, u_{<=k}) for |I| <= k and i = 1..n.
class MomentumSection {
 public:
  MomentumSection(JetContextPtr ctx, std::map<MomKey, Expr> components);

  const JetContext& ctx() const { return *ctx_; }
  const JetContextPtr& ctx_ptr() const { return ctx_; }
  const Expr& component(int alpha, const MultiIndex& I, int i) const;
  const std::map<MomKey, Expr>& components() const { return components_; }

 private:
  JetContextPtr ctx_;
  std::map<MomKey, Expr> components_;
};

HolonomicConnection parse_connection(const FieldProblem& prob,
                                     const std::map<std::string, std::string>& components);
MomentumSection parse_momentum_section(const FieldProblem& prob,
                                       const std::map<std::string, std::string>& components);

/// EL residuals, one per alpha, over jets of order up to 2k+2:
/// sum over |I| <= k+1 of (-1)^{|I|} D_I (dL/du^alpha_I), the sum
/// running over symmetric multi-indices with unit coefficients.
std::vector<Expr> field_euler_lagrange(const FieldProblem& prob);

/// E = p^{I.i}_alpha u^alpha_{Ii} - L over jets <= k+1 and momenta.
Expr elh_energy(const FieldProblem& prob);

/// {kinematic (|I| <= k); momentum evolution (|I| <= k);
///  constraint (|I| = k+1)} with the delta sums expanded.
DerivedSystem elh_pde_system(const FieldProblem& prob);

/// Same groups with kinematic restricted to |I| < k and the top jets in
/// source terms replaced by the ubar derivative-slot markers.
DerivedSystem implicit_hamilton_pde_system(const FieldProblem& prob);

/// Derivative along nabla-constant sections:
/// D^nabla_i e = de/dx^i + u^alpha_{Ii} de/du^alpha_I (|I| < k)
///             + nabla^alpha_{Ii} de/du^alpha_I (|I| = k).
/// e must live over x and jets of order <= k.
Expr horizontal_derivative(const Expr& e, int i, const HolonomicConnection& nabla);

struct FlatnessEntry {
  int alpha;
  MultiIndex I;  // |I| = k
  int i, j;      // i < j
  Expr residual; // D^nabla_i nabla^alpha_{Ij} - D^nabla_j nabla^alpha_{Ii}
};

/// Integrability of nabla-constant sections. Lower-order pairs vanish
/// identically by jet-coordinate symmetry and are not emitted.
std::vector<FlatnessEntry> flatness_residuals(const HolonomicConnection& nabla);

struct R1Entry {
  int alpha;
  MultiIndex I;  // |I| = k+1
  Expr residual;
};
struct R2Entry {
  int alpha;
  MultiIndex I;  // |I| <= k
  Expr residual;
};

struct FieldResidualSet {
  std::vector<R1Entry> constraint;       // membership in the Legendre locus
  std::vector<R2Entry> evolution;        // momentum balance along nabla
  std::vector<FlatnessEntry> flatness;
};

/// Residuals of the ELH PDEs restricted along nabla-constant
/// prolongations for a candidate pair (nabla, T):
///   R1_{alpha,I} = delta^I_{Ji} T^{J.i} - dL/du^alpha_I o nabla,  |I| = k+1
///   R2_{alpha,I} = D^nabla_i T^{I.i} - dL/du^alpha_I o nabla
///                  + delta^I_{Ji} T^{J.i},                        |I| <= k
/// plus the flatness residuals. "o nabla" substitutes top jets by the
/// connection components.
FieldResidualSet field_hj_residuals(const FieldProblem& prob, const HolonomicConnection& nabla,
                                    const MomentumSection& T);

/// Bindings sending each top jet u^alpha_I (|I| = k+1) to the
/// connection component.
Bindings prolongation_bindings(const FieldProblem& prob, const HolonomicConnection& nabla);

/// Solves the constraint rows for T given nabla alone. Unique at k = 0;
/// for k >= 1 each level is distributed by digit multiplicity (the
/// symmetric part; the antisymmetric gauge part defaults to 0) and the
/// lower levels cascade through the evolution rows, so only the |I| = 0
/// evolution residuals and flatness remain nontrivial.
MomentumSection auto_fill_momentum(const FieldProblem& prob, const HolonomicConnection& nabla);

/// Constant antisymmetric shift A^{j.i}_alpha (single-index j, with
/// A^{j.i} = -A^{i.j}) applied to the |I| = 1 layer of T; the HJ
/// residuals are invariant under it. Requires k >= 1.
using GaugeShift = std::map<MomKey, Expr>;
MomentumSection momentum_gauge_shift(const MomentumSection& T, const GaugeShift& shift);

}  // namespace hjet::field

#endif  // HJET_FIELD_THEORY_HPP
