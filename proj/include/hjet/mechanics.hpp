#ifndef HJET_MECHANICS_HPP
#define HJET_MECHANICS_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hjet/expr.hpp"
#include "hjet/symbol.hpp"
#include "hjet/system.hpp"

namespace hjet::mech {

/// Autonomous mechanics problem: a Lagrangian L(q, v) over dof
/// coordinates q1..qn, velocities v1..vn, with accelerations a1..an,
/// momenta p1..pn and dq<i>_dt markers generated alongside.
class MechProblem {
 public:
  MechProblem(int dof, Expr lagrangian, std::shared_ptr<SymbolTable> symbols,
              std::map<std::string, double> parameter_values = {});

  /// Builds the coordinate table, declares `parameters`, parses `lagrangian`.
  static MechProblem from_text(int dof, const std::string& lagrangian,
                               const std::vector<std::string>& parameters = {},
                               std::map<std::string, double> parameter_values = {});

  int dof() const { return dof_; }
  const Expr& lagrangian() const { return lagrangian_; }
  const SymbolTable& symbols() const { return *symbols_; }
  const std::map<std::string, double>& parameter_values() const { return parameter_values_; }

  Symbol q(int i) const;
  Symbol v(int i) const;
  Symbol a(int i) const;
  Symbol p(int i) const;
  Symbol dqdt(int i) const;  // the eliminated-velocity markers

  /// Checks an expression only uses q coordinates and parameters.
  void require_configuration_expr(const Expr& e, const std::string& what) const;

 private:
  int dof_;
  Expr lagrangian_;
  std::shared_ptr<SymbolTable> symbols_;
  std::map<std::string, double> parameter_values_;
};

/// A vector field nabla on Q: one component per coordinate, depending
/// only on q and parameters.
struct VectorFieldCandidate {
  std::vector<Expr> components;
};

/// Momentum one-form components T_i(q).
struct MomentumMap {
  std::vector<Expr> components;
};

/// Generating function S(q) of the classical mode (T = dS).
struct GeneratingFunction {
  Expr value;
};

VectorFieldCandidate parse_vector_field(const MechProblem& prob,
                                        const std::map<std::string, std::string>& components);
MomentumMap parse_momentum_map(const MechProblem& prob,
                               const std::map<std::string, std::string>& components);

/// EL residuals: res_i = dL/dq^i - D_t(dL/dv^i), with
/// D_t = sum_j (v^j d/dq^j + a^j d/dv^j). A curve solves the EL
/// equations iff every residual vanishes along it.
std::vector<Expr> euler_lagrange(const MechProblem& prob);

struct LegendreMap {
  std::vector<Expr> momenta;  // p_i = dL/dv^i (q, v)
  std::vector<Expr> hessian;  // d2L/dv^i dv^j, row-major dof x dof
};
LegendreMap legendre(const MechProblem& prob);

/// First-order system {dq^i/dt = v^i; dp_i/dt = dL/dq^i; p_i = dL/dv^i}
/// covering both the EL and the implicit Hamilton equations.
DerivedSystem elh_system(const MechProblem& prob);

/// The dynamic and constraint groups with velocities eliminated in
/// favour of dq<i>_dt markers.
DerivedSystem implicit_hamilton_system(const MechProblem& prob);

/// Coordinate form of the generalized HJ equation:
///   dL/dq^i (q,nabla) - d2L/dv^i dq^j (q,nabla) nabla^j
///     - nabla^k d2L/dv^i dv^j (q,nabla) dnabla^j/dq^k.
std::vector<Expr> ghje_residual(const MechProblem& prob, const VectorFieldCandidate& nabla);

/// Residuals of the ELH system pulled back along a section (nabla, T):
///   membership_i = T_i - dL/dv^i (q, nabla)        (Legendre-graph locus)
///   evolution_i  = nabla^k dT_i/dq^k - dL/dq^i (q, nabla)
/// The evolution rows are oriented flow-minus-source; with T the
/// Legendre pullback of nabla they are the negated GHJE residuals.
struct HJCandidateResiduals {
  std::vector<Expr> membership;
  std::vector<Expr> evolution;
};
HJCandidateResiduals hj_candidate_residuals(const MechProblem& prob,
                                            const VectorFieldCandidate& nabla,
                                            const MomentumMap& T);

/// T = FL o nabla, the momentum map induced by a vector field.
MomentumMap legendre_pullback(const MechProblem& prob, const VectorFieldCandidate& nabla);

/// Classical mode T = dS. `closedness` holds the (trivially vanishing)
/// mixed-partial witnesses of dT = 0. When L is quadratic in v with a
/// constant invertible Hessian the Legendre inverse is symbolic and
/// `energy` carries H o dS as an expression; otherwise use
/// classical_energy_at pointwise.
struct ClassicalHJ {
  std::vector<Expr> closedness;
  std::vector<Expr> momenta;                 // dS components
  std::optional<std::vector<Expr>> nabla;    // FL^{-1} o dS, symbolic route
  std::optional<Expr> energy;                // sum dS_i nabla^i - L(q, nabla)
};
ClassicalHJ classical_hj_residual(const MechProblem& prob, const GeneratingFunction& S);

struct NewtonOptions {
  double tol = 1e-12;
  int max_iter = 50;
};

/// H o dS at one configuration point: inverts the Legendre transform by
/// damped Newton (initial guess v = 0) and returns
/// sum_i dS_i(q) v^i - L(q, v). Throws NumericError on a singular
/// Hessian or non-convergence.
double classical_energy_at(const MechProblem& prob, const GeneratingFunction& S,
                           const std::vector<double>& q_point,
                           const NewtonOptions& options = {});

/// E = sum_i v^i dL/dv^i - L, conserved along EL solutions.
Expr energy_expr(const MechProblem& prob);

}  // namespace hjet::mech

#endif  // HJET_MECHANICS_HPP
