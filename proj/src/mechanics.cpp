#include "hjet/mechanics.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "hjet/parser.hpp"

namespace hjet::mech {

namespace {

std::string coord_name(const char* stem, int i) { return stem + std::to_string(i); }

}  // namespace

MechProblem::MechProblem(int dof, Expr lagrangian, std::shared_ptr<SymbolTable> symbols,
                         std::map<std::string, double> parameter_values)
    : dof_(dof),
      lagrangian_(std::move(lagrangian)),
      symbols_(std::move(symbols)),
      parameter_values_(std::move(parameter_values)) {
  if (dof_ < 1) throw Error("mechanics problem requires dof >= 1");
  for (const Symbol& s : hjet::free_symbols(lagrangian_)) {
    if (s.role() == SymbolRole::kAcceleration || s.role() == SymbolRole::kMomentum)
      throw Error("Lagrangian must not mention " + s.name());
  }
}

MechProblem MechProblem::from_text(int dof, const std::string& lagrangian,
                                   const std::vector<std::string>& parameters,
                                   std::map<std::string, double> parameter_values) {
  auto table = std::make_shared<SymbolTable>();
  for (int i = 1; i <= dof; ++i) table->create(coord_name("q", i), SymbolRole::kBaseCoord);
  for (int i = 1; i <= dof; ++i) table->create(coord_name("v", i), SymbolRole::kVelocity);
  for (int i = 1; i <= dof; ++i) table->create(coord_name("a", i), SymbolRole::kAcceleration);
  for (int i = 1; i <= dof; ++i) table->create(coord_name("p", i), SymbolRole::kMomentum);
  for (int i = 1; i <= dof; ++i)
    table->create("dq" + std::to_string(i) + "_dt", SymbolRole::kVelocity);
  for (const std::string& p : parameters) table->create(p, SymbolRole::kParameter);
  Expr L = parse_expr(lagrangian, *table);
  return MechProblem(dof, std::move(L), std::move(table), std::move(parameter_values));
}

Symbol MechProblem::q(int i) const { return symbols_->get(coord_name("q", i)); }
Symbol MechProblem::v(int i) const { return symbols_->get(coord_name("v", i)); }
Symbol MechProblem::a(int i) const { return symbols_->get(coord_name("a", i)); }
Symbol MechProblem::p(int i) const { return symbols_->get(coord_name("p", i)); }
Symbol MechProblem::dqdt(int i) const { return symbols_->get("dq" + std::to_string(i) + "_dt"); }

void MechProblem::require_configuration_expr(const Expr& e, const std::string& what) const {
  for (const Symbol& s : hjet::free_symbols(e)) {
    if (s.role() == SymbolRole::kBaseCoord || s.role() == SymbolRole::kParameter) continue;
    throw Error(what + " may depend only on coordinates and parameters, found " + s.name());
  }
}

VectorFieldCandidate parse_vector_field(const MechProblem& prob,
                                        const std::map<std::string, std::string>& components) {
  VectorFieldCandidate out;
  out.components.reserve(prob.dof());
  for (int i = 1; i <= prob.dof(); ++i) {
    auto it = components.find("q" + std::to_string(i));
    if (it == components.end())
      throw Error("vector field is missing component q" + std::to_string(i));
    Expr e = parse_expr(it->second, prob.symbols());
    prob.require_configuration_expr(e, "vector field component");
    out.components.push_back(std::move(e));
  }
  if (components.size() != static_cast<std::size_t>(prob.dof()))
    throw Error("vector field has unexpected extra components");
  return out;
}

MomentumMap parse_momentum_map(const MechProblem& prob,
                               const std::map<std::string, std::string>& components) {
  MomentumMap out;
  out.components.reserve(prob.dof());
  for (int i = 1; i <= prob.dof(); ++i) {
    auto it = components.find("p" + std::to_string(i));
    if (it == components.end())
      throw Error("momentum map is missing component p" + std::to_string(i));
    Expr e = parse_expr(it->second, prob.symbols());
    prob.require_configuration_expr(e, "momentum component");
    out.components.push_back(std::move(e));
  }
  if (components.size() != static_cast<std::size_t>(prob.dof()))
    throw Error("momentum map has unexpected extra components");
  return out;
}

namespace {

// D_t along the second-order prolongation (q -> v, v -> a).
Expr on_shell_time_derivative(const MechProblem& prob, const Expr& f) {
  std::vector<Expr> parts;
  for (int j = 1; j <= prob.dof(); ++j) {
    parts.push_back(mul({sym(prob.v(j)), diff(f, prob.q(j))}));
    parts.push_back(mul({sym(prob.a(j)), diff(f, prob.v(j))}));
  }
  return add(std::move(parts));
}

Bindings velocity_bindings(const MechProblem& prob, const std::vector<Expr>& values) {
  Bindings b;
  for (int i = 1; i <= prob.dof(); ++i) b.emplace(prob.v(i).name(), values[i - 1]);
  return b;
}

void check_dof(const MechProblem& prob, std::size_t got, const char* what) {
  if (got != static_cast<std::size_t>(prob.dof()))
    throw Error(std::string(what) + ": expected " + std::to_string(prob.dof()) +
                " components, got " + std::to_string(got));
}

}  // namespace

std::vector<Expr> euler_lagrange(const MechProblem& prob) {
  std::vector<Expr> out;
  out.reserve(prob.dof());
  for (int i = 1; i <= prob.dof(); ++i) {
    Expr dLdq = diff(prob.lagrangian(), prob.q(i));
    Expr dLdv = diff(prob.lagrangian(), prob.v(i));
    out.push_back(add({dLdq, neg(on_shell_time_derivative(prob, dLdv))}));
  }
  return out;
}

LegendreMap legendre(const MechProblem& prob) {
  LegendreMap out;
  for (int i = 1; i <= prob.dof(); ++i)
    out.momenta.push_back(diff(prob.lagrangian(), prob.v(i)));
  out.hessian.reserve(prob.dof() * prob.dof());
  for (int i = 1; i <= prob.dof(); ++i)
    for (int j = 1; j <= prob.dof(); ++j)
      out.hessian.push_back(diff(out.momenta[i - 1], prob.v(j)));
  return out;
}

DerivedSystem elh_system(const MechProblem& prob) {
  DerivedSystem sys;
  EquationGroup kin{"kinematic", {}};
  EquationGroup dyn{"dynamic", {}};
  EquationGroup con{"constraint", {}};
  for (int i = 1; i <= prob.dof(); ++i) {
    kin.equations.push_back({"dq" + std::to_string(i) + "/dt", std::nullopt, sym(prob.v(i))});
    dyn.equations.push_back(
        {"dp" + std::to_string(i) + "/dt", std::nullopt, diff(prob.lagrangian(), prob.q(i))});
    con.equations.push_back(
        {"p" + std::to_string(i), sym(prob.p(i)), diff(prob.lagrangian(), prob.v(i))});
  }
  sys.groups = {std::move(kin), std::move(dyn), std::move(con)};
  return sys;
}

DerivedSystem implicit_hamilton_system(const MechProblem& prob) {
  Bindings markers;
  for (int i = 1; i <= prob.dof(); ++i)
    markers.emplace(prob.v(i).name(), sym(prob.dqdt(i)));
  DerivedSystem elh = elh_system(prob);
  DerivedSystem sys;
  for (const auto& group : elh.groups) {
    if (group.name == "kinematic") continue;  // absorbed into the markers
    EquationGroup g{group.name, {}};
    for (const auto& eq : group.equations)
      g.equations.push_back({eq.lhs_label, eq.lhs, substitute(eq.rhs, markers)});
    sys.groups.push_back(std::move(g));
  }
  return sys;
}

std::vector<Expr> ghje_residual(const MechProblem& prob, const VectorFieldCandidate& nabla) {
  check_dof(prob, nabla.components.size(), "ghje_residual");
  Bindings along = velocity_bindings(prob, nabla.components);
  std::vector<Expr> out;
  for (int i = 1; i <= prob.dof(); ++i) {
    Expr dLdv = diff(prob.lagrangian(), prob.v(i));
    std::vector<Expr> parts{substitute(diff(prob.lagrangian(), prob.q(i)), along)};
    for (int j = 1; j <= prob.dof(); ++j) {
      Expr mixed = substitute(diff(dLdv, prob.q(j)), along);
      parts.push_back(neg(mul({mixed, nabla.components[j - 1]})));
    }
    for (int k = 1; k <= prob.dof(); ++k) {
      for (int j = 1; j <= prob.dof(); ++j) {
        Expr second = substitute(diff(dLdv, prob.v(j)), along);
        parts.push_back(neg(mul({nabla.components[k - 1], second,
                                 diff(nabla.components[j - 1], prob.q(k))})));
      }
    }
    out.push_back(add(std::move(parts)));
  }
  return out;
}

HJCandidateResiduals hj_candidate_residuals(const MechProblem& prob,
                                            const VectorFieldCandidate& nabla,
                                            const MomentumMap& T) {
  check_dof(prob, nabla.components.size(), "hj_candidate_residuals nabla");
  check_dof(prob, T.components.size(), "hj_candidate_residuals T");
  Bindings along = velocity_bindings(prob, nabla.components);
  HJCandidateResiduals out;
  for (int i = 1; i <= prob.dof(); ++i) {
    Expr dLdv_along = substitute(diff(prob.lagrangian(), prob.v(i)), along);
    out.membership.push_back(add({T.components[i - 1], neg(dLdv_along)}));
    std::vector<Expr> flow;
    for (int k = 1; k <= prob.dof(); ++k)
      flow.push_back(mul({nabla.components[k - 1], diff(T.components[i - 1], prob.q(k))}));
    flow.push_back(neg(substitute(diff(prob.lagrangian(), prob.q(i)), along)));
    out.evolution.push_back(add(std::move(flow)));
  }
  return out;
}

MomentumMap legendre_pullback(const MechProblem& prob, const VectorFieldCandidate& nabla) {
  check_dof(prob, nabla.components.size(), "legendre_pullback");
  Bindings along = velocity_bindings(prob, nabla.components);
  MomentumMap out;
  for (int i = 1; i <= prob.dof(); ++i)
    out.components.push_back(substitute(diff(prob.lagrangian(), prob.v(i)), along));
  return out;
}

namespace {

// Laplace-expansion determinant of a dof x dof matrix of expressions.
Expr symbolic_det(const std::vector<Expr>& m, int n) {
  if (n == 1) return m[0];
  std::vector<Expr> parts;
  for (int col = 0; col < n; ++col) {
    std::vector<Expr> minor;
    minor.reserve((n - 1) * (n - 1));
    for (int r = 1; r < n; ++r)
      for (int c = 0; c < n; ++c)
        if (c != col) minor.push_back(m[r * n + c]);
    Expr term = mul({m[col], symbolic_det(minor, n - 1)});
    parts.push_back(col % 2 == 0 ? term : neg(term));
  }
  return add(std::move(parts));
}

// Inverse via adjugate; requires det not proved zero.
std::vector<Expr> symbolic_inverse(const std::vector<Expr>& m, int n, const Expr& det) {
  std::vector<Expr> inv(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::vector<Expr> minor;
      minor.reserve((n - 1) * (n - 1));
      for (int r = 0; r < n; ++r) {
        if (r == j) continue;  // adjugate transposes the cofactor matrix
        for (int c = 0; c < n; ++c)
          if (c != i) minor.push_back(m[r * n + c]);
      }
      Expr cof = n == 1 ? constant(std::int64_t{1}) : symbolic_det(minor, n - 1);
      if ((i + j) % 2 == 1) cof = neg(cof);
      inv[i * n + j] = divide(cof, det);
    }
  }
  return inv;
}

bool is_velocity_or_coordinate(const Symbol& s) {
  return s.role() == SymbolRole::kBaseCoord || s.role() == SymbolRole::kVelocity;
}

}  // namespace

ClassicalHJ classical_hj_residual(const MechProblem& prob, const GeneratingFunction& S) {
  prob.require_configuration_expr(S.value, "generating function");
  ClassicalHJ out;
  for (int i = 1; i <= prob.dof(); ++i)
    out.momenta.push_back(diff(S.value, prob.q(i)));
  for (int i = 1; i <= prob.dof(); ++i)
    for (int j = i + 1; j <= prob.dof(); ++j)
      out.closedness.push_back(
          add({diff(out.momenta[i - 1], prob.q(j)), neg(diff(out.momenta[j - 1], prob.q(i)))}));

  LegendreMap fl = legendre(prob);
  bool constant_hessian = true;
  for (const Expr& h : fl.hessian) {
    for (const Symbol& s : hjet::free_symbols(h)) {
      if (is_velocity_or_coordinate(s)) {
        constant_hessian = false;
        break;
      }
    }
    if (!constant_hessian) break;
  }
  if (!constant_hessian) return out;  // numeric route via classical_energy_at

  Expr det = symbolic_det(fl.hessian, prob.dof());
  if (is_proved_zero(det)) return out;

  // dL/dv is affine in v here: dL/dv = H v + c(q).
  Bindings v_zero;
  for (int i = 1; i <= prob.dof(); ++i)
    v_zero.emplace(prob.v(i).name(), constant(std::int64_t{0}));
  std::vector<Expr> inv = symbolic_inverse(fl.hessian, prob.dof(), det);
  std::vector<Expr> nabla(prob.dof());
  for (int i = 0; i < prob.dof(); ++i) {
    std::vector<Expr> parts;
    for (int j = 0; j < prob.dof(); ++j) {
      Expr rhs = add({out.momenta[j], neg(substitute(fl.momenta[j], v_zero))});
      parts.push_back(mul({inv[i * prob.dof() + j], rhs}));
    }
    nabla[i] = add(std::move(parts));
  }

  Bindings along;
  for (int i = 1; i <= prob.dof(); ++i) along.emplace(prob.v(i).name(), nabla[i - 1]);
  std::vector<Expr> energy_parts;
  for (int i = 0; i < prob.dof(); ++i)
    energy_parts.push_back(mul({out.momenta[i], nabla[i]}));
  energy_parts.push_back(neg(substitute(prob.lagrangian(), along)));
  out.energy = add(std::move(energy_parts));
  out.nabla = std::move(nabla);
  return out;
}

double classical_energy_at(const MechProblem& prob, const GeneratingFunction& S,
                           const std::vector<double>& q_point, const NewtonOptions& options) {
  check_dof(prob, q_point.size(), "classical_energy_at");
  const int n = prob.dof();
  EvalEnv env;
  for (const auto& [name, value] : prob.parameter_values()) env[name] = value;
  for (int i = 1; i <= n; ++i) env[prob.q(i).name()] = q_point[i - 1];

  LegendreMap fl = legendre(prob);
  Eigen::VectorXd target(n);
  for (int i = 1; i <= n; ++i) target(i - 1) = eval(diff(S.value, prob.q(i)), env);

  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  auto residual = [&](const Eigen::VectorXd& vv) {
    EvalEnv e = env;
    for (int i = 1; i <= n; ++i) e[prob.v(i).name()] = vv(i - 1);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g(i) = eval(fl.momenta[i], e) - target(i);
    return g;
  };

  Eigen::VectorXd g = residual(v);
  for (int iter = 0; iter < options.max_iter && g.norm() > options.tol; ++iter) {
    EvalEnv e = env;
    for (int i = 1; i <= n; ++i) e[prob.v(i).name()] = v(i - 1);
    Eigen::MatrixXd J(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) J(i, j) = eval(fl.hessian[i * n + j], e);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible()) throw NumericError("singular Legendre Hessian at sample point");
    Eigen::VectorXd step = lu.solve(-g);
    double t = 1.0;
    Eigen::VectorXd v_next = v + step;
    Eigen::VectorXd g_next = residual(v_next);
    while (g_next.norm() >= g.norm() && t > 1.0 / 1024.0) {
      t *= 0.5;
      v_next = v + t * step;
      g_next = residual(v_next);
    }
    v = v_next;
    g = g_next;
  }
  if (g.norm() > options.tol)
    throw NumericError("Legendre inversion did not converge at sample point");

  EvalEnv e = env;
  for (int i = 1; i <= n; ++i) e[prob.v(i).name()] = v(i - 1);
  double energy = -eval(prob.lagrangian(), e);
  for (int i = 0; i < n; ++i) energy += target(i) * v(i);
  return energy;
}

Expr energy_expr(const MechProblem& prob) {
  std::vector<Expr> parts;
  for (int i = 1; i <= prob.dof(); ++i)
    parts.push_back(mul({sym(prob.v(i)), diff(prob.lagrangian(), prob.v(i))}));
  parts.push_back(neg(prob.lagrangian()));
  return add(std::move(parts));
}

}  // namespace hjet::mech
