#include "hjet/field_theory.hpp"

#include <algorithm>

#include "hjet/parser.hpp"

namespace hjet::field {

namespace {

void require_section_expr(const JetContext& ctx, const Expr& e, const std::string& what) {
  for (const Symbol& s : free_symbols(e)) {
    if (s.role() == SymbolRole::kBaseCoord || s.role() == SymbolRole::kParameter) continue;
    if (auto j = ctx.as_jet(s)) {
      if (j->second.order() <= ctx.k()) continue;
      throw Error(what + " may use jets of order <= " + std::to_string(ctx.k()) + ", found " +
                  s.name());
    }
    throw Error(what + " may not mention " + s.name());
  }
}

void require_same_context(const JetContextPtr& a, const JetContextPtr& b, const char* what) {
  if (a != b) throw Error(std::string("jet context mismatch in ") + what);
}

}  // namespace

FieldProblem::FieldProblem(JetContextPtr ctx, Expr lagrangian,
                           std::map<std::string, double> parameter_values)
    : ctx_(std::move(ctx)),
      lagrangian_(std::move(lagrangian)),
      parameter_values_(std::move(parameter_values)) {
  for (const Symbol& s : free_symbols(lagrangian_)) {
    if (ctx_->is_momentum(s)) throw Error("Lagrangian density must not mention momenta");
    if (auto j = ctx_->as_jet(s)) {
      if (j->second.order() > ctx_->k() + 1)
        throw Error("Lagrangian density uses jet " + s.name() + " beyond order k+1");
    }
  }
}

FieldProblem FieldProblem::from_text(int n, int m, int k, const std::string& lagrangian,
                                     const std::vector<std::string>& parameters,
                                     std::map<std::string, double> parameter_values) {
  auto ctx = std::make_shared<JetContext>(n, m, k, parameters);
  Expr L = parse_expr(lagrangian, ctx->symbols());
  return FieldProblem(std::move(ctx), std::move(L), std::move(parameter_values));
}

HolonomicConnection::HolonomicConnection(JetContextPtr ctx, std::map<JetKey, Expr> components)
    : ctx_(std::move(ctx)), components_(std::move(components)) {
  const int top = ctx_->k() + 1;
  std::size_t expected = 0;
  for (int alpha = 1; alpha <= ctx_->m(); ++alpha) {
    for (const MultiIndex& I : MultiIndex::all_of_order(ctx_->n(), top)) {
      ++expected;
      auto it = components_.find({alpha, I});
      if (it == components_.end())
        throw Error("connection is missing component " + JetContext::jet_name(alpha, I));
      require_section_expr(*ctx_, it->second, "connection component");
    }
  }
  if (components_.size() != expected) throw Error("connection has unexpected extra components");
}

const Expr& HolonomicConnection::component(int alpha, const MultiIndex& I) const {
  auto it = components_.find({alpha, I});
  if (it == components_.end())
    throw Error("no connection component " + JetContext::jet_name(alpha, I));
  return it->second;
}

MomentumSection::MomentumSection(JetContextPtr ctx, std::map<MomKey, Expr> components)
    : ctx_(std::move(ctx)), components_(std::move(components)) {
  std::size_t expected = 0;
  for (int alpha = 1; alpha <= ctx_->m(); ++alpha) {
    for (const MultiIndex& I : MultiIndex::all_up_to_order(ctx_->n(), ctx_->k())) {
      for (int i = 1; i <= ctx_->n(); ++i) {
        ++expected;
        auto it = components_.find({alpha, I, i});
        if (it == components_.end())
          throw Error("momentum section is missing component " +
                      JetContext::momentum_name(alpha, I, i));
        require_section_expr(*ctx_, it->second, "momentum component");
      }
    }
  }
  if (components_.size() != expected)
    throw Error("momentum section has unexpected extra components");
}

const Expr& MomentumSection::component(int alpha, const MultiIndex& I, int i) const {
  auto it = components_.find({alpha, I, i});
  if (it == components_.end())
    throw Error("no momentum component " + JetContext::momentum_name(alpha, I, i));
  return it->second;
}

HolonomicConnection parse_connection(const FieldProblem& prob,
                                     const std::map<std::string, std::string>& components) {
  const JetContext& ctx = prob.ctx();
  std::map<JetKey, Expr> parsed;
  for (int alpha = 1; alpha <= ctx.m(); ++alpha) {
    for (const MultiIndex& I : MultiIndex::all_of_order(ctx.n(), ctx.k() + 1)) {
      auto it = components.find(JetContext::jet_name(alpha, I));
      if (it == components.end())
        throw Error("connection is missing component " + JetContext::jet_name(alpha, I));
      parsed.emplace(JetKey{alpha, I}, parse_expr(it->second, ctx.symbols()));
    }
  }
  if (components.size() != parsed.size()) throw Error("connection has unexpected extra components");
  return HolonomicConnection(prob.ctx_ptr(), std::move(parsed));
}

MomentumSection parse_momentum_section(const FieldProblem& prob,
                                       const std::map<std::string, std::string>& components) {
  const JetContext& ctx = prob.ctx();
  std::map<MomKey, Expr> parsed;
  for (int alpha = 1; alpha <= ctx.m(); ++alpha) {
    for (const MultiIndex& I : MultiIndex::all_up_to_order(ctx.n(), ctx.k())) {
      for (int i = 1; i <= ctx.n(); ++i) {
        auto it = components.find(JetContext::momentum_name(alpha, I, i));
        if (it == components.end())
          throw Error("momentum section is missing component " +
                      JetContext::momentum_name(alpha, I, i));
        parsed.emplace(MomKey{alpha, I, i}, parse_expr(it->second, ctx.symbols()));
      }
    }
  }
  if (components.size() != parsed.size())
    throw Error("momentum section has unexpected extra components");
  return MomentumSection(prob.ctx_ptr(), std::move(parsed));
}

std::vector<Expr> field_euler_lagrange(const FieldProblem& prob) {
  const JetContext& ctx = prob.ctx();
  std::vector<Expr> out;
  out.reserve(ctx.m());
  for (int alpha = 1; alpha <= ctx.m(); ++alpha) {
    std::vector<Expr> parts;
    for (const MultiIndex& I : MultiIndex::all_up_to_order(ctx.n(), ctx.k() + 1)) {
      Expr dLdu = diff(prob.lagrangian(), ctx.jet(alpha, I));
      if (is_proved_zero(dLdu)) continue;
      Expr term = ctx.iterated_total_derivative(dLdu, I);
      parts.push_back(I.order() % 2 == 0 ? term : neg(term));
    }
    out.push_back(add(std::move(parts)));
  }
  return out;
}

Expr elh_energy(const FieldProblem& prob) {
  const JetContext& ctx = prob.ctx();
  std::vector<Expr> parts;
  for (int alpha = 1; alpha <= ctx.m(); ++alpha) {
    for (const MultiIndex& I : MultiIndex::all_up_to_order(ctx.n(), ctx.k())) {
      for (int i = 1; i <= ctx.n(); ++i) {
        parts.push_back(
            mul({sym(ctx.momentum(alpha, I, i)), sym(ctx.jet(alpha, I.append(i)))}));
      }
    }
  }
  parts.push_back(neg(prob.lagrangian()));
  return add(std::move(parts));
}

namespace {

std::string dx(int i) { return "dx" + std::to_string(i); }

Expr delta_momentum_sum(const JetContext& ctx, int alpha, const MultiIndex& I) {
  std::vector<Expr> parts;
  for (const auto& [J, i] : delta_decompositions(I))
    parts.push_back(sym(ctx.momentum(alpha, J, i)));
  return add(std::move(parts));
}

DerivedSystem elh_pde_groups(const FieldProblem& prob, bool implicit) {
  const JetContext& ctx = prob.ctx();
  Bindings ubar;
  if (implicit) {
    for (int alpha = 1; alpha <= ctx.m(); ++alpha)
      for (const MultiIndex& I : MultiIndex::all_of_order(ctx.n(), ctx.k() + 1))
        ubar.emplace(JetContext::jet_name(alpha, I), sym(ctx.ubar(alpha, I)));
  }
  auto source = [&](const Expr& e) { return implicit ? substitute(e, ubar) : e; };

  DerivedSystem sys;
  EquationGroup kin{"kinematic", {}};
  const int kin_top = implicit ? ctx.k() - 1 : ctx.k();
  for (int alpha = 1; alpha <= ctx.m(); ++alpha) {
    for (const MultiIndex& I : MultiIndex::all_up_to_order(ctx.n(), std::max(kin_top, -1))) {
      for (int i = 1; i <= ctx.n(); ++i) {
        kin.equations.push_back({"d(" + JetContext::jet_name(alpha, I) + ")/" + dx(i),
                                 std::nullopt, sym(ctx.jet(alpha, I.append(i)))});
      }
    }
  }

  EquationGroup dyn{"dynamic", {}};
  for (int alpha = 1; alpha <= ctx.m(); ++alpha) {
    for (const MultiIndex& I : MultiIndex::all_up_to_order(ctx.n(), ctx.k())) {
      std::string label;
      for (int i = 1; i <= ctx.n(); ++i) {
        if (!label.empty()) label += " + ";
        label += "d(" + JetContext::momentum_name(alpha, I, i) + ")/" + dx(i);
      }
      std::vector<Expr> rhs{source(diff(prob.lagrangian(), ctx.jet(alpha, I)))};
      if (I.order() > 0) rhs.push_back(neg(delta_momentum_sum(ctx, alpha, I)));
      dyn.equations.push_back({std::move(label), std::nullopt, add(std::move(rhs))});
    }
  }

  EquationGroup con{"constraint", {}};
  for (int alpha = 1; alpha <= ctx.m(); ++alpha) {
    for (const MultiIndex& I : MultiIndex::all_of_order(ctx.n(), ctx.k() + 1)) {
      Expr lhs = delta_momentum_sum(ctx, alpha, I);
      con.equations.push_back(
          {to_string(lhs), lhs, source(diff(prob.lagrangian(), ctx.jet(alpha, I)))});
    }
  }

  sys.groups = {std::move(kin), std::move(dyn), std::move(con)};
  return sys;
}

}  // namespace

DerivedSystem elh_pde_system(const FieldProblem& prob) { return elh_pde_groups(prob, false); }

DerivedSystem implicit_hamilton_pde_system(const FieldProblem& prob) {
  return elh_pde_groups(prob, true);
}

Expr horizontal_derivative(const Expr& e, int i, const HolonomicConnection& nabla) {
  const JetContext& ctx = nabla.ctx();
  if (i < 1 || i > ctx.n()) throw Error("base index out of range");
  std::vector<Expr> parts{diff(e, ctx.base(i))};
  for (const Symbol& s : free_symbols(e)) {
    if (s.role() == SymbolRole::kBaseCoord || s.role() == SymbolRole::kParameter) continue;
    auto j = ctx.as_jet(s);
    if (!j || j->second.order() > ctx.k())
      throw Error("horizontal derivative applies to expressions over x and jets <= k, found " +
                  s.name());
    const auto& [alpha, I] = *j;
    Expr lift = I.order() < ctx.k() ? sym(ctx.jet(alpha, I.append(i)))
                                    : nabla.component(alpha, I.append(i));
    parts.push_back(mul({lift, diff(e, s)}));
  }
  return add(std::move(parts));
}

std::vector<FlatnessEntry> flatness_residuals(const HolonomicConnection& nabla) {
  const JetContext& ctx = nabla.ctx();
  std::vector<FlatnessEntry> out;
  for (int alpha = 1; alpha <= ctx.m(); ++alpha) {
    for (const MultiIndex& I : MultiIndex::all_of_order(ctx.n(), ctx.k())) {
      for (int i = 1; i <= ctx.n(); ++i) {
        for (int j = i + 1; j <= ctx.n(); ++j) {
          Expr r = add({horizontal_derivative(nabla.component(alpha, I.append(j)), i, nabla),
                        neg(horizontal_derivative(nabla.component(alpha, I.append(i)), j, nabla))});
          out.push_back({alpha, I, i, j, std::move(r)});
        }
      }
    }
  }
  return out;
}

Bindings prolongation_bindings(const FieldProblem& prob, const HolonomicConnection& nabla) {
  require_same_context(prob.ctx_ptr(), nabla.ctx_ptr(), "prolongation");
  Bindings b;
  for (const auto& [key, expr] : nabla.components())
    b.emplace(JetContext::jet_name(key.alpha, key.I), expr);
  return b;
}

FieldResidualSet field_hj_residuals(const FieldProblem& prob, const HolonomicConnection& nabla,
                                    const MomentumSection& T) {
  require_same_context(prob.ctx_ptr(), nabla.ctx_ptr(), "field_hj_residuals");
  require_same_context(prob.ctx_ptr(), T.ctx_ptr(), "field_hj_residuals");
  const JetContext& ctx = prob.ctx();
  Bindings prolong = prolongation_bindings(prob, nabla);

  FieldResidualSet out;
  for (int alpha = 1; alpha <= ctx.m(); ++alpha) {
    for (const MultiIndex& I : MultiIndex::all_of_order(ctx.n(), ctx.k() + 1)) {
      std::vector<Expr> parts;
      for (const auto& [J, i] : delta_decompositions(I))
        parts.push_back(T.component(alpha, J, i));
      parts.push_back(neg(substitute(diff(prob.lagrangian(), ctx.jet(alpha, I)), prolong)));
      out.constraint.push_back({alpha, I, add(std::move(parts))});
    }
    for (const MultiIndex& I : MultiIndex::all_up_to_order(ctx.n(), ctx.k())) {
      std::vector<Expr> parts;
      for (int i = 1; i <= ctx.n(); ++i)
        parts.push_back(horizontal_derivative(T.component(alpha, I, i), i, nabla));
      parts.push_back(neg(substitute(diff(prob.lagrangian(), ctx.jet(alpha, I)), prolong)));
      if (I.order() > 0) {
        for (const auto& [J, i] : delta_decompositions(I))
          parts.push_back(T.component(alpha, J, i));
      }
      out.evolution.push_back({alpha, I, add(std::move(parts))});
    }
  }
  out.flatness = flatness_residuals(nabla);
  return out;
}

MomentumSection auto_fill_momentum(const FieldProblem& prob, const HolonomicConnection& nabla) {
  require_same_context(prob.ctx_ptr(), nabla.ctx_ptr(), "auto_fill_momentum");
  const JetContext& ctx = prob.ctx();
  Bindings prolong = prolongation_bindings(prob, nabla);
  std::map<MomKey, Expr> components;

  // Level |I| = k+1 is the constraint group; levels k..1 cascade through
  // the evolution rows. Each row is split across its delta pairs by digit
  // multiplicity, which is exactly the symmetric (gauge-fixed) solution.
  for (int level = ctx.k() + 1; level >= 1; --level) {
    for (int alpha = 1; alpha <= ctx.m(); ++alpha) {
      for (const MultiIndex& I : MultiIndex::all_of_order(ctx.n(), level)) {
        std::vector<Expr> parts{substitute(diff(prob.lagrangian(), ctx.jet(alpha, I)), prolong)};
        if (level <= ctx.k()) {
          for (int i = 1; i <= ctx.n(); ++i) {
            Expr known = components.at({alpha, I, i});
            parts.push_back(neg(horizontal_derivative(known, i, nabla)));
          }
        }
        Expr rhs = add(std::move(parts));
        for (const auto& [J, i] : delta_decompositions(I)) {
          Expr share = mul({constant(Rational(I.count(i), I.order())), rhs});
          components.emplace(MomKey{alpha, J, i}, std::move(share));
        }
      }
    }
  }
  return MomentumSection(prob.ctx_ptr(), std::move(components));
}

MomentumSection momentum_gauge_shift(const MomentumSection& T, const GaugeShift& shift) {
  const JetContext& ctx = T.ctx();
  if (ctx.k() < 1)
    throw Error("momentum gauge shift requires k >= 1 (no representable gauge freedom at k = 0)");
  for (const auto& [key, value] : shift) {
    if (key.I.order() != 1)
      throw Error("gauge shift components must carry a single-index multi-index");
    if (key.alpha < 1 || key.alpha > ctx.m() || key.i < 1 || key.i > ctx.n())
      throw Error("gauge shift component out of range");
    for (const Symbol& s : free_symbols(value)) {
      if (s.role() != SymbolRole::kParameter)
        throw Error("gauge shift must be constant, found dependence on " + s.name());
    }
    // Antisymmetry under swapping the single index with i.
    int j = 0;
    for (int d = 1; d <= ctx.n(); ++d)
      if (key.I.count(d) > 0) j = d;
    Expr mirror = constant(std::int64_t{0});
    auto it = shift.find(MomKey{key.alpha, MultiIndex(ctx.n()).append(key.i), j});
    if (it != shift.end()) mirror = it->second;
    if (!is_proved_zero(add({value, mirror})))
      throw Error("gauge shift is not antisymmetric");
  }
  std::map<MomKey, Expr> shifted = T.components();
  for (const auto& [key, value] : shift) {
    auto it = shifted.find(key);
    if (it == shifted.end()) throw Error("gauge shift targets a missing momentum component");
    it->second = add({it->second, value});
  }
  return MomentumSection(T.ctx_ptr(), std::move(shifted));
}

}  // namespace hjet::field
