#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hjet/field_theory.hpp"
#include "hjet/mechanics.hpp"
#include "hjet/parser.hpp"
#include "test_support.hpp"

using namespace hjet;
using namespace hjet::field;

namespace {

Expr parse_in(const FieldProblem& prob, const std::string& text) {
  return parse_expr(text, prob.ctx().symbols());
}

FieldProblem wave_problem(const std::vector<std::string>& params = {}) {
  return FieldProblem::from_text(2, 1, 0, "(u1_1^2 - u1_2^2)/2", params);
}

HolonomicConnection connection_of(const FieldProblem& prob,
                                  const std::map<std::string, std::string>& comps) {
  return parse_connection(prob, comps);
}

MomentumSection section_of(const FieldProblem& prob,
                           const std::map<std::string, std::string>& comps) {
  return parse_momentum_section(prob, comps);
}

}  // namespace

TEST_CASE("field EL equations: wave, Laplace, free particle") {
  FieldProblem wave = wave_problem();
  CHECK(field_euler_lagrange(wave) == std::vector<Expr>{parse_in(wave, "u1_22 - u1_11")});

  FieldProblem laplace = FieldProblem::from_text(2, 1, 0, "(u1_1^2 + u1_2^2)/2");
  CHECK(field_euler_lagrange(laplace) ==
        std::vector<Expr>{parse_in(laplace, "-u1_11 - u1_22")});

  FieldProblem free_particle = FieldProblem::from_text(1, 1, 0, "u1_1^2/2");
  CHECK(field_euler_lagrange(free_particle) ==
        std::vector<Expr>{parse_in(free_particle, "-u1_11")});
}

TEST_CASE("elh energy E = p u - L") {
  FieldProblem wave = wave_problem();
  CHECK(elh_energy(wave) ==
        parse_in(wave, "P1_.1*u1_1 + P1_.2*u1_2 - (u1_1^2 - u1_2^2)/2"));

  FieldProblem mech_like = FieldProblem::from_text(1, 1, 0, "u1_1^2/2");
  CHECK(elh_energy(mech_like) == parse_in(mech_like, "P1_.1*u1_1 - u1_1^2/2"));

  FieldProblem second = FieldProblem::from_text(1, 1, 1, "u1_11^2/2");
  CHECK(elh_energy(second) ==
        parse_in(second, "P1_.1*u1_1 + P1_1.1*u1_11 - u1_11^2/2"));
}

TEST_CASE("elh pde system: wave transcription") {
  FieldProblem wave = wave_problem();
  DerivedSystem sys = elh_pde_system(wave);
  const EquationGroup* con = sys.find("constraint");
  REQUIRE(con);
  REQUIRE(con->equations.size() == 2);
  CHECK(con->equations[0].lhs_label == "P1_.1");
  CHECK(con->equations[0].rhs == parse_in(wave, "u1_1"));
  CHECK(con->equations[1].lhs_label == "P1_.2");
  CHECK(con->equations[1].rhs == parse_in(wave, "-u1_2"));
  const EquationGroup* dyn = sys.find("dynamic");
  REQUIRE(dyn);
  REQUIRE(dyn->equations.size() == 1);
  CHECK(dyn->equations[0].lhs_label == "d(P1_.1)/dx1 + d(P1_.2)/dx2");
  CHECK(is_proved_zero(dyn->equations[0].rhs));
}

TEST_CASE("elh pde system: second-order constraints") {
  FieldProblem second = FieldProblem::from_text(1, 1, 1, "u1_11^2/2");
  DerivedSystem sys = elh_pde_system(second);
  const EquationGroup* con = sys.find("constraint");
  REQUIRE(con);
  REQUIRE(con->equations.size() == 1);
  CHECK(con->equations[0].lhs_label == "P1_1.1");
  CHECK(con->equations[0].rhs == parse_in(second, "u1_11"));

  FieldProblem mixed = FieldProblem::from_text(2, 1, 1, "u1_12^2/2");
  DerivedSystem msys = elh_pde_system(mixed);
  const EquationGroup* mcon = msys.find("constraint");
  REQUIRE(mcon);
  bool found = false;
  for (const auto& eq : mcon->equations) {
    if (eq.lhs_label == "P1_1.2 + P1_2.1") {
      found = true;
      CHECK(eq.rhs == parse_in(mixed, "u1_12"));
      REQUIRE(eq.lhs.has_value());
      CHECK(*eq.lhs == parse_in(mixed, "P1_1.2 + P1_2.1"));
    }
  }
  CHECK(found);
}

TEST_CASE("implicit hamilton pdes substitute ubar markers") {
  FieldProblem wave = wave_problem();
  DerivedSystem sys = implicit_hamilton_pde_system(wave);
  CHECK(sys.find("kinematic")->equations.empty());  // |I| < k is empty at k = 0
  const EquationGroup* con = sys.find("constraint");
  CHECK(con->equations[0].rhs == parse_in(wave, "ubar1_1"));
  CHECK(con->equations[1].rhs == parse_in(wave, "-ubar1_2"));

  FieldProblem second = FieldProblem::from_text(1, 1, 1, "u1_11^2/2");
  DerivedSystem ssys = implicit_hamilton_pde_system(second);
  REQUIRE(ssys.find("kinematic")->equations.size() == 1);  // only |I| = 0
  CHECK(ssys.find("kinematic")->equations[0].lhs_label == "d(u1)/dx1");
  CHECK(ssys.find("constraint")->equations[0].rhs == parse_in(second, "ubar1_11"));
}

TEST_CASE("horizontal derivative along a connection") {
  FieldProblem prob = FieldProblem::from_text(2, 1, 0, "u1_1^2/2", {"c1", "c2", "a"});
  HolonomicConnection constant_conn = connection_of(prob, {{"u1_1", "c1"}, {"u1_2", "c2"}});
  CHECK(horizontal_derivative(parse_in(prob, "u1"), 1, constant_conn) == parse_in(prob, "c1"));
  CHECK(horizontal_derivative(parse_in(prob, "x2"), 1, constant_conn) ==
        constant(std::int64_t{0}));
  CHECK(horizontal_derivative(parse_in(prob, "x1"), 1, constant_conn) ==
        constant(std::int64_t{1}));

  HolonomicConnection linear = connection_of(prob, {{"u1_1", "a*u1"}, {"u1_2", "a*u1"}});
  CHECK(horizontal_derivative(parse_in(prob, "u1^2"), 1, linear) == parse_in(prob, "2*a*u1^2"));
  CHECK_THROWS_AS(horizontal_derivative(parse_in(prob, "u1_1"), 1, linear), Error);
}

TEST_CASE("flatness residuals") {
  FieldProblem prob = FieldProblem::from_text(2, 1, 0, "u1_1^2/2", {"a", "b", "c1", "c2"});
  auto flat_family = flatness_residuals(connection_of(prob, {{"u1_1", "a*u1"}, {"u1_2", "b*u1"}}));
  REQUIRE(flat_family.size() == 1);
  CHECK(is_proved_zero(flat_family[0].residual));

  auto constants = flatness_residuals(connection_of(prob, {{"u1_1", "c1"}, {"u1_2", "c2"}}));
  CHECK(is_proved_zero(constants[0].residual));

  auto twisted = flatness_residuals(connection_of(prob, {{"u1_1", "u1"}, {"u1_2", "x1"}}));
  CHECK(twisted[0].residual == parse_in(prob, "1 - x1"));
}

TEST_CASE("field HJ residuals: wave solution family") {
  FieldProblem wave = wave_problem({"a", "b", "c1", "c2"});
  HolonomicConnection nabla = connection_of(wave, {{"u1_1", "a*u1"}, {"u1_2", "a*u1"}});
  MomentumSection T = section_of(wave, {{"P1_.1", "a*u1"}, {"P1_.2", "-a*u1"}});
  FieldResidualSet set = field_hj_residuals(wave, nabla, T);
  REQUIRE(set.constraint.size() == 2);
  REQUIRE(set.evolution.size() == 1);
  REQUIRE(set.flatness.size() == 1);
  for (const auto& r : set.constraint) CHECK(is_proved_zero(r.residual));
  CHECK(is_proved_zero(set.evolution[0].residual));
  CHECK(is_proved_zero(set.flatness[0].residual));
}

TEST_CASE("field HJ residuals: constants solve the Laplace problem") {
  FieldProblem laplace = FieldProblem::from_text(2, 1, 0, "(u1_1^2 + u1_2^2)/2", {"c1", "c2"});
  HolonomicConnection nabla = connection_of(laplace, {{"u1_1", "c1"}, {"u1_2", "c2"}});
  MomentumSection T = section_of(laplace, {{"P1_.1", "c1"}, {"P1_.2", "c2"}});
  FieldResidualSet set = field_hj_residuals(laplace, nabla, T);
  for (const auto& r : set.constraint) CHECK(is_proved_zero(r.residual));
  for (const auto& r : set.evolution) CHECK(is_proved_zero(r.residual));
  for (const auto& r : set.flatness) CHECK(is_proved_zero(r.residual));
}

TEST_CASE("field HJ residuals: detuned wave family is obstructed") {
  FieldProblem wave = wave_problem({"a", "b"});
  HolonomicConnection nabla = connection_of(wave, {{"u1_1", "a*u1"}, {"u1_2", "b*u1"}});
  MomentumSection T = auto_fill_momentum(wave, nabla);
  // R1 determines T uniquely at k = 0.
  CHECK(T.component(1, MultiIndex(2), 1) == parse_in(wave, "a*u1"));
  CHECK(T.component(1, MultiIndex(2), 2) == parse_in(wave, "-b*u1"));
  FieldResidualSet set = field_hj_residuals(wave, nabla, T);
  for (const auto& r : set.constraint) CHECK(is_proved_zero(r.residual));
  CHECK(set.evolution[0].residual == parse_in(wave, "a^2*u1 - b^2*u1"));
  CHECK(is_proved_zero(set.flatness[0].residual));
}

TEST_CASE("momentum gauge shift: identity, swap, and invariance") {
  FieldProblem prob = FieldProblem::from_text(2, 1, 1, "u1_11^2/2", {"c"});
  const JetContext& ctx = prob.ctx();
  auto mi = [&](std::initializer_list<int> idx) { return MultiIndex(2, idx); };

  std::map<std::string, std::string> t_comps;
  for (int i = 1; i <= 2; ++i) {
    t_comps[JetContext::momentum_name(1, MultiIndex(2), i)] = "u1*x" + std::to_string(i);
    t_comps[JetContext::momentum_name(1, mi({1}), i)] = "u1_1 + x" + std::to_string(i);
    t_comps[JetContext::momentum_name(1, mi({2}), i)] = "u1_2^2";
  }
  MomentumSection T = section_of(prob, t_comps);

  GaugeShift zero;
  zero[{1, mi({1}), 2}] = constant(std::int64_t{0});
  zero[{1, mi({2}), 1}] = constant(std::int64_t{0});
  MomentumSection same = momentum_gauge_shift(T, zero);
  CHECK(same.component(1, mi({1}), 2) == T.component(1, mi({1}), 2));

  GaugeShift swap;
  swap[{1, mi({1}), 2}] = parse_in(prob, "c");
  swap[{1, mi({2}), 1}] = parse_in(prob, "-c");
  MomentumSection shifted = momentum_gauge_shift(T, swap);
  CHECK(shifted.component(1, mi({1}), 2) == parse_in(prob, "u1_1 + x2 + c"));
  CHECK(shifted.component(1, mi({2}), 1) == parse_in(prob, "u1_2^2 - c"));
  CHECK(shifted.component(1, mi({1}), 1) == T.component(1, mi({1}), 1));

  // Residuals are unchanged component-wise.
  std::map<std::string, std::string> n_comps{
      {"u1_11", "u1"}, {"u1_12", "u1_1*u1_2"}, {"u1_22", "x1 + u1_2"}};
  HolonomicConnection nabla = connection_of(prob, n_comps);
  FieldResidualSet before = field_hj_residuals(prob, nabla, T);
  FieldResidualSet after = field_hj_residuals(prob, nabla, shifted);
  REQUIRE(before.constraint.size() == after.constraint.size());
  for (std::size_t i = 0; i < before.constraint.size(); ++i)
    CHECK(before.constraint[i].residual == after.constraint[i].residual);
  REQUIRE(before.evolution.size() == after.evolution.size());
  for (std::size_t i = 0; i < before.evolution.size(); ++i)
    CHECK(before.evolution[i].residual == after.evolution[i].residual);

  CHECK_THROWS_AS(momentum_gauge_shift(
                      section_of(wave_problem(), {{"P1_.1", "u1"}, {"P1_.2", "u1"}}), zero),
                  Error);
  GaugeShift bad;
  bad[{1, mi({1}), 2}] = parse_in(prob, "c");
  bad[{1, mi({2}), 1}] = parse_in(prob, "c");
  CHECK_THROWS_AS(momentum_gauge_shift(T, bad), Error);
  (void)ctx;
}

TEST_CASE("auto-fill cascades beyond k = 0") {
  FieldProblem prob = FieldProblem::from_text(2, 1, 1, "u1_11^2/2 + u1_12^2");
  HolonomicConnection nabla = connection_of(
      prob, {{"u1_11", "u1"}, {"u1_12", "u1_1"}, {"u1_22", "u1_2"}});
  MomentumSection T = auto_fill_momentum(prob, nabla);
  // Top level: P1_1.1 = dL/du1_11 o nabla; mixed row split evenly.
  CHECK(T.component(1, MultiIndex(2, {1}), 1) == parse_in(prob, "u1"));
  CHECK(T.component(1, MultiIndex(2, {1}), 2) == parse_in(prob, "u1_1"));
  CHECK(T.component(1, MultiIndex(2, {2}), 1) == parse_in(prob, "u1_1"));
  FieldResidualSet set = field_hj_residuals(prob, nabla, T);
  for (const auto& r : set.constraint) CHECK(is_proved_zero(r.residual));
  for (const auto& r : set.evolution) {
    if (r.I.order() > 0) CHECK(is_proved_zero(r.residual));
  }
}

TEST_CASE("mechanics embedding: n = 1, k = 0 reproduces the mechanics pipeline") {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    int dof = 1 + trial % 2;
    mech::MechProblem mp = hjet_tests::random_mech_problem(rng, dof);

    // Renaming q^i = u<i>, v^i = u<i>_1, a^i = u<i>_11, p_i = P<i>_.1.
    Bindings to_field;
    Bindings to_mech;
    auto fp_ctx = std::make_shared<JetContext>(1, dof, 0);
    MultiIndex empty(1);
    MultiIndex first = empty.append(1);
    MultiIndex second = first.append(1);
    for (int i = 1; i <= dof; ++i) {
      to_field.emplace(mp.q(i).name(), sym(fp_ctx->jet(i, empty)));
      to_field.emplace(mp.v(i).name(), sym(fp_ctx->jet(i, first)));
      to_mech.emplace(fp_ctx->jet(i, empty).name(), sym(mp.q(i)));
      to_mech.emplace(fp_ctx->jet(i, first).name(), sym(mp.v(i)));
      to_mech.emplace(fp_ctx->jet(i, second).name(), sym(mp.a(i)));
      to_mech.emplace(fp_ctx->momentum(i, empty, 1).name(), sym(mp.p(i)));
    }
    FieldProblem fp(fp_ctx, substitute(mp.lagrangian(), to_field));

    // Euler-Lagrange.
    std::vector<Expr> mech_el = mech::euler_lagrange(mp);
    std::vector<Expr> field_el = field_euler_lagrange(fp);
    REQUIRE(field_el.size() == mech_el.size());
    for (int i = 0; i < dof; ++i) CHECK(substitute(field_el[i], to_mech) == mech_el[i]);

    // ELH groups.
    DerivedSystem ms = mech::elh_system(mp);
    DerivedSystem fs = elh_pde_system(fp);
    for (const char* group : {"kinematic", "dynamic", "constraint"}) {
      const EquationGroup* mg = ms.find(group);
      const EquationGroup* fg = fs.find(group);
      REQUIRE(mg);
      REQUIRE(fg);
      REQUIRE(mg->equations.size() == fg->equations.size());
      for (std::size_t e = 0; e < mg->equations.size(); ++e) {
        CHECK(substitute(fg->equations[e].rhs, to_mech) == mg->equations[e].rhs);
        if (mg->equations[e].lhs.has_value())
          CHECK(substitute(*fg->equations[e].lhs, to_mech) == *mg->equations[e].lhs);
      }
    }

    // HJ residuals for a random candidate.
    mech::VectorFieldCandidate nabla = hjet_tests::random_vector_field(rng, mp);
    mech::MomentumMap T{hjet_tests::random_vector_field(rng, mp).components};
    std::map<JetKey, Expr> conn;
    std::map<MomKey, Expr> sect;
    for (int i = 1; i <= dof; ++i) {
      conn.emplace(JetKey{i, first}, substitute(nabla.components[i - 1], to_field));
      sect.emplace(MomKey{i, empty, 1}, substitute(T.components[i - 1], to_field));
    }
    HolonomicConnection fnabla(fp_ctx, std::move(conn));
    MomentumSection fT(fp_ctx, std::move(sect));

    mech::HJCandidateResiduals mech_r = mech::hj_candidate_residuals(mp, nabla, T);
    FieldResidualSet field_r = field_hj_residuals(fp, fnabla, fT);
    CHECK(field_r.flatness.empty());
    REQUIRE(field_r.constraint.size() == static_cast<std::size_t>(dof));
    REQUIRE(field_r.evolution.size() == static_cast<std::size_t>(dof));
    for (const auto& r : field_r.constraint)
      CHECK(substitute(r.residual, to_mech) == mech_r.membership[r.alpha - 1]);
    for (const auto& r : field_r.evolution)
      CHECK(substitute(r.residual, to_mech) == mech_r.evolution[r.alpha - 1]);
  }
}

TEST_CASE("auto-fill cascades two levels at k = 2") {
  // Third-order slices of the order-6 EL equation of L = u_111^2/2:
  // u_111 = 6 carves out the cubics, which all satisfy u^(6) = 0.
  FieldProblem prob = FieldProblem::from_text(1, 1, 2, "u1_111^2/2");
  HolonomicConnection nabla = connection_of(prob, {{"u1_111", "6"}});
  MomentumSection T = auto_fill_momentum(prob, nabla);
  FieldResidualSet set = field_hj_residuals(prob, nabla, T);
  for (const auto& r : set.constraint) CHECK(is_proved_zero(r.residual));
  for (const auto& r : set.evolution) CHECK(is_proved_zero(r.residual));
}

TEST_CASE("three base dimensions: constants solve the 3d Laplace problem") {
  FieldProblem prob =
      FieldProblem::from_text(3, 1, 0, "(u1_1^2 + u1_2^2 + u1_3^2)/2", {"c1", "c2", "c3"});
  HolonomicConnection nabla =
      connection_of(prob, {{"u1_1", "c1"}, {"u1_2", "c2"}, {"u1_3", "c3"}});
  MomentumSection T = auto_fill_momentum(prob, nabla);
  FieldResidualSet set = field_hj_residuals(prob, nabla, T);
  CHECK(set.constraint.size() == 3);
  CHECK(set.evolution.size() == 1);
  CHECK(set.flatness.size() == 3);  // pairs (1,2), (1,3), (2,3)
  for (const auto& r : set.constraint) CHECK(is_proved_zero(r.residual));
  for (const auto& r : set.evolution) CHECK(is_proved_zero(r.residual));
  for (const auto& r : set.flatness) CHECK(is_proved_zero(r.residual));
}

TEST_CASE("two dependent variables couple through the EL equations") {
  FieldProblem prob = FieldProblem::from_text(1, 2, 0, "u1_1*u2_1 - u1*u2");
  std::vector<Expr> el = field_euler_lagrange(prob);
  REQUIRE(el.size() == 2);
  CHECK(el[0] == parse_in(prob, "-u2 - u2_11"));
  CHECK(el[1] == parse_in(prob, "-u1 - u1_11"));
}

TEST_CASE("validation: context and dependency rules") {
  FieldProblem wave = wave_problem();
  CHECK_THROWS_AS(FieldProblem::from_text(2, 1, 0, "P1_.1*u1_1"), Error);
  CHECK_THROWS_AS(FieldProblem::from_text(2, 1, 0, "u1_11^2"), Error);  // beyond k+1
  CHECK_THROWS_AS(parse_connection(wave, {{"u1_1", "u1"}}), Error);     // missing component
  CHECK_THROWS_AS(parse_connection(wave, {{"u1_1", "u1_1"}, {"u1_2", "u1"}}), Error);

  FieldProblem other = wave_problem();
  HolonomicConnection nabla = connection_of(other, {{"u1_1", "u1"}, {"u1_2", "u1"}});
  MomentumSection T = section_of(other, {{"P1_.1", "u1"}, {"P1_.2", "-u1"}});
  CHECK_THROWS_AS(field_hj_residuals(wave, nabla, T), Error);  // different context object
}
