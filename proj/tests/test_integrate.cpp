#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hjet/integrate.hpp"
#include "hjet/parser.hpp"

using namespace hjet;
using namespace hjet::num;

namespace {

mech::MechProblem inverted_oscillator() {
  return mech::MechProblem::from_text(1, "(v1^2 + q1^2)/2");
}

mech::VectorFieldCandidate mech_field(const mech::MechProblem& prob, const std::string& text) {
  return {{parse_expr(text, prob.symbols())}};
}

field::FieldProblem wave_problem() {
  return field::FieldProblem::from_text(2, 1, 0, "(u1_1^2 - u1_2^2)/2");
}

field::HolonomicConnection wave_connection(const field::FieldProblem& prob,
                                           const std::string& c1, const std::string& c2) {
  return field::parse_connection(prob, {{"u1_1", c1}, {"u1_2", c2}});
}

GridSpec square_grid(double lo, double hi, int count) {
  GridSpec g;
  g.origin = {lo, lo};
  g.step = {(hi - lo) / (count - 1), (hi - lo) / (count - 1)};
  g.count = {count, count};
  return g;
}

}  // namespace

TEST_CASE("central stencil weights") {
  CHECK(central_stencil(1) == std::vector<double>{-0.5, 0.0, 0.5});
  CHECK(central_stencil(2) == std::vector<double>{1.0, -2.0, 1.0});
  CHECK(central_stencil(4) == std::vector<double>{1.0, -4.0, 6.0, -4.0, 1.0});
  std::vector<double> w3 = central_stencil(3);
  std::vector<double> expected3{-0.5, 1.0, 0.0, -1.0, 0.5};
  REQUIRE(w3.size() == expected3.size());
  for (std::size_t i = 0; i < w3.size(); ++i) CHECK(w3[i] == doctest::Approx(expected3[i]));
}

TEST_CASE("integrate_vector_field: constant, exponential, zero") {
  auto prob = inverted_oscillator();
  CurveSolution unit = integrate_vector_field(prob, mech_field(prob, "1"), {0.0}, 0.0, 1.0, 0.1);
  CHECK(unit.states.size() == 11);
  CHECK(unit.states.back()[0] == doctest::Approx(1.0).epsilon(1e-15));

  CurveSolution expo = integrate_vector_field(prob, mech_field(prob, "q1"), {1.0}, 0.0, 1.0, 1e-3);
  CHECK(std::abs(expo.states.back()[0] - std::exp(1.0)) <= 1e-10);

  CurveSolution still = integrate_vector_field(prob, mech_field(prob, "0"), {1.0}, 0.0, 1.0, 0.1);
  for (const auto& s : still.states) CHECK(s[0] == 1.0);
}

TEST_CASE("integrate_vector_field reports blow-up with the step index") {
  auto prob = inverted_oscillator();
  // dq/dt = q^2 from q(0)=1 blows up at t=1.
  CHECK_THROWS_AS(
      integrate_vector_field(prob, mech_field(prob, "q1^2"), {1.0}, 0.0, 2.0, 1e-3),
      NumericError);
}

TEST_CASE("integrate_connection matches exp(a(t+x))") {
  auto prob = wave_problem();
  auto nabla = wave_connection(prob, "u1", "u1");
  SectionSolution sol = integrate_connection(prob, nabla, {1.0}, square_grid(0.0, 1.0, 101));
  double worst = 0.0;
  for (int i = 0; i < 101; ++i) {
    for (int j = 0; j < 101; ++j) {
      std::vector<int> coords{i, j};
      double exact = std::exp(sol.node_x(coords)[0] + sol.node_x(coords)[1]);
      worst = std::max(worst, std::abs(sol.values[sol.node(coords)][0] - exact));
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("integrate_connection: linear fields are exact") {
  auto prob = field::FieldProblem::from_text(2, 1, 0, "u1_1^2/2", {"c1", "c2"});
  auto nabla = field::parse_connection(prob, {{"u1_1", "c1"}, {"u1_2", "c2"}});
  field::FieldProblem bound(prob.ctx_ptr(),
                            prob.lagrangian(), {{"c1", 0.75}, {"c2", -0.5}});
  SectionSolution sol = integrate_connection(bound, nabla, {0.0}, square_grid(0.0, 1.0, 11));
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 11; ++j) {
      std::vector<int> coords{i, j};
      auto x = sol.node_x(coords);
      CHECK(sol.values[sol.node(coords)][0] ==
            doctest::Approx(0.75 * x[0] - 0.5 * x[1]).epsilon(1e-13));
    }
  }
}

TEST_CASE("integrate_connection: flat sweeps are path independent") {
  auto prob = wave_problem();
  auto nabla = wave_connection(prob, "u1", "u1");
  GridSpec grid = square_grid(0.0, 1.0, 51);
  SectionSolution fwd = integrate_connection(prob, nabla, {1.0}, grid);
  ConnectionIntegrationOptions reversed;
  reversed.axis_order = {2, 1};
  SectionSolution rev = integrate_connection(prob, nabla, {1.0}, grid, reversed);
  double worst = 0.0;
  for (std::size_t node = 0; node < fwd.values.size(); ++node)
    worst = std::max(worst, std::abs(fwd.values[node][0] - rev.values[node][0]));
  CHECK(worst <= 1e-8);
}

TEST_CASE("integrate_connection refuses non-flat connections") {
  auto prob = wave_problem();
  auto nabla = wave_connection(prob, "u1", "x1");
  CHECK_THROWS_AS(integrate_connection(prob, nabla, {1.0}, square_grid(0.0, 1.0, 11)), Error);
  ConnectionIntegrationOptions forced;
  forced.force = true;
  CHECK_NOTHROW(integrate_connection(prob, nabla, {1.0}, square_grid(0.0, 1.0, 11), forced));
}

TEST_CASE("verify_el on trajectories") {
  auto free_particle = mech::MechProblem::from_text(1, "v1^2/2");
  CurveSolution line;
  line.t0 = 0.0;
  line.h = 0.01;
  for (int s = 0; s <= 100; ++s) line.states.push_back({line.h * s});
  ResidualReport straight = verify_el(free_particle, line);
  CHECK(straight.verdict == Verdict::kSolution);
  CHECK(straight.max_abs() <= 1e-11);  // pure rounding through the h^2 stencil

  auto prob = inverted_oscillator();
  CurveSolution expo = integrate_vector_field(prob, mech_field(prob, "q1"), {1.0}, 0.0, 1.0, 1e-3);
  ResidualReport report = verify_el(prob, expo);
  CHECK(report.verdict == Verdict::kSolution);
  CHECK(report.max_abs() <= 1e-6);
}

TEST_CASE("verify_el on sections: wave residual at stencil accuracy") {
  auto prob = wave_problem();
  SectionSolution sol;
  sol.ctx = prob.ctx_ptr();
  sol.grid = square_grid(0.0, 1.0, 101);
  sol.state_index = {{1, MultiIndex(2)}};
  sol.state_names = {"u1"};
  sol.values.resize(sol.grid.nodes());
  for (int i = 0; i < 101; ++i) {
    for (int j = 0; j < 101; ++j) {
      std::vector<int> coords{i, j};
      auto x = sol.node_x(coords);
      sol.values[sol.node(coords)] = {std::exp(x[0] + x[1])};
    }
  }
  ResidualReport report = verify_el(prob, sol);
  CHECK(report.verdict == Verdict::kSolution);
  CHECK(report.max_abs() <= 1e-4);
}

TEST_CASE("verify_el flags non-solutions (negative control)") {
  auto harmonic = mech::MechProblem::from_text(1, "(v1^2 - q1^2)/2");
  CurveSolution expo =
      integrate_vector_field(harmonic, mech_field(harmonic, "q1"), {1.0}, 0.0, 1.0, 1e-3);
  ResidualReport report = verify_el(harmonic, expo);
  CHECK(report.verdict == Verdict::kNotSolution);
  CHECK(report.max_abs() >= 0.5);  // residual -2q along e^t
}

TEST_CASE("verify_hamilton along curves") {
  auto prob = inverted_oscillator();
  CurveSolution expo = integrate_vector_field(prob, mech_field(prob, "q1"), {1.0}, 0.0, 1.0, 1e-3);
  mech::MomentumMap T{{parse_expr("q1", prob.symbols())}};
  ResidualReport report = verify_hamilton(prob, T, expo);
  CHECK(report.verdict == Verdict::kSolution);
  CHECK(report.max_abs() <= 1e-6);

  auto free_particle = mech::MechProblem::from_text(1, "v1^2/2", {"c"});
  mech::MechProblem bound(1, free_particle.lagrangian(),
                          std::make_shared<SymbolTable>(free_particle.symbols()), {{"c", 0.5}});
  CurveSolution line =
      integrate_vector_field(bound, mech_field(bound, "c"), {0.0}, 0.0, 1.0, 0.01);
  mech::MomentumMap Tc{{parse_expr("c", bound.symbols())}};
  ResidualReport straight = verify_hamilton(bound, Tc, line);
  CHECK(straight.max_abs() <= 1e-11);  // pure rounding through the h^2 stencil
}

TEST_CASE("verify_hamilton along sections: wave divergence") {
  auto prob = wave_problem();
  auto nabla = wave_connection(prob, "u1", "u1");
  SectionSolution sol = integrate_connection(prob, nabla, {1.0}, square_grid(0.0, 1.0, 101));
  auto T = field::parse_momentum_section(prob, {{"P1_.1", "u1"}, {"P1_.2", "-u1"}});
  ResidualReport report = verify_hamilton(prob, T, sol);
  CHECK(report.verdict == Verdict::kSolution);
  for (const auto& entry : report.residuals) {
    if (entry.name.rfind("evolution_", 0) == 0) CHECK(entry.max_abs <= 1e-4);
  }
}

TEST_CASE("second-order theory end-to-end: k = 1 candidate on a line") {
  // L = u_11^2/2 has EL equation d^4 u/dx^4 = 0; the connection u_11 = 2
  // slices out the parabolas u = u0 + u1 x + x^2, all of them solutions.
  auto prob = field::FieldProblem::from_text(1, 1, 1, "u1_11^2/2");
  auto nabla = field::parse_connection(prob, {{"u1_11", "2"}});
  field::MomentumSection T = field::auto_fill_momentum(prob, nabla);
  field::FieldResidualSet set = field::field_hj_residuals(prob, nabla, T);
  for (const auto& r : set.constraint) CHECK(is_proved_zero(r.residual));
  for (const auto& r : set.evolution) CHECK(is_proved_zero(r.residual));
  CHECK(set.flatness.empty());  // single base axis

  GridSpec grid;
  grid.origin = {0.0};
  grid.step = {0.02};
  grid.count = {51};
  num::SectionSolution sol = num::integrate_connection(prob, nabla, {1.0, 1.0}, grid);
  for (int i = 0; i < 51; ++i) {
    double x = 0.02 * i;
    CHECK(sol.values[sol.node({i})][0] == doctest::Approx(1.0 + x + x * x).epsilon(1e-12));
    CHECK(sol.values[sol.node({i})][1] == doctest::Approx(1.0 + 2 * x).epsilon(1e-12));
  }

  // EL verification needs the 4-point-deep central stencil (margin 2).
  ResidualReport el = num::verify_el(prob, sol);
  CHECK(el.verdict == Verdict::kSolution);
  CHECK(el.max_abs() <= 1e-6);

  ResidualReport ham = num::verify_hamilton(prob, T, sol);
  CHECK(ham.verdict == Verdict::kSolution);

  GridSpec coarse;
  coarse.origin = {0.0};
  coarse.step = {0.02};
  coarse.count = {4};  // too few nodes for margin 2
  num::SectionSolution small = num::integrate_connection(prob, nabla, {1.0, 1.0}, coarse);
  CHECK_THROWS_AS(num::verify_el(prob, small), NumericError);
}

TEST_CASE("convergence orders: RK4 and the central stencil") {
  auto prob = inverted_oscillator();
  auto rk4_error = [&](double h) {
    CurveSolution sol = integrate_vector_field(prob, mech_field(prob, "q1"), {1.0}, 0.0, 1.0, h);
    return std::abs(sol.states.back()[0] - std::exp(1.0));
  };
  ConvergenceResult rk4 = convergence_study(rk4_error, {0.2, 0.1, 0.05, 0.025});
  CHECK_FALSE(rk4.saturated);
  CHECK(rk4.slope == doctest::Approx(4.0).epsilon(0.05));

  auto stencil_error = [&](double h) {
    CurveSolution exact;
    exact.t0 = 0.0;
    exact.h = h;
    int steps = static_cast<int>(std::lround(1.0 / h));
    for (int s = 0; s <= steps; ++s) exact.states.push_back({std::exp(h * s)});
    return verify_el(prob, exact).max_abs();
  };
  ConvergenceResult stencil = convergence_study(stencil_error, {0.04, 0.02, 0.01, 0.005});
  CHECK(stencil.slope == doctest::Approx(2.0).epsilon(0.1));

  auto exact_error = [&](double h) {
    CurveSolution sol = integrate_vector_field(prob, mech_field(prob, "1"), {0.0}, 0.0, 1.0, h);
    return std::abs(sol.states.back()[0] - 1.0);
  };
  ConvergenceResult saturated = convergence_study(exact_error, {0.2, 0.1, 0.05});
  CHECK(saturated.saturated);

  CHECK_THROWS_AS(convergence_study(rk4_error, {0.1, 0.05}), Error);
}

TEST_CASE("energy is conserved along regular EL trajectories") {
  auto harmonic = mech::MechProblem::from_text(1, "(v1^2 - q1^2)/2");
  PhaseSolution sol = integrate_el_dynamics(harmonic, {1.0}, {0.0}, 0.0, 1.0, 1e-3);
  std::vector<double> energy = energy_series(harmonic, sol);
  double drift = 0.0;
  for (double e : energy) drift = std::max(drift, std::abs(e - energy.front()));
  CHECK(drift <= 1e-8);

  auto quartic = mech::MechProblem::from_text(1, "v1^2/2 - q1^4/4");
  PhaseSolution qsol = integrate_el_dynamics(quartic, {0.8}, {0.1}, 0.0, 1.0, 1e-3);
  std::vector<double> qenergy = energy_series(quartic, qsol);
  double qdrift = 0.0;
  for (double e : qenergy) qdrift = std::max(qdrift, std::abs(e - qenergy.front()));
  CHECK(qdrift <= 1e-8);
}

TEST_CASE("central velocities along a curve") {
  auto prob = inverted_oscillator();
  CurveSolution expo = integrate_vector_field(prob, mech_field(prob, "q1"), {1.0}, 0.0, 1.0, 1e-3);
  auto v = expo.central_velocities();
  REQUIRE(v.size() == expo.states.size());
  for (std::size_t s = 0; s < v.size(); s += 100)
    CHECK(v[s][0] == doctest::Approx(std::exp(expo.time(s))).epsilon(1e-5));
}

TEST_CASE("grid guards: too-coarse stencils are rejected") {
  auto prob = inverted_oscillator();
  CurveSolution tiny;
  tiny.t0 = 0.0;
  tiny.h = 0.1;
  tiny.states = {{1.0}, {1.1}};
  CHECK_THROWS_AS(verify_el(prob, tiny), NumericError);
}

TEST_CASE("csv emission: header row and dot decimals") {
  namespace fs = std::filesystem;
  auto prob = inverted_oscillator();
  CurveSolution sol = integrate_vector_field(prob, mech_field(prob, "q1"), {1.0}, 0.0, 0.2, 0.1);
  fs::path path = fs::temp_directory_path() / "hjet_test_curve.csv";
  write_curve_csv(prob, sol, path.string());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,q1");
  std::string row;
  std::getline(in, row);
  CHECK(row == "0,1");
  std::getline(in, row);
  CHECK(row.find("0.1,1.105170") == 0);
  fs::remove(path);

  auto wave = wave_problem();
  auto nabla = wave_connection(wave, "u1", "u1");
  SectionSolution section = integrate_connection(wave, nabla, {1.0}, square_grid(0.0, 1.0, 3));
  fs::path spath = fs::temp_directory_path() / "hjet_test_section.csv";
  write_section_csv(section, spath.string());
  std::ifstream sin_file(spath);
  std::getline(sin_file, header);
  CHECK(header == "x1,x2,u1");
  fs::remove(spath);
}
