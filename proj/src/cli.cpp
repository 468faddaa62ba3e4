#include "hjet/cli.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hjet/field_theory.hpp"
#include "hjet/integrate.hpp"
#include "hjet/mechanics.hpp"
#include "hjet/parser.hpp"
#include "hjet/sampling.hpp"

namespace hjet::cli {

namespace {

using json = nlohmann::json;

std::string format_value(double v) {
  char buf[32];
  auto result = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip
  return std::string(buf, result.ptr);
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw Error("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Problem and candidate files
// ---------------------------------------------------------------------------

struct LoadedProblem {
  std::optional<mech::MechProblem> mechanics;
  std::optional<field::FieldProblem> field;
  Bindings parameter_bindings;  // exact values for residual normal forms
  EvalEnv parameter_env;

  bool is_mech() const { return mechanics.has_value(); }
  const SymbolTable& symbols() const {
    return is_mech() ? mechanics->symbols() : field->ctx().symbols();
  }
};

int require_positive_int(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer() || j.at(key).get<int>() < (key[0] == 'k' ? 0 : 1))
    throw Error(std::string("problem file needs a valid '") + key + "'");
  return j.at(key).get<int>();
}

LoadedProblem load_problem(const std::string& path) {
  json j = load_json_file(path);
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw Error(path + ": problem file needs a 'kind' of mechanics or field");
  std::string kind = j.at("kind").get<std::string>();
  if (!j.contains("lagrangian") || !j.at("lagrangian").is_string())
    throw Error(path + ": problem file needs a 'lagrangian' expression string");
  std::string lagrangian = j.at("lagrangian").get<std::string>();

  std::vector<std::string> param_names;
  Bindings param_bindings;
  EvalEnv param_env;
  if (j.contains("parameters")) {
    if (!j.at("parameters").is_object()) throw Error(path + ": 'parameters' must be an object");
    for (const auto& [name, value] : j.at("parameters").items()) {
      param_names.push_back(name);
      if (value.is_number_integer()) {
        param_bindings.emplace(name, constant(value.get<std::int64_t>()));
        param_env[name] = static_cast<double>(value.get<std::int64_t>());
      } else if (value.is_number()) {
        param_bindings.emplace(name, constant(value.get<double>()));
        param_env[name] = value.get<double>();
      } else {
        throw Error(path + ": parameter '" + name + "' must be a number");
      }
    }
  }

  LoadedProblem out;
  out.parameter_bindings = std::move(param_bindings);
  out.parameter_env = std::move(param_env);
  std::map<std::string, double> values(out.parameter_env.begin(), out.parameter_env.end());
  if (kind == "mechanics") {
    int dof = require_positive_int(j, "dof");
    out.mechanics = mech::MechProblem::from_text(dof, lagrangian, param_names, values);
  } else if (kind == "field") {
    int n = require_positive_int(j, "n");
    int m = require_positive_int(j, "m");
    int k = require_positive_int(j, "k");
    out.field = field::FieldProblem::from_text(n, m, k, lagrangian, param_names, values);
  } else {
    throw Error(path + ": unknown problem kind '" + kind + "'");
  }
  return out;
}

struct LoadedCandidate {
  std::map<std::string, std::string> nabla;
  std::map<std::string, std::string> T;
  std::optional<std::string> S;
  std::map<std::string, double> initial;
};

LoadedCandidate load_candidate(const std::string& path) {
  json j = load_json_file(path);
  if (!j.is_object()) throw Error(path + ": candidate file must be a JSON object");
  LoadedCandidate out;
  auto read_string_map = [&](const char* key, std::map<std::string, std::string>& into) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_object()) throw Error(path + ": '" + key + "' must be an object");
    for (const auto& [name, value] : j.at(key).items()) {
      if (!value.is_string()) throw Error(path + ": component '" + name + "' must be a string");
      into.emplace(name, value.get<std::string>());
    }
  };
  read_string_map("nabla", out.nabla);
  read_string_map("T", out.T);
  if (j.contains("S")) {
    if (!j.at("S").is_string()) throw Error(path + ": 'S' must be an expression string");
    out.S = j.at("S").get<std::string>();
  }
  if (j.contains("initial")) {
    if (!j.at("initial").is_object()) throw Error(path + ": 'initial' must be an object");
    for (const auto& [name, value] : j.at("initial").items()) {
      if (!value.is_number()) throw Error(path + ": initial value '" + name + "' must be a number");
      out.initial.emplace(name, value.get<double>());
    }
  }
  if (out.nabla.empty() && !out.S) throw Error(path + ": candidate needs 'nabla' or 'S'");
  return out;
}

// ---------------------------------------------------------------------------
// Shared option parsing
// ---------------------------------------------------------------------------

std::vector<std::pair<double, double>> parse_box_spec(const std::string& spec) {
  std::vector<std::pair<double, double>> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos) throw Error("box ranges look like lo:hi, got '" + item + "'");
    try {
      double lo = std::stod(item.substr(0, colon));
      double hi = std::stod(item.substr(colon + 1));
      if (!(lo < hi)) throw Error("box range must satisfy lo < hi: '" + item + "'");
      out.emplace_back(lo, hi);
    } catch (const std::invalid_argument&) {
      throw Error("invalid box range '" + item + "'");
    }
  }
  if (out.empty()) throw Error("empty box spec");
  return out;
}

std::vector<int> parse_grid_spec(const std::string& spec) {
  std::vector<int> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, 'x')) {
    try {
      int n = std::stoi(item);
      if (n < 2) throw Error("grid needs at least 2 nodes per axis");
      out.push_back(n);
    } catch (const std::invalid_argument&) {
      throw Error("invalid grid spec '" + spec + "'");
    }
  }
  if (out.empty()) throw Error("empty grid spec");
  return out;
}

/// Box over the residual variables: --box entries are matched by
/// position to `names` (one range replicated over all variables).
Box resolve_box(const std::vector<std::string>& names, const std::string& spec) {
  if (spec.empty()) return Box::unit(names);
  auto ranges = parse_box_spec(spec);
  if (ranges.size() == 1) ranges.assign(names.size(), ranges[0]);
  if (ranges.size() != names.size())
    throw Error("box has " + std::to_string(ranges.size()) + " ranges for " +
                std::to_string(names.size()) + " variables");
  Box box;
  box.names = names;
  for (auto [lo, hi] : ranges) {
    box.lo.push_back(lo);
    box.hi.push_back(hi);
  }
  return box;
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

json report_to_json(const ResidualReport& report, double elapsed_ms,
                    const std::vector<std::string>& notes) {
  json residuals = json::array();
  for (const auto& r : report.residuals) {
    residuals.push_back(
        {{"name", r.name}, {"symbolic_zero", r.symbolic_zero}, {"max_abs", r.max_abs}});
  }
  json tolerances = json::object();
  for (const auto& [name, value] : report.tolerances) tolerances[name] = value;
  json out = {{"residuals", residuals},
              {"verdict", verdict_name(report.verdict)},
              {"tolerances", tolerances},
              {"timings", {{"total_ms", elapsed_ms}}}};
  if (!notes.empty()) out["notes"] = notes;
  return out;
}

void print_report_text(std::ostream& os, const ResidualReport& report,
                       const std::vector<std::string>& notes) {
  for (const std::string& note : notes) os << "note: " << note << "\n";
  for (const auto& r : report.residuals) {
    os << "  " << r.name << ": ";
    if (r.symbolic_zero) {
      os << "proved-zero";
    } else {
      os << "max|.| = " << format_value(r.max_abs);
    }
    os << "\n";
  }
  os << "verdict: " << verdict_name(report.verdict) << "\n";
}

int verdict_exit_code(Verdict v) {
  switch (v) {
    case Verdict::kSolution: return 0;
    case Verdict::kNotSolution: return 1;
    case Verdict::kInconclusive: return 4;
  }
  return 2;
}

void emit_report(const ResidualReport& report, const std::vector<std::string>& notes,
                 double elapsed_ms, const std::string& format, const std::string& out_path,
                 std::ostream& os) {
  json j = report_to_json(report, elapsed_ms, notes);
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f.is_open()) throw Error("cannot open output file: " + out_path);
    f << j.dump(2) << "\n";
  }
  if (format == "json") {
    os << j.dump(2) << "\n";
  } else {
    print_report_text(os, report, notes);
  }
}

// ---------------------------------------------------------------------------
// derive
// ---------------------------------------------------------------------------

void append_residual_group(DerivedSystem& sys, const std::string& name,
                           const std::vector<Expr>& residuals) {
  EquationGroup g{name, {}};
  for (const Expr& r : residuals)
    g.equations.push_back({to_string(r), r, constant(std::int64_t{0})});
  sys.groups.push_back(std::move(g));
}

DerivedSystem derive_systems(const LoadedProblem& prob, const std::vector<std::string>& what) {
  DerivedSystem out;
  for (const std::string& item : what) {
    if (item == "el") {
      if (prob.is_mech()) {
        append_residual_group(out, "euler_lagrange", mech::euler_lagrange(*prob.mechanics));
      } else {
        append_residual_group(out, "euler_lagrange", field::field_euler_lagrange(*prob.field));
      }
    } else if (item == "elh") {
      DerivedSystem sys = prob.is_mech() ? mech::elh_system(*prob.mechanics)
                                         : field::elh_pde_system(*prob.field);
      for (auto& g : sys.groups) out.groups.push_back(std::move(g));
    } else if (item == "hamilton") {
      DerivedSystem sys = prob.is_mech() ? mech::implicit_hamilton_system(*prob.mechanics)
                                         : field::implicit_hamilton_pde_system(*prob.field);
      for (auto& g : sys.groups) {
        g.name = "hamilton_" + g.name;
        out.groups.push_back(std::move(g));
      }
    } else if (item == "constraint") {
      if (prob.is_mech()) {
        DerivedSystem sys = mech::elh_system(*prob.mechanics);
        out.groups.push_back(*sys.find("constraint"));
      } else {
        DerivedSystem sys = field::elh_pde_system(*prob.field);
        out.groups.push_back(*sys.find("constraint"));
      }
    } else {
      throw Error("unknown --what item '" + item + "' (expected el, elh, hamilton, constraint)");
    }
  }
  return out;
}

int cmd_derive(const std::string& problem_path, const std::vector<std::string>& what,
               const std::string& format, const std::string& out_path, std::ostream& os) {
  LoadedProblem prob = load_problem(problem_path);
  DerivedSystem sys = derive_systems(prob, what);
  json j = {{"groups", json::array()}};
  for (const auto& g : sys.groups) {
    json eqs = json::array();
    for (const auto& eq : g.equations)
      eqs.push_back({{"lhs", eq.lhs_label}, {"rhs", to_string(eq.rhs)}});
    j["groups"].push_back({{"name", g.name}, {"equations", eqs}});
  }
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f.is_open()) throw Error("cannot open output file: " + out_path);
    f << j.dump(2) << "\n";
  }
  if (format == "json") {
    os << j.dump(2) << "\n";
  } else {
    for (const auto& g : sys.groups) {
      os << "[" << g.name << "]\n";
      for (const auto& eq : g.equations)
        os << "  " << eq.lhs_label << " = " << to_string(eq.rhs) << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

struct CheckSettings {
  int samples = 100;
  unsigned seed = 0;
  double tol = 1e-9;
  std::string box;
};

std::vector<std::string> residual_variable_names(
    const LoadedProblem& prob, const std::vector<std::pair<std::string, Expr>>& residuals) {
  std::set<std::string> names;
  for (const auto& [unused, e] : residuals) {
    for (const Symbol& s : free_symbols(e)) {
      if (s.role() == SymbolRole::kParameter) continue;  // substituted upstream
      names.insert(s.name());
    }
  }
  (void)prob;
  return {names.begin(), names.end()};
}

struct CheckOutcome {
  ResidualReport report;
  std::vector<std::string> notes;
  // Candidate pieces reused by integrate: substituted components.
  std::optional<mech::VectorFieldCandidate> mech_nabla;
  std::optional<mech::MomentumMap> mech_T;
  std::optional<field::HolonomicConnection> field_nabla;
  std::optional<field::MomentumSection> field_T;
};

CheckOutcome run_check(const LoadedProblem& prob, const LoadedCandidate& cand,
                       const CheckSettings& settings) {
  CheckOutcome out;
  std::vector<std::pair<std::string, Expr>> residuals;
  const Bindings& params = prob.parameter_bindings;

  if (prob.is_mech()) {
    const mech::MechProblem& base = *prob.mechanics;
    mech::MechProblem mp(base.dof(), substitute(base.lagrangian(), params),
                         std::make_shared<SymbolTable>(base.symbols()),
                         base.parameter_values());
    if (cand.S) {
      mech::GeneratingFunction S{substitute(parse_expr(*cand.S, mp.symbols()), params)};
      mp.require_configuration_expr(S.value, "generating function");
      mech::ClassicalHJ hj = mech::classical_hj_residual(mp, S);
      for (std::size_t w = 0, idx = 0; w < hj.closedness.size(); ++w, ++idx)
        residuals.emplace_back("closedness_" + std::to_string(idx + 1), hj.closedness[w]);
      if (hj.energy) {
        residuals.emplace_back("energy", *hj.energy);
        out.mech_nabla = mech::VectorFieldCandidate{*hj.nabla};
        out.mech_T = mech::MomentumMap{hj.momenta};
      } else {
        out.notes.push_back("Legendre inverse is not symbolic; energy sampled via Newton");
      }
      Box box = resolve_box(residual_variable_names(prob, residuals), settings.box);
      out.report = symbolic_residual_report(residuals, box, {settings.samples, settings.seed, settings.tol},
                                            prob.parameter_env);
      if (!hj.energy) {
        // Numeric energy residual over configuration points.
        std::vector<std::string> qnames;
        for (int i = 1; i <= mp.dof(); ++i) qnames.push_back(mp.q(i).name());
        Box qbox = resolve_box(qnames, settings.box);
        double worst = 0.0;
        for (int s = 0; s < settings.samples; ++s) {
          std::vector<double> qpt = halton_point(static_cast<std::size_t>(s), qbox, settings.seed);
          worst = std::max(worst, std::abs(mech::classical_energy_at(mp, S, qpt)));
        }
        out.report.residuals.push_back({"energy", worst, false});
        Verdict numeric = worst > settings.tol ? Verdict::kNotSolution : Verdict::kInconclusive;
        out.report.verdict = combine_verdicts(out.report.verdict, numeric);
      }
      return out;
    }

    auto nabla_raw = mech::parse_vector_field(mp, cand.nabla);
    mech::VectorFieldCandidate nabla;
    for (const Expr& c : nabla_raw.components) nabla.components.push_back(substitute(c, params));
    if (!cand.T.empty()) {
      auto T_raw = mech::parse_momentum_map(mp, cand.T);
      mech::MomentumMap T;
      for (const Expr& c : T_raw.components) T.components.push_back(substitute(c, params));
      mech::HJCandidateResiduals hj = mech::hj_candidate_residuals(mp, nabla, T);
      for (int i = 0; i < mp.dof(); ++i) {
        residuals.emplace_back("membership_p" + std::to_string(i + 1), hj.membership[i]);
        residuals.emplace_back("evolution_p" + std::to_string(i + 1), hj.evolution[i]);
      }
      out.mech_T = std::move(T);
    } else {
      std::vector<Expr> g = mech::ghje_residual(mp, nabla);
      for (int i = 0; i < mp.dof(); ++i)
        residuals.emplace_back("ghje_q" + std::to_string(i + 1), g[i]);
      out.mech_T = mech::legendre_pullback(mp, nabla);
    }
    out.mech_nabla = std::move(nabla);
  } else {
    const field::FieldProblem& base = *prob.field;
    field::FieldProblem fp(base.ctx_ptr(), substitute(base.lagrangian(), params),
                           base.parameter_values());
    if (cand.S) throw Error("classical generating functions apply to mechanics problems only");
    auto conn_raw = field::parse_connection(fp, cand.nabla);
    std::map<field::JetKey, Expr> conn_subst;
    for (const auto& [key, e] : conn_raw.components()) conn_subst.emplace(key, substitute(e, params));
    field::HolonomicConnection nabla(fp.ctx_ptr(), std::move(conn_subst));

    std::optional<field::MomentumSection> T;
    if (!cand.T.empty()) {
      auto T_raw = field::parse_momentum_section(fp, cand.T);
      std::map<field::MomKey, Expr> t_subst;
      for (const auto& [key, e] : T_raw.components()) t_subst.emplace(key, substitute(e, params));
      T = field::MomentumSection(fp.ctx_ptr(), std::move(t_subst));
    } else {
      T = field::auto_fill_momentum(fp, nabla);
      out.notes.push_back("momentum section auto-filled from nabla");
    }

    field::FieldResidualSet set = field::field_hj_residuals(fp, nabla, *T);
    for (const auto& r : set.constraint)
      residuals.emplace_back("R1_" + JetContext::jet_name(r.alpha, r.I), r.residual);
    for (const auto& r : set.evolution)
      residuals.emplace_back("R2_" + JetContext::jet_name(r.alpha, r.I), r.residual);
    for (const auto& r : set.flatness)
      residuals.emplace_back("flatness_" + JetContext::jet_name(r.alpha, r.I) + ":" +
                                 std::to_string(r.i) + std::to_string(r.j),
                             r.residual);
    out.field_nabla = std::move(nabla);
    out.field_T = std::move(*T);
  }

  Box box = resolve_box(residual_variable_names(prob, residuals), settings.box);
  out.report = symbolic_residual_report(residuals, box,
                                        {settings.samples, settings.seed, settings.tol},
                                        prob.parameter_env);
  return out;
}

// ---------------------------------------------------------------------------
// integrate (with verify)
// ---------------------------------------------------------------------------

struct IntegrateSettings {
  CheckSettings check;
  std::string grid;
  double h = 0.0;
  std::string box;
  std::string out_csv;
  double tol = 0.0;
  bool force = false;
};

int cmd_integrate(const LoadedProblem& prob, const LoadedCandidate& cand,
                  const IntegrateSettings& settings, const std::string& format,
                  std::ostream& os) {
  auto started = std::chrono::steady_clock::now();
  CheckOutcome check = run_check(prob, cand, settings.check);
  if (check.report.verdict == Verdict::kNotSolution && !settings.force) {
    std::string failing;
    for (const auto& r : check.report.residuals) {
      if (!r.symbolic_zero && r.max_abs > check.report.tolerances.at("sampled_max_abs")) {
        if (!failing.empty()) failing += ", ";
        failing += r.name + " = " + format_value(r.max_abs);
      }
    }
    throw Error("candidate fails the symbolic check (" + failing +
                "); pass --force to integrate anyway");
  }

  ResidualReport verify;
  std::vector<std::string> notes = check.notes;

  if (prob.is_mech()) {
    const mech::MechProblem& mp = *prob.mechanics;
    if (!check.mech_nabla) throw Error("integration needs a vector field candidate");
    auto span = settings.box.empty() ? std::make_pair(0.0, 1.0) : parse_box_spec(settings.box)[0];
    double h = settings.h > 0 ? settings.h : 1e-3;
    std::vector<double> q0(mp.dof(), 1.0);
    for (int i = 1; i <= mp.dof(); ++i) {
      auto it = cand.initial.find(mp.q(i).name());
      if (it != cand.initial.end()) q0[i - 1] = it->second;
    }
    num::CurveSolution sol =
        num::integrate_vector_field(mp, *check.mech_nabla, q0, span.first, span.second, h);
    num::VerifyOptions vo{settings.tol};
    verify = num::verify_el(mp, sol, vo);
    ResidualReport ham = num::verify_hamilton(mp, *check.mech_T, sol, vo);
    for (auto& e : ham.residuals) verify.residuals.push_back(std::move(e));
    verify.verdict = combine_verdicts(verify.verdict, ham.verdict);
    if (!settings.out_csv.empty()) num::write_curve_csv(mp, sol, settings.out_csv);
  } else {
    const field::FieldProblem& fp = *prob.field;
    const JetContext& ctx = fp.ctx();
    num::GridSpec grid;
    auto ranges = settings.box.empty()
                      ? std::vector<std::pair<double, double>>(ctx.n(), {0.0, 1.0})
                      : parse_box_spec(settings.box);
    if (ranges.size() == 1 && ctx.n() > 1)
      ranges.assign(static_cast<std::size_t>(ctx.n()), ranges[0]);
    if (ranges.size() != static_cast<std::size_t>(ctx.n()))
      throw Error("--box must give one range per base axis");
    double h = settings.h > 0 ? settings.h : 0.01;
    std::vector<int> counts;
    if (!settings.grid.empty()) {
      counts = parse_grid_spec(settings.grid);
      if (counts.size() != static_cast<std::size_t>(ctx.n()))
        throw Error("--grid must give one count per base axis");
    }
    for (int d = 0; d < ctx.n(); ++d) {
      double extent = ranges[d].second - ranges[d].first;
      int count = counts.empty()
                      ? static_cast<int>(std::llround(extent / h)) + 1
                      : counts[d];
      grid.origin.push_back(ranges[d].first);
      grid.count.push_back(count);
      grid.step.push_back(extent / (count - 1));
    }

    std::vector<double> initial;
    for (int alpha = 1; alpha <= ctx.m(); ++alpha) {
      for (const MultiIndex& I : MultiIndex::all_up_to_order(ctx.n(), ctx.k())) {
        auto it = cand.initial.find(JetContext::jet_name(alpha, I));
        initial.push_back(it != cand.initial.end() ? it->second : 1.0);
      }
    }
    num::ConnectionIntegrationOptions copts;
    copts.force = settings.force;
    num::SectionSolution sol =
        num::integrate_connection(fp, *check.field_nabla, initial, grid, copts);
    num::VerifyOptions vo{settings.tol};
    verify = num::verify_el(fp, sol, vo);
    ResidualReport ham = num::verify_hamilton(fp, *check.field_T, sol, vo);
    for (auto& e : ham.residuals) verify.residuals.push_back(std::move(e));
    verify.verdict = combine_verdicts(verify.verdict, ham.verdict);
    if (!settings.out_csv.empty()) num::write_section_csv(sol, settings.out_csv);
  }

  ResidualReport combined = check.report;
  for (auto& e : verify.residuals) combined.residuals.push_back(std::move(e));
  for (const auto& [name, tol] : verify.tolerances) combined.tolerances[name] = tol;
  combined.verdict = combine_verdicts(check.report.verdict, verify.verdict);

  double elapsed_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - started)
                          .count();
  emit_report(combined, notes, elapsed_ms, format, "", os);
  return verdict_exit_code(combined.verdict);
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

int cmd_report(const std::string& path, const std::string& format, std::ostream& os) {
  json j = load_json_file(path);
  for (const char* key : {"residuals", "verdict", "tolerances"}) {
    if (!j.contains(key)) throw Error(path + ": report is missing '" + std::string(key) + "'");
  }
  if (format == "json") {
    os << j.dump(2) << "\n";
    return 0;
  }
  ResidualReport report;
  for (const auto& r : j.at("residuals")) {
    report.residuals.push_back({r.at("name").get<std::string>(),
                                r.at("max_abs").get<double>(),
                                r.at("symbolic_zero").get<bool>()});
  }
  std::string verdict = j.at("verdict").get<std::string>();
  report.verdict = verdict == "solution"       ? Verdict::kSolution
                   : verdict == "not_solution" ? Verdict::kNotSolution
                                               : Verdict::kInconclusive;
  std::vector<std::string> notes;
  if (j.contains("notes"))
    for (const auto& n : j.at("notes")) notes.push_back(n.get<std::string>());
  print_report_text(os, report, notes);
  if (j.contains("timings") && j.at("timings").contains("total_ms"))
    os << "timing: " << j.at("timings").at("total_ms").get<double>() << " ms\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& os, std::ostream& err) {
  CLI::App app{"Hamilton-Jacobi workbench for Lagrangian mechanics and field theory"};
  app.require_subcommand(1);

  std::string problem_path;
  std::string candidate_path;
  std::vector<std::string> what{"el"};
  std::string format = "text";
  std::string out_path;
  std::string box;
  std::string grid;
  int samples = 100;
  unsigned seed = 0;
  double tol = 0.0;
  double h = 0.0;
  bool force = false;
  std::string report_path;

  CLI::App* derive = app.add_subcommand("derive", "print derived equation systems");
  derive->add_option("--problem", problem_path, "problem JSON file")->required();
  derive->add_option("--what", what, "any of: el, elh, hamilton, constraint")->delimiter(',');
  derive->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
  derive->add_option("--out", out_path, "also write JSON to this path");

  CLI::App* check = app.add_subcommand("check", "evaluate HJ residuals for a candidate");
  check->add_option("--problem", problem_path)->required();
  check->add_option("--candidate", candidate_path)->required();
  check->add_option("--samples", samples, "Halton samples per residual");
  check->add_option("--box", box, "sampling box lo:hi[,lo:hi...]");
  check->add_option("--tol", tol, "sampling tolerance (default 1e-9)");
  check->add_option("--seed", seed, "sampling sequence offset");
  check->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
  check->add_option("--out", out_path, "write the JSON report here");

  CLI::App* integrate = app.add_subcommand("integrate", "integrate a candidate and verify it");
  integrate->set_help_flag("--help", "print help");  // frees -h for the step size
  integrate->add_option("--problem", problem_path)->required();
  integrate->add_option("--candidate", candidate_path)->required();
  integrate->add_option("--box", box, "integration domain lo:hi[,lo:hi...]");
  integrate->add_option("--grid", grid, "nodes per axis, e.g. 101x101");
  integrate->add_option("--h", h, "step size");
  integrate->add_option("--tol", tol, "verification tolerance (default 100 h^2)");
  integrate->add_option("--samples", samples);
  integrate->add_option("--seed", seed);
  integrate->add_option("--out", out_path, "CSV output path");
  integrate->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
  integrate->add_flag("--force", force, "integrate even if the symbolic check fails");

  CLI::App* report = app.add_subcommand("report", "pretty-print a stored JSON report");
  report->add_option("path", report_path, "report JSON file")->required();
  report->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      os << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (derive->parsed()) return cmd_derive(problem_path, what, format, out_path, os);
    if (check->parsed()) {
      auto started = std::chrono::steady_clock::now();
      LoadedProblem prob = load_problem(problem_path);
      LoadedCandidate cand = load_candidate(candidate_path);
      CheckSettings settings{samples, seed, tol > 0 ? tol : 1e-9, box};
      CheckOutcome outcome = run_check(prob, cand, settings);
      double elapsed_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - started)
                              .count();
      emit_report(outcome.report, outcome.notes, elapsed_ms, format, out_path, os);
      return verdict_exit_code(outcome.report.verdict);
    }
    if (integrate->parsed()) {
      LoadedProblem prob = load_problem(problem_path);
      LoadedCandidate cand = load_candidate(candidate_path);
      IntegrateSettings settings;
      settings.check = CheckSettings{samples, seed, 1e-9, ""};
      settings.grid = grid;
      settings.h = h;
      settings.box = box;
      settings.out_csv = out_path;
      settings.tol = tol;
      settings.force = force;
      return cmd_integrate(prob, cand, settings, format, os);
    }
    if (report->parsed()) return cmd_report(report_path, format, os);
  } catch (const NumericError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    err << "input error at offset " << e.offset << ": " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace hjet::cli
