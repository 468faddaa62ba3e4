#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hjet/cli.hpp"
#include "hjet/field_theory.hpp"
#include "hjet/mechanics.hpp"
#include "hjet/parser.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("hjet_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }

  std::string file(const std::string& name, const std::string& content) const {
    fs::path p = dir / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }
};

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  int code = hjet::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const char* kInverted = R"({"kind": "mechanics", "dof": 1, "lagrangian": "(v1^2 + q1^2)/2"})";
const char* kHarmonic =
    R"({"kind": "mechanics", "dof": 1, "lagrangian": "(v1^2 - omega^2*q1^2)/2",
        "parameters": {"omega": 1}})";
const char* kWave =
    R"({"kind": "field", "n": 2, "m": 1, "k": 0, "lagrangian": "(u1_1^2 - u1_2^2)/2"})";
const char* kNablaQ = R"({"nabla": {"q1": "q1"}})";

}  // namespace

TEST_CASE("derive: text output and expression round trip") {
  Workspace ws;
  std::string prob = ws.file("p.json", kInverted);
  RunResult r = run_cli({"derive", "--problem", prob, "--what", "el,elh", "--format", "json"});
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  REQUIRE(j.contains("groups"));
  // every rhs re-parses to a normalized-equal expression
  auto mp = hjet::mech::MechProblem::from_text(1, "(v1^2 + q1^2)/2");
  for (const auto& g : j["groups"]) {
    for (const auto& eq : g["equations"]) {
      std::string rhs = eq["rhs"].get<std::string>();
      hjet::Expr parsed = hjet::parse_expr(rhs, mp.symbols());
      CHECK(hjet::to_string(parsed) == rhs);
    }
  }

  RunResult text = run_cli({"derive", "--problem", prob, "--what", "el"});
  CHECK(text.code == 0);
  CHECK(text.out.find("-a1 + q1 = 0") != std::string::npos);
}

TEST_CASE("derive: field constraint groups include delta sums") {
  Workspace ws;
  std::string wave = ws.file("wave.json", kWave);
  RunResult r = run_cli({"derive", "--problem", wave, "--what", "constraint"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("P1_.1 = u1_1") != std::string::npos);
  CHECK(r.out.find("P1_.2 = -u1_2") != std::string::npos);

  std::string second = ws.file("second.json",
      R"({"kind": "field", "n": 2, "m": 1, "k": 1, "lagrangian": "u1_12^2/2"})");
  RunResult r2 = run_cli({"derive", "--problem", second, "--what", "constraint"});
  REQUIRE(r2.code == 0);
  CHECK(r2.out.find("P1_1.2 + P1_2.1 = u1_12") != std::string::npos);

  // momentum-evolution rows of the derive output re-parse too
  RunResult r3 = run_cli({"derive", "--problem", second, "--what", "elh", "--format", "json"});
  REQUIRE(r3.code == 0);
  auto fp = hjet::field::FieldProblem::from_text(2, 1, 1, "u1_12^2/2");
  for (const auto& g : json::parse(r3.out)["groups"]) {
    for (const auto& eq : g["equations"]) {
      std::string rhs = eq["rhs"].get<std::string>();
      CHECK(hjet::to_string(hjet::parse_expr(rhs, fp.ctx().symbols())) == rhs);
    }
  }
}

TEST_CASE("check: verdict exit codes") {
  Workspace ws;
  std::string inverted = ws.file("inv.json", kInverted);
  std::string harmonic = ws.file("harm.json", kHarmonic);
  std::string nabla = ws.file("nabla.json", kNablaQ);

  RunResult solution = run_cli({"check", "--problem", inverted, "--candidate", nabla});
  CHECK(solution.code == 0);
  CHECK(solution.out.find("proved-zero") != std::string::npos);
  CHECK(solution.out.find("verdict: solution") != std::string::npos);

  RunResult negative = run_cli({"check", "--problem", harmonic, "--candidate", nabla});
  CHECK(negative.code == 1);
  CHECK(negative.out.find("verdict: not_solution") != std::string::npos);

  // Not provably zero, numerically zero: sin^2 + cos^2 disguise.
  std::string masked = ws.file("masked.json",
                               R"x({"nabla": {"q1": "q1*(sin(q1)^2 + cos(q1)^2)"}})x");
  RunResult inconclusive = run_cli({"check", "--problem", inverted, "--candidate", masked});
  CHECK(inconclusive.code == 4);
  CHECK(inconclusive.out.find("verdict: inconclusive") != std::string::npos);
}

TEST_CASE("check: field candidate with auto-filled momenta") {
  Workspace ws;
  std::string wave = ws.file("wave.json", kWave);
  std::string cand = ws.file("cand.json", R"({"nabla": {"u1_1": "u1", "u1_2": "u1"}})");
  std::string report_path = (ws.dir / "report.json").string();
  RunResult r = run_cli({"check", "--problem", wave, "--candidate", cand, "--out", report_path});
  CHECK(r.code == 0);
  json report = json::parse(std::ifstream(report_path));
  CHECK(report["verdict"] == "solution");
  CHECK(report["residuals"].size() == 4);  // R1 x2, R2, flatness
  for (const auto& res : report["residuals"]) CHECK(res["symbolic_zero"].get<bool>());
  CHECK(report.contains("tolerances"));
  CHECK(report.contains("timings"));

  RunResult pretty = run_cli({"report", report_path});
  CHECK(pretty.code == 0);
  CHECK(pretty.out.find("verdict: solution") != std::string::npos);
}

TEST_CASE("check: classical candidate") {
  Workspace ws;
  std::string inverted = ws.file("inv.json", kInverted);
  std::string classical = ws.file("s.json", R"({"S": "q1^2/2"})");
  RunResult r = run_cli({"check", "--problem", inverted, "--candidate", classical});
  CHECK(r.code == 0);
  CHECK(r.out.find("energy: proved-zero") != std::string::npos);

  std::string linear = ws.file("s2.json", R"({"S": "q1"})");
  RunResult bad = run_cli({"check", "--problem", inverted, "--candidate", linear});
  CHECK(bad.code == 1);  // H o dS = 1/2
}

TEST_CASE("integrate: classical candidate through the symbolic Legendre inverse") {
  Workspace ws;
  std::string inverted = ws.file("inv.json", kInverted);
  std::string classical = ws.file("s.json", R"({"S": "q1^2/2"})");
  RunResult r = run_cli({"integrate", "--problem", inverted, "--candidate", classical, "--box",
                         "0:1", "--h", "0.001", "--format", "json"});
  REQUIRE(r.code == 0);
  json report = json::parse(r.out);
  CHECK(report["verdict"] == "solution");
}

TEST_CASE("input errors exit with code 2") {
  Workspace ws;
  std::string bad_json = ws.file("bad.json", "{not json");
  std::string inverted = ws.file("inv.json", kInverted);
  std::string nabla = ws.file("nabla.json", kNablaQ);

  CHECK(run_cli({"check", "--problem", bad_json, "--candidate", nabla}).code == 2);
  CHECK(run_cli({"check", "--problem", inverted, "--candidate", bad_json}).code == 2);
  CHECK(run_cli({"derive", "--problem", ws.file("m.json", "{}")}).code == 2);
  CHECK(run_cli({"derive", "--problem", (ws.dir / "absent.json").string()}).code == 2);

  std::string typo = ws.file("typo.json",
                             R"({"kind": "mechanics", "dof": 1, "lagrangian": "(w1^2)/2"})");
  RunResult r = run_cli({"derive", "--problem", typo});
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown identifier") != std::string::npos);

  std::string wrong_dof = ws.file("wrong.json", R"({"nabla": {"q2": "q1"}})");
  CHECK(run_cli({"check", "--problem", inverted, "--candidate", wrong_dof}).code == 2);
}

TEST_CASE("integrate: trajectory, CSV, and verification report") {
  Workspace ws;
  std::string inverted = ws.file("inv.json", kInverted);
  std::string nabla = ws.file("nabla.json", kNablaQ);
  std::string csv = (ws.dir / "curve.csv").string();
  RunResult r = run_cli({"integrate", "--problem", inverted, "--candidate", nabla, "--box",
                         "0:1", "--h", "0.001", "--out", csv, "--format", "json"});
  REQUIRE(r.code == 0);
  json report = json::parse(r.out);
  CHECK(report["verdict"] == "solution");
  double el_max = -1.0;
  for (const auto& res : report["residuals"]) {
    if (res["name"] == "el_q1") el_max = res["max_abs"].get<double>();
  }
  CHECK(el_max >= 0.0);
  CHECK(el_max <= 1e-6);

  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,q1");
}

TEST_CASE("integrate: wave section end-to-end") {
  Workspace ws;
  std::string wave = ws.file("wave.json", kWave);
  std::string cand = ws.file("cand.json", R"({"nabla": {"u1_1": "u1", "u1_2": "u1"}})");
  std::string csv = (ws.dir / "section.csv").string();
  RunResult r = run_cli({"integrate", "--problem", wave, "--candidate", cand, "--box",
                         "0:1,0:1", "--h", "0.01", "--out", csv, "--format", "json"});
  REQUIRE(r.code == 0);
  json report = json::parse(r.out);
  CHECK(report["verdict"] == "solution");
  for (const auto& res : report["residuals"]) {
    if (res["name"] == "el_u1") CHECK(res["max_abs"].get<double>() <= 1e-4);
  }
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x1,x2,u1");
}

TEST_CASE("integrate: --grid overrides the step size") {
  Workspace ws;
  std::string wave = ws.file("wave.json", kWave);
  std::string cand = ws.file("cand.json", R"({"nabla": {"u1_1": "u1", "u1_2": "u1"}})");
  std::string csv = (ws.dir / "coarse.csv").string();
  RunResult r = run_cli({"integrate", "--problem", wave, "--candidate", cand, "--box",
                         "0:1,0:1", "--grid", "11x21", "--out", csv});
  REQUIRE(r.code == 0);
  std::ifstream in(csv);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 1 + 11 * 21);
}

TEST_CASE("integrate: non-flat connection is refused without --force") {
  Workspace ws;
  std::string wave = ws.file("wave.json", kWave);
  std::string twisted = ws.file("twisted.json", R"({"nabla": {"u1_1": "u1", "u1_2": "x1"}})");
  RunResult refused = run_cli({"integrate", "--problem", wave, "--candidate", twisted});
  CHECK(refused.code == 2);
  CHECK(refused.err.find("flatness") != std::string::npos);
}

TEST_CASE("integrate: blow-up exits with the numerical-failure code") {
  Workspace ws;
  std::string inverted = ws.file("inv.json", kInverted);
  std::string quad = ws.file("quad.json", R"({"nabla": {"q1": "q1^2"}})");
  RunResult r = run_cli({"integrate", "--problem", inverted, "--candidate", quad, "--box", "0:2",
                         "--h", "0.001", "--force"});
  CHECK(r.code == 3);
  CHECK(r.err.find("blow-up") != std::string::npos);
}

TEST_CASE("check is deterministic for a fixed seed") {
  Workspace ws;
  std::string harmonic = ws.file("harm.json", kHarmonic);
  std::string nabla = ws.file("nabla.json", kNablaQ);
  RunResult a = run_cli({"check", "--problem", harmonic, "--candidate", nabla, "--seed", "3",
                         "--format", "json"});
  RunResult b = run_cli({"check", "--problem", harmonic, "--candidate", nabla, "--seed", "3",
                         "--format", "json"});
  json ja = json::parse(a.out);
  json jb = json::parse(b.out);
  CHECK(ja["residuals"] == jb["residuals"]);
}
