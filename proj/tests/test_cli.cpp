#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "nozzleflow/config.hpp"
#include "nozzleflow/continuation.hpp"
#include "nozzleflow/errors.hpp"
#include "nozzleflow/run.hpp"

using namespace nozzleflow;
namespace fs = std::filesystem;

namespace {

const char* kStraight = R"({
  "gas": {"type": "polytropic", "A": 0.5, "gamma": 2},
  "B": 1.5,
  "nozzle": "straight",
  "m": 0.8838834764831844,
  "solver": {"n_xi": 41, "n_eta": 9, "L0": 4, "L_max": 4}
})";

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nozzleflow_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig straight_config(const fs::path& dir) {
  RunConfig c = parse_config_text(kStraight);
  c.outputs.field_csv = dir / "field.csv";
  c.outputs.summary_json = dir / "summary.json";
  c.outputs.margin_csv = dir / "margin.csv";
  c.outputs.profiles_csv = dir / "profiles.csv";
  c.outputs.gastable_csv = dir / "gastable.csv";
  return c;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("configuration defaults") {
  const RunConfig c = parse_config_text(R"({"gas": {"type": "isothermal", "c": 1}, "B": [0.5], "nozzle": "straight", "m": 0.5})");
  CHECK(c.gas.kind() == GasKind::isothermal);
  CHECK(c.bernoulli(0.3) == 0.5);
  CHECK(std::holds_alternative<StraightSpec>(c.nozzle_spec));
  CHECK(c.solver.n_xi == 401);
  CHECK(c.solver.n_eta == 41);
  CHECK(c.solver.L0 == 8.0);
  CHECK(c.solver.L_max == 32.0);
  CHECK(c.solver.picard.tol_nonlinear == 1e-10);
  CHECK(c.solver.tol_farfield == 1e-6);
  CHECK(c.solver.eps0_scale == 0.05);
  CHECK(c.solver.picard.damping == 0.7);
  CHECK(c.outputs.summary_json == fs::path("summary.json"));
}

TEST_CASE("nozzle families in the configuration") {
  const RunConfig t = parse_config_text(R"({"gas": {"type": "polytropic", "A": 0.5, "gamma": 2}, "B": 1.5, "m": 0.6,
    "nozzle": {"family": "tanh_transition", "upper": [1, 2], "steepness": 2}})");
  REQUIRE(std::holds_alternative<TanhTransitionSpec>(t.nozzle_spec));
  CHECK(std::get<TanhTransitionSpec>(t.nozzle_spec).steepness == 2.0);
  CHECK(std::get<TanhTransitionSpec>(t.nozzle_spec).upper_to == 2.0);

  const RunConfig b = parse_config_text(R"({"gas": {"type": "polytropic", "A": 0.5, "gamma": 2}, "B": 1.5, "m": 0.6,
    "nozzle": {"family": "bump", "amplitude": 0.1, "wall": "upper"}})");
  REQUIRE(std::holds_alternative<BumpSpec>(b.nozzle_spec));
  CHECK(std::get<BumpSpec>(b.nozzle_spec).wall == BumpSpec::Wall::upper);
}

TEST_CASE("configuration errors name the key") {
  const std::string gas = R"("gas": {"type": "polytropic", "A": 0.5, "gamma": 2}, "B": 1.5)";
  CHECK_THROWS_WITH_AS(parse_config_text("{" + gas + R"(, "nozzle": "straight", "m": -1})"),
                       doctest::Contains("m: m must be positive"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("{" + gas + R"(, "nozzle": "spiral", "m": 0.5})"),
                       doctest::Contains("unknown nozzle family 'spiral'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("{" + gas + R"(, "nozzle": "straight", "m": 0.5, "colour": 1})"),
                       doctest::Contains("colour"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("{" + gas + R"(, "nozzle": "straight"})"), doctest::Contains("m"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config_text(R"({"gas": {"type": "ideal"}, "B": 1.5, "nozzle": "straight", "m": 0.5})"),
      doctest::Contains("gas"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("{" + gas + R"(, "nozzle": "straight", "m": 0.5, "solver": {"damping": 2}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text("not json"), ConfigError);
}

TEST_CASE("overrides") {
  nlohmann::json doc = nlohmann::json::parse(kStraight);
  apply_override(doc, "solver.n_xi=81");
  apply_override(doc, "m=0.5");
  apply_override(doc, "outputs.summary_json_path=out/s.json");
  CHECK(doc["solver"]["n_xi"] == 81);
  CHECK(doc["m"] == 0.5);
  CHECK(doc["outputs"]["summary_json_path"] == "out/s.json");
  CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ConfigError);

  const fs::path dir = scratch_dir("overrides");
  std::ofstream(dir / "cfg.json") << kStraight;
  const std::vector<std::string> ov = {"solver.n_eta=5", "m=0.25"};
  const RunConfig c = load_config(dir / "cfg.json", ov);
  CHECK(c.solver.n_eta == 5);
  CHECK(c.m == 0.25);
  CHECK(c.effective["m"] == 0.25);
}

TEST_CASE("tables resolve against the configuration directory") {
  const fs::path dir = scratch_dir("tables");
  {
    std::ofstream t(dir / "B.csv");
    t << "x2,B\n";
    for (int k = 0; k <= 10; ++k) t << k / 10.0 << "," << 1.5 << "\n";
  }
  std::ofstream(dir / "cfg.json") << R"({"gas": {"type": "polytropic", "A": 0.5, "gamma": 2},
    "B": {"type": "table", "path": "B.csv"}, "nozzle": "straight", "m": 0.5})";
  const RunConfig c = load_config(dir / "cfg.json");
  CHECK(c.bernoulli(0.55) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK_THROWS_AS(read_two_column_csv(dir / "missing.csv"), ConfigError);
}

TEST_CASE("solve and verify round trip") {
  const fs::path dir = scratch_dir("solve");
  const RunConfig c = straight_config(dir);
  const RunOutcome out = run(Command::solve, c);
  CHECK(out.exit_code == kExitOk);
  CHECK(out.summary["label"] == "Euler-consistent");
  CHECK(out.summary["euler_consistent"].get<bool>());
  REQUIRE(fs::exists(dir / "field.csv"));
  const nlohmann::json summary = read_json(dir / "summary.json");
  CHECK(summary["status"] == "ok");
  CHECK(summary["margin"].get<double>() == doctest::Approx(0.78125 - 1.0).epsilon(1e-9));

  const FieldSamples f = read_field_csv(dir / "field.csv");
  REQUIRE(f.x1.size() == 41u * 9u);
  for (std::size_t k = 0; k < f.v.size(); ++k) {
    CHECK(std::abs(f.v[k]) <= 1e-8);
    CHECK(f.psi[k] == doctest::Approx(c.m * f.x2[k]).scale(1.0).epsilon(1e-10));
  }

  const RunOutcome ver = run(Command::verify, c);
  CHECK(ver.exit_code == kExitOk);
  CHECK(ver.summary["margin"].get<double>() == doctest::Approx(out.summary["margin"].get<double>()).epsilon(1e-12));
  CHECK(ver.summary["diagnostics"]["mass_flux_max_err"].get<double>() ==
        doctest::Approx(out.summary["diagnostics"]["mass_flux_max_err"].get<double>()).scale(1.0).epsilon(1e-12));

  // a corrupted velocity column breaks mass conservation
  {
    std::ifstream in(dir / "field.csv");
    std::ofstream bad(dir / "bad.csv");
    std::string line;
    std::getline(in, line);
    bad << line << "\n";
    while (std::getline(in, line)) {
      std::vector<double> vals;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
      vals[4] *= 1.05;
      char buf[512];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", vals[0], vals[1], vals[2], vals[3],
                    vals[4], vals[5], vals[6]);
      bad << buf << "\n";
    }
  }
  const RunOutcome corrupt = run(Command::verify, c, dir / "bad.csv");
  CHECK(corrupt.exit_code == kExitModifiedOnly);
  CHECK(corrupt.summary["label"] == "modified-problem-only");
}

TEST_CASE("failures still write a summary") {
  const fs::path dir = scratch_dir("fail");
  RunConfig c = straight_config(dir);
  c.m = 1.3;  // beyond the upstream choking limit
  const RunOutcome out = run(Command::solve, c);
  CHECK(out.exit_code == kExitError);
  const nlohmann::json summary = read_json(dir / "summary.json");
  CHECK(summary["status"] == "failed");
  CHECK(summary["failure"].get<std::string>().find("subsonic") != std::string::npos);

  const RunOutcome missing = run(Command::verify, straight_config(dir), dir / "absent.csv");
  CHECK(missing.exit_code == kExitError);

  const RunOutcome early = failed_run(Command::solve, "bad config", dir / "early.json");
  CHECK(early.exit_code == kExitError);
  CHECK(read_json(dir / "early.json")["failure"] == "bad config");
}

TEST_CASE("farfield, critical and gastable commands") {
  const fs::path dir = scratch_dir("others");
  RunConfig c = straight_config(dir);
  c.critical.tol_m = 0.05;
  c.solver.n_xi = 21;
  c.solver.n_eta = 5;

  const RunOutcome ff = run(Command::farfield, c);
  CHECK(ff.exit_code == kExitOk);
  CHECK(ff.summary["farfield"]["rho0"].get<double>() == doctest::Approx(1.25).epsilon(1e-10));
  CHECK(fs::exists(dir / "profiles.csv"));

  const RunOutcome crit = run(Command::critical, c);
  CHECK(crit.exit_code == kExitOk);
  CHECK(crit.summary["critical"]["m_lo"].get<double>() < 1.0);
  CHECK(crit.summary["critical"]["m_hi"].get<double>() >= 1.0);
  CHECK(fs::exists(dir / "margin.csv"));

  const RunOutcome gt = run(Command::gastable, c);
  CHECK(gt.exit_code == kExitOk);
  std::ifstream in(dir / "gastable.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "s,rho_max,rho_crit,sound_speed_crit,sigma");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 10);

  CHECK(parse_command("solve") == Command::solve);
  CHECK_FALSE(parse_command("plot").has_value());
  CHECK(to_string(Command::gastable) == "gastable");
}

TEST_CASE("command-line binary") {
  const char* bin = std::getenv("NOZZLEFLOW_BIN");
  if (bin == nullptr) return;
  const fs::path dir = scratch_dir("binary");
  std::ofstream(dir / "cfg.json") << kStraight;
  const std::string base = std::string("\"") + bin + "\" ";
  const std::string cfg = " --config \"" + (dir / "cfg.json").string() + "\"";
  const std::string out = " -o outputs.summary_json_path=\"" + (dir / "s.json").string() + "\" -o outputs.field_csv_path=\"" +
                          (dir / "f.csv").string() + "\"";
  const std::string quiet = " > \"" + (dir / "log.txt").string() + "\" 2>&1";
  CHECK(std::system((base + "solve" + cfg + out + quiet).c_str()) == 0);
  CHECK(read_json(dir / "s.json")["label"] == "Euler-consistent");
  CHECK(std::system((base + "verify" + cfg + out + " --field \"" + (dir / "f.csv").string() + "\"" + quiet).c_str()) == 0);
  CHECK(std::system((base + "solve" + cfg + out + " -o m=-1" + quiet).c_str()) != 0);
  CHECK(read_json(dir / "s.json")["status"] == "failed");
  CHECK(std::system((base + "nonsense" + quiet).c_str()) != 0);
}

namespace {

struct RefinementSample {
  double flux, drift, vorticity, farfield;
};

RefinementSample diagnose_config(const RunConfig& c, int n_xi, int n_eta, double L) {
  const NozzleGeometry nozzle = build_nozzle(c.nozzle_spec);
  const FarFieldStates ff = build_farfield(c.gas, c.bernoulli, c.m, nozzle.a, nozzle.b);
  ContinuationOptions opt = c.solver;
  opt.n_xi = n_xi;
  opt.n_eta = n_eta;
  opt.L0 = L;
  opt.L_max = L;
  const ContinuationResult res = continuation_solve(nozzle, ff, opt);
  REQUIRE(res.solution.converged);
  const FlowField field = recover_fields(res.solution, ff);
  const DiagnosticReport rep = diagnose(field, ff, res.solution.any_truncation());
  const FarFieldDeviation dev = farfield_deviation(field.mesh, field.psi, ff);
  return {rep.mass_flux_max_err, rep.bernoulli_max_drift, rep.vorticity_sup_residual, std::max(dev.minus, dev.plus)};
}

}  // namespace

// Mesh refinement at fixed L for the discretization diagnostics. In a curved
// nozzle the far-field deviation is a domain-truncation error and is refined
// by doubling L at fixed spacing.
TEST_CASE("shipped configurations improve under refinement") {
  const fs::path dir = NOZZLEFLOW_CONFIG_DIR;
  for (const char* name : {"tanh_widening", "bump", "strip_variable_B"}) {
    CAPTURE(name);
    const RunConfig c = load_config(dir / (std::string(name) + ".json"));
    const RefinementSample coarse = diagnose_config(c, 101, 11, 8.0);
    const RefinementSample fine = diagnose_config(c, 201, 21, 8.0);
    const RefinementSample longer = diagnose_config(c, 401, 21, 16.0);
    MESSAGE(std::string(name), ": flux ", coarse.flux, " -> ", fine.flux, ", drift ", coarse.drift, " -> ", fine.drift,
            ", vorticity ", coarse.vorticity, " -> ", fine.vorticity, ", far field ", coarse.farfield, " -> ",
            fine.farfield, " (L = 16: ", longer.farfield, ")");
    CHECK(fine.flux < coarse.flux);
    CHECK(fine.vorticity < coarse.vorticity);
    if (std::holds_alternative<StraightSpec>(c.nozzle_spec)) {
      // no truncation error in a straight strip
      CHECK(fine.farfield < coarse.farfield);
    } else {
      CHECK(longer.farfield < fine.farfield);
    }
    // drift is at rounding level when B is constant
    CHECK((fine.drift < coarse.drift || fine.drift < 1e-12));
  }
}

TEST_CASE("every shipped configuration parses") {
  for (const auto& entry : fs::directory_iterator(NOZZLEFLOW_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()));
  }
}
