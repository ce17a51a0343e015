#include "nozzleflow/run.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nozzleflow/continuation.hpp"
#include "nozzleflow/critical.hpp"
#include "nozzleflow/errors.hpp"

namespace nozzleflow {

using nlohmann::json;

namespace {

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void write_summary(const std::filesystem::path& path, const json& summary) {
  std::ofstream out = open_output(path);
  out << summary.dump(2) << '\n';
}

json admissibility_json(const AdmissibilityReport& r) {
  return {
      {"delta", r.delta},
      {"mass_flux_lower_bound", r.mass_flux_lower_bound},
      {"lower_sign_ok", r.lower_sign_ok},
      {"upper_sign_ok", r.upper_sign_ok},
      {"mass_flux_above_bound", r.mass_flux_above_bound},
      {"bernoulli_above_B0", r.bernoulli_above_B0},
      {"upstream_bracket_ok", r.upstream_bracket_ok},
      {"downstream_bracket_ok", r.downstream_bracket_ok},
      {"flat_at_walls", r.flat_at_walls},
      {"all_pass", r.all_pass()},
      {"warnings", r.warnings},
  };
}

json farfield_json(const FarFieldStates& ff) {
  double u0_min = INFINITY, u0_max = -INFINITY, u1_min = INFINITY, u1_max = -INFINITY;
  const double a = ff.downstream.a(), b = ff.downstream.b();
  for (int k = 0; k <= 1000; ++k) {
    const double t = k / 1000.0;
    const double u0 = ff.upstream.speed(t);
    const double u1 = ff.downstream.speed(a + t * (b - a));
    u0_min = std::min(u0_min, u0);
    u0_max = std::max(u0_max, u0);
    u1_min = std::min(u1_min, u1);
    u1_max = std::max(u1_max, u1);
  }
  return {
      {"m", ff.m},
      {"rho0", ff.upstream.density()},
      {"rho1", ff.downstream.density()},
      {"u0_min", u0_min},
      {"u0_max", u0_max},
      {"u1_min", u1_min},
      {"u1_max", u1_max},
      {"a", a},
      {"b", b},
      {"ymap_end_error", ff.downstream.end_error()},
  };
}

json solver_json(const ContinuationResult& res) {
  const StreamSolution& sol = res.solution;
  json levels = json::array();
  for (const ContinuationLevel& l : res.levels) {
    levels.push_back({{"L", l.L},
                      {"iterations", l.iterations},
                      {"converged", l.converged},
                      {"farfield_dev_minus", l.deviation.minus},
                      {"farfield_dev_plus", l.deviation.plus}});
  }
  return {
      {"L", res.L()},
      {"n_xi", sol.mesh.n_xi()},
      {"n_eta", sol.mesh.n_eta()},
      {"iterations", sol.iterations},
      {"converged", sol.converged},
      {"residual", sol.residual_history.empty() ? 0.0 : sol.residual_history.back()},
      {"last_update", sol.last_update},
      {"eps0", sol.eps0},
      {"truncation_active", sol.any_truncation()},
      {"ellipticity_min", sol.ellipticity_min},
      {"ellipticity_max", sol.ellipticity_max},
      {"farfield_accepted", res.accepted},
      {"levels", levels},
      {"warnings", res.warnings},
  };
}

json base_summary(Command command) {
  return {{"command", to_string(command)}, {"status", "running"}, {"failure", nullptr}};
}

int finish_diagnostics(json& summary, const DiagnosticReport& report) {
  summary["diagnostics"] = to_json(report);
  summary["euler_consistent"] = report.euler_consistent;
  summary["label"] = report.euler_consistent ? "Euler-consistent" : "modified-problem-only";
  summary["margin"] = report.subsonic_margin;
  return report.euler_consistent ? kExitOk : kExitModifiedOnly;
}

int run_solve(const RunConfig& c, json& summary) {
  const NozzleGeometry nozzle = build_nozzle(c.nozzle_spec);
  summary["admissibility"] = admissibility_json(check_assumptions(c.gas, c.bernoulli, c.m, nozzle.a, nozzle.b));
  const FarFieldStates ff = build_farfield(c.gas, c.bernoulli, c.m, nozzle.a, nozzle.b);
  summary["farfield"] = farfield_json(ff);
  const ContinuationResult res = continuation_solve(nozzle, ff, c.solver);
  summary["solver"] = solver_json(res);
  const StreamSolution& sol = res.solution;
  if (!sol.converged) {
    std::ostringstream msg;
    msg << "Picard iteration did not converge in " << sol.iterations << " iterations (last update "
        << sol.last_update << "); m may be near or above the critical mass flux";
    json history = json::array();
    const std::size_t n = sol.residual_history.size();
    for (std::size_t k = n > 10 ? n - 10 : 0; k < n; ++k) history.push_back(sol.residual_history[k]);
    summary["solver"]["residual_history_tail"] = history;
    throw SolverError(msg.str());
  }
  const FlowField field = recover_fields(sol, ff);
  const DiagnosticReport report = diagnose(field, ff, sol.any_truncation(), c.diagnostics);
  write_field_csv(c.outputs.field_csv, field);
  summary["field_csv"] = c.outputs.field_csv.string();
  return finish_diagnostics(summary, report);
}

int run_farfield(const RunConfig& c, json& summary) {
  const NozzleGeometry nozzle = build_nozzle(c.nozzle_spec);
  summary["admissibility"] = admissibility_json(check_assumptions(c.gas, c.bernoulli, c.m, nozzle.a, nozzle.b));
  const FarFieldStates ff = build_farfield(c.gas, c.bernoulli, c.m, nozzle.a, nozzle.b);
  summary["farfield"] = farfield_json(ff);
  std::ofstream out = open_output(c.outputs.profiles_csv);
  out << "s,u0,psi0,y,u1\n";
  for (int k = 0; k <= 200; ++k) {
    const double s = k / 200.0;
    out << fmt17(s) << ',' << fmt17(ff.upstream.speed(s)) << ',' << fmt17(ff.upstream_stream(s)) << ','
        << fmt17(ff.downstream.ymap(s)) << ',' << fmt17(ff.downstream.speed_at_upstream_height(s)) << '\n';
  }
  summary["profiles_csv"] = c.outputs.profiles_csv.string();
  return kExitOk;
}

int run_critical(const RunConfig& c, json& summary) {
  const CriticalSetup setup{build_nozzle(c.nozzle_spec), c.gas, c.bernoulli, c.solver};
  summary["admissibility"] =
      admissibility_json(check_assumptions(c.gas, c.bernoulli, c.m, setup.nozzle.a, setup.nozzle.b));
  const CriticalBracket bracket = find_critical(setup, c.critical.tol_m, c.critical.m_start);
  std::ofstream out = open_output(c.outputs.margin_csv);
  out << "m,M,converged,truncation_active\n";
  json samples = json::array();
  for (const MarginSample& s : bracket.curve.samples) {
    out << fmt17(s.m) << ',' << fmt17(s.margin) << ',' << (s.converged ? 1 : 0) << ','
        << (s.truncation_active ? 1 : 0) << '\n';
    samples.push_back({{"m", s.m},
                       {"margin", std::isnan(s.margin) ? json(nullptr) : json(s.margin)},
                       {"converged", s.converged},
                       {"truncation_active", s.truncation_active},
                       {"accepted", s.accepted},
                       {"failure", s.failure}});
  }
  summary["critical"] = {
      {"m_lo", bracket.m_lo},
      {"m_hi", bracket.m_hi},
      {"tol_m", c.critical.tol_m},
      {"eps_accept", bracket.curve.eps_accept},
      {"upstream_limit", bracket.upstream_limit},
      {"samples", samples},
      {"warnings", bracket.warnings},
  };
  summary["margin_csv"] = c.outputs.margin_csv.string();
  return kExitOk;
}

int run_verify(const RunConfig& c, const std::filesystem::path& input, json& summary) {
  const NozzleGeometry nozzle = build_nozzle(c.nozzle_spec);
  const FarFieldStates ff = build_farfield(c.gas, c.bernoulli, c.m, nozzle.a, nozzle.b);
  summary["farfield"] = farfield_json(ff);
  FieldSamples s = read_field_csv(input);
  summary["field_csv"] = input.string();
  const int rows = static_cast<int>(s.x1.size());
  int n_eta = 0;
  while (n_eta < rows && s.x1[n_eta] == s.x1[0]) ++n_eta;
  if (n_eta < 3 || rows % n_eta != 0) throw ConfigError("field file is not a structured node list");
  const Mesh mesh = generate_mesh(truncate(nozzle, -s.x1[0]), rows / n_eta, n_eta);
  for (int i = 0; i < mesh.n_xi(); ++i) {
    for (int j = 0; j < mesh.n_eta(); ++j) {
      const int k = mesh.index(i, j);
      if (std::abs(s.x1[k] - mesh.x1(i)) > 1e-9 * (1.0 + std::abs(mesh.x1(i))) ||
          std::abs(s.x2[k] - mesh.x2(i, j)) > 1e-9 * (1.0 + std::abs(mesh.x2(i, j)))) {
        throw ConfigError("field file nodes do not match the configured nozzle");
      }
    }
  }
  const bool truncated = truncation_activity(mesh, s.psi, ff, resolve_truncation(ff, c.solver)).any();
  const FlowField field = field_from_samples(mesh, std::move(s.psi), std::move(s.rho), std::move(s.u), std::move(s.v), ff);
  return finish_diagnostics(summary, diagnose(field, ff, truncated, c.diagnostics));
}

int run_gastable(const RunConfig& c, json& summary) {
  std::ofstream out = open_output(c.outputs.gastable_csv);
  out << "s,rho_max,rho_crit,sound_speed_crit,sigma\n";
  const GasTableOptions& g = c.gastable;
  for (int k = 0; k < g.count; ++k) {
    const double s = g.count == 1 ? g.s_min : g.s_min + (g.s_max - g.s_min) * k / (g.count - 1);
    const CriticalState st = critical_state(c.gas, s);
    out << fmt17(s) << ',' << fmt17(st.rho_bar) << ',' << fmt17(st.rho_crit) << ',' << fmt17(st.gamma_crit) << ','
        << fmt17(st.sigma) << '\n';
  }
  summary["gastable"] = {{"rows", g.count}, {"s_min", g.s_min}, {"s_max", g.s_max}};
  summary["gastable_csv"] = c.outputs.gastable_csv.string();
  return kExitOk;
}

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
  if (name == "solve") return Command::solve;
  if (name == "farfield") return Command::farfield;
  if (name == "critical") return Command::critical;
  if (name == "verify") return Command::verify;
  if (name == "gastable") return Command::gastable;
  return std::nullopt;
}

std::string to_string(Command command) {
  switch (command) {
    case Command::solve:
      return "solve";
    case Command::farfield:
      return "farfield";
    case Command::critical:
      return "critical";
    case Command::verify:
      return "verify";
    case Command::gastable:
      return "gastable";
  }
  return "unknown";
}

RunOutcome run(Command command, const RunConfig& config, const std::filesystem::path& field_input) {
  RunOutcome outcome;
  json& summary = outcome.summary;
  summary = base_summary(command);
  summary["config"] = config.effective;
  try {
    switch (command) {
      case Command::solve:
        outcome.exit_code = run_solve(config, summary);
        break;
      case Command::farfield:
        outcome.exit_code = run_farfield(config, summary);
        break;
      case Command::critical:
        outcome.exit_code = run_critical(config, summary);
        break;
      case Command::verify:
        outcome.exit_code =
            run_verify(config, field_input.empty() ? config.outputs.field_csv : field_input, summary);
        break;
      case Command::gastable:
        outcome.exit_code = run_gastable(config, summary);
        break;
    }
    summary["status"] = "ok";
  } catch (const std::exception& e) {
    outcome.exit_code = kExitError;
    summary["status"] = "failed";
    summary["failure"] = e.what();
  }
  summary["exit_code"] = outcome.exit_code;
  try {
    write_summary(config.outputs.summary_json, summary);
  } catch (const std::exception& e) {
    outcome.exit_code = kExitError;
    summary["failure"] = std::string("cannot write summary: ") + e.what();
  }
  return outcome;
}

RunOutcome failed_run(Command command, const std::string& reason, const std::filesystem::path& summary_path) {
  RunOutcome outcome;
  outcome.summary = base_summary(command);
  outcome.summary["status"] = "failed";
  outcome.summary["failure"] = reason;
  outcome.summary["exit_code"] = kExitError;
  try {
    write_summary(summary_path, outcome.summary);
  } catch (const std::exception&) {
  }
  return outcome;
}

void write_field_csv(const std::filesystem::path& path, const FlowField& field) {
  std::ofstream out = open_output(path);
  out << "x1,x2,psi,rho,u,v,mach\n";
  const Mesh& mesh = field.mesh;
  for (int i = 0; i < mesh.n_xi(); ++i) {
    for (int j = 0; j < mesh.n_eta(); ++j) {
      const int k = mesh.index(i, j);
      out << fmt17(mesh.x1(i)) << ',' << fmt17(mesh.x2(i, j)) << ',' << fmt17(field.psi[k]) << ','
          << fmt17(field.rho[k]) << ',' << fmt17(field.u[k]) << ',' << fmt17(field.v[k]) << ','
          << fmt17(std::sqrt(field.mach_sq[k])) << '\n';
    }
  }
}

FieldSamples read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("x1,x2,psi,rho,u,v,mach", 0) != 0) {
    throw ConfigError("field file " + path.string() + " lacks the header x1,x2,psi,rho,u,v,mach");
  }
  FieldSamples s;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream cells(line);
    double value[7];
    std::string cell;
    int n = 0;
    while (n < 7 && std::getline(cells, cell, ',')) {
      try {
        value[n++] = std::stod(cell);
      } catch (const std::exception&) {
        throw ConfigError("field file row " + std::to_string(row) + ": not a number");
      }
    }
    if (n != 7) throw ConfigError("field file row " + std::to_string(row) + ": expected 7 columns");
    s.x1.push_back(value[0]);
    s.x2.push_back(value[1]);
    s.psi.push_back(value[2]);
    s.rho.push_back(value[3]);
    s.u.push_back(value[4]);
    s.v.push_back(value[5]);
    s.mach.push_back(value[6]);
  }
  if (s.x1.empty()) throw ConfigError("field file " + path.string() + " has no rows");
  return s;
}

}  // namespace nozzleflow
