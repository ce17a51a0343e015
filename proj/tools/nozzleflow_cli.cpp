#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nozzleflow/config.hpp"
#include "nozzleflow/run.hpp"

namespace {

struct Options {
  std::string config;
  std::vector<std::string> overrides;
  std::string field;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace nozzleflow;
  CLI::App app{"Steady subsonic Euler flow in infinite 2-D nozzles"};
  app.require_subcommand(1);
  Options opts;
  const std::vector<std::pair<Command, std::string>> commands = {
      {Command::solve, "Solve the nozzle problem and certify the flow field"},
      {Command::farfield, "Compute the upstream and downstream far-field states"},
      {Command::critical, "Bracket the critical mass flux"},
      {Command::verify, "Re-run the diagnostics on a stored field file"},
      {Command::gastable, "Tabulate maximum and critical states over a Bernoulli grid"},
  };
  for (const auto& [command, help] : commands) {
    CLI::App* sub = app.add_subcommand(to_string(command), help);
    sub->add_option("--config,-c", opts.config, "Run configuration (JSON)")->required();
    sub->add_option("--override,-o", opts.overrides, "key=value override, dotted keys (repeatable)");
    if (command == Command::verify) sub->add_option("--field", opts.field, "Field CSV to verify");
  }
  CLI11_PARSE(app, argc, argv);

  const Command command = *parse_command(app.get_subcommands().front()->get_name());
  RunConfig config;
  try {
    config = load_config(opts.config, opts.overrides);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return failed_run(command, e.what(), summary_path_hint(opts.config, opts.overrides)).exit_code;
  }
  const RunOutcome outcome = run(command, config, opts.field);
  const auto& s = outcome.summary;
  if (s.contains("failure") && !s["failure"].is_null()) {
    std::cerr << "error: " << s["failure"].get<std::string>() << '\n';
  } else if (s.contains("label")) {
    std::cout << s["label"].get<std::string>() << " (margin " << s["margin"].get<double>() << ")\n";
  } else if (s.contains("critical")) {
    std::cout << "critical mass flux in [" << s["critical"]["m_lo"].get<double>() << ", "
              << s["critical"]["m_hi"].get<double>() << "]\n";
  }
  std::cout << "summary: " << config.outputs.summary_json.string() << '\n';
  return outcome.exit_code;
}
