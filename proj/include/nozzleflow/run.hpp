#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "nozzleflow/config.hpp"
#include "nozzleflow/flow.hpp"

namespace nozzleflow {

enum class Command { solve, farfield, critical, verify, gastable };

std::optional<Command> parse_command(std::string_view name);
std::string to_string(Command command);

// Exit codes: 0 Euler-consistent (or a successful non-solve command),
// 2 modified-problem-only, 1 error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitModifiedOnly = 2;

struct RunOutcome {
  int exit_code = kExitError;
  nlohmann::json summary;
};

// Runs one pipeline, writes its output files and always writes the summary
// JSON. Errors are caught and reported in summary["failure"].
// `field_input` is the field CSV read by verify (defaults to
// outputs.field_csv).
RunOutcome run(Command command, const RunConfig& config, const std::filesystem::path& field_input = {});

// Writes a failure summary for runs that never got a parsed configuration.
RunOutcome failed_run(Command command, const std::string& reason, const std::filesystem::path& summary_path);

// Field file with header x1,x2,psi,rho,u,v,mach in mesh node order.
void write_field_csv(const std::filesystem::path& path, const FlowField& field);

struct FieldSamples {
  std::vector<double> x1, x2, psi, rho, u, v, mach;
};
FieldSamples read_field_csv(const std::filesystem::path& path);

}  // namespace nozzleflow
