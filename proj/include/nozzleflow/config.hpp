#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nozzleflow/bernoulli.hpp"
#include "nozzleflow/continuation.hpp"
#include "nozzleflow/flow.hpp"
#include "nozzleflow/gas.hpp"
#include "nozzleflow/geometry.hpp"

namespace nozzleflow {

struct OutputPaths {
  std::filesystem::path field_csv = "field.csv";
  std::filesystem::path summary_json = "summary.json";
  std::filesystem::path margin_csv = "margin_curve.csv";
  std::filesystem::path profiles_csv = "profiles.csv";
  std::filesystem::path gastable_csv = "gastable.csv";
};

struct CriticalOptions {
  double tol_m = 0.01;
  double m_start = 0.0;  // 0: half the upstream choking limit
};

struct GasTableOptions {
  double s_min = 0.5;
  double s_max = 5.0;
  int count = 10;
};

struct RunConfig {
  GasLaw gas = GasLaw::polytropic(0.5, 2.0);
  BernoulliProfile bernoulli = BernoulliProfile::constant(1.5);
  NozzleSpec nozzle_spec = StraightSpec{};
  double m = 0.0;
  ContinuationOptions solver;
  DiagnosticOptions diagnostics;
  CriticalOptions critical;
  GasTableOptions gastable;
  OutputPaths outputs;
  nlohmann::json effective;  // configuration after overrides
};

// Relative table paths resolve against base_dir; output paths are used as
// given. Throws ConfigError naming the offending key.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides = {});

// Best-effort summary location for a configuration that fails to load:
// outputs.summary_json_path after overrides when readable, else the default.
std::filesystem::path summary_path_hint(const std::filesystem::path& path, std::span<const std::string> overrides);

// "solver.n_xi=101": dotted key path, value parsed as JSON when it parses,
// as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

// Two numeric columns; non-numeric lines (headers) are skipped.
std::pair<std::vector<double>, std::vector<double>> read_two_column_csv(const std::filesystem::path& path);

}  // namespace nozzleflow
