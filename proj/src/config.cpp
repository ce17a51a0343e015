#include "nozzleflow/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "nozzleflow/errors.hpp"

namespace nozzleflow {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError(key + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) fail(path.empty() ? key : path + "." + key, "missing required key");
  return obj.at(key);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.contains(key)) fail(path + "." + key, "unknown key");
  }
}

double number(const json& obj, const std::string& key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

int integer(const json& obj, const std::string& key, const std::string& path, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a nonempty array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a file path");
  std::filesystem::path p = v.get<std::string>();
  return p.is_relative() && !base.empty() ? base / p : p;
}

GasLaw parse_gas(const json& g) {
  if (!g.is_object()) fail("gas", "expected an object");
  const std::string type = require(g, "type", "gas").get<std::string>();
  if (type == "polytropic") {
    check_keys(g, "gas", {"type", "A", "gamma"});
    return GasLaw::polytropic(number(require(g, "A", "gas"), "gas.A"), number(require(g, "gamma", "gas"), "gas.gamma"));
  }
  if (type == "isothermal") {
    check_keys(g, "gas", {"type", "c"});
    return GasLaw::isothermal(number(require(g, "c", "gas"), "gas.c"));
  }
  fail("gas.type", "unknown gas type '" + type + "'; supported: polytropic, isothermal");
}

BernoulliProfile parse_bernoulli(const json& b, const std::filesystem::path& base) {
  if (b.is_number()) return BernoulliProfile::constant(b.get<double>());
  if (b.is_array()) return BernoulliProfile::polynomial(numbers(b, "B"));
  if (!b.is_object()) fail("B", "expected a number, a coefficient array or an object");
  const std::string type = require(b, "type", "B").get<std::string>();
  if (type == "constant") {
    check_keys(b, "B", {"type", "value"});
    return BernoulliProfile::constant(number(require(b, "value", "B"), "B.value"));
  }
  if (type == "polynomial") {
    check_keys(b, "B", {"type", "coefficients"});
    return BernoulliProfile::polynomial(numbers(require(b, "coefficients", "B"), "B.coefficients"));
  }
  if (type == "table") {
    check_keys(b, "B", {"type", "path"});
    auto [x, y] = read_two_column_csv(resolve(base, require(b, "path", "B"), "B.path"));
    return BernoulliProfile::tabulated(std::move(x), std::move(y));
  }
  fail("B.type", "unknown Bernoulli profile type '" + type + "'; supported: constant, polynomial, table");
}

std::pair<double, double> height_pair(const json& obj, const std::string& key, std::pair<double, double> fallback) {
  if (!obj.contains(key)) return fallback;
  const std::vector<double> v = numbers(obj.at(key), "nozzle." + key);
  if (v.size() != 2) fail("nozzle." + key, "expected [upstream height, downstream height]");
  return {v[0], v[1]};
}

NozzleSpec parse_nozzle(const json& n, const std::filesystem::path& base) {
  const std::string supported = "supported: straight, tanh_transition, bump, tabulated";
  std::string family;
  if (n.is_string()) {
    family = n.get<std::string>();
  } else if (n.is_object()) {
    family = require(n, "family", "nozzle").get<std::string>();
  } else {
    fail("nozzle", "expected a family name or an object");
  }
  const json obj = n.is_object() ? n : json{{"family", family}};
  if (family == "straight") {
    check_keys(obj, "nozzle", {"family"});
    return StraightSpec{};
  }
  if (family == "tanh_transition") {
    check_keys(obj, "nozzle", {"family", "center", "steepness", "lower", "upper"});
    TanhTransitionSpec s;
    s.center = number(obj, "center", "nozzle", s.center);
    s.steepness = number(obj, "steepness", "nozzle", s.steepness);
    std::tie(s.lower_from, s.lower_to) = height_pair(obj, "lower", {s.lower_from, s.lower_to});
    std::tie(s.upper_from, s.upper_to) = height_pair(obj, "upper", {s.upper_from, s.upper_to});
    return s;
  }
  if (family == "bump") {
    check_keys(obj, "nozzle", {"family", "amplitude", "width", "wall"});
    BumpSpec s;
    s.amplitude = number(obj, "amplitude", "nozzle", s.amplitude);
    s.width = number(obj, "width", "nozzle", s.width);
    if (obj.contains("wall")) {
      const std::string wall = obj.at("wall").get<std::string>();
      if (wall == "lower") {
        s.wall = BumpSpec::Wall::lower;
      } else if (wall == "upper") {
        s.wall = BumpSpec::Wall::upper;
      } else {
        fail("nozzle.wall", "expected 'lower' or 'upper'");
      }
    }
    return s;
  }
  if (family == "tabulated") {
    check_keys(obj, "nozzle", {"family", "lower", "upper"});
    TabulatedSpec s;
    std::tie(s.lower_x1, s.lower_height) = read_two_column_csv(resolve(base, require(obj, "lower", "nozzle"), "nozzle.lower"));
    std::tie(s.upper_x1, s.upper_height) = read_two_column_csv(resolve(base, require(obj, "upper", "nozzle"), "nozzle.upper"));
    return s;
  }
  fail("nozzle.family", "unknown nozzle family '" + family + "'; " + supported);
}

void parse_solver(const json& s, ContinuationOptions& o) {
  check_keys(s, "solver", {"n_xi", "n_eta", "L0", "L_max", "tol_nonlinear", "tol_farfield", "eps0_scale", "damping",
                           "max_iter", "boundary_mode", "warm_start"});
  o.n_xi = integer(s, "n_xi", "solver", o.n_xi);
  o.n_eta = integer(s, "n_eta", "solver", o.n_eta);
  o.L0 = number(s, "L0", "solver", o.L0);
  o.L_max = number(s, "L_max", "solver", o.L_max);
  o.tol_farfield = number(s, "tol_farfield", "solver", o.tol_farfield);
  o.eps0_scale = number(s, "eps0_scale", "solver", o.eps0_scale);
  o.picard.tol_nonlinear = number(s, "tol_nonlinear", "solver", o.picard.tol_nonlinear);
  o.picard.damping = number(s, "damping", "solver", o.picard.damping);
  o.picard.max_iter = integer(s, "max_iter", "solver", o.picard.max_iter);
  if (s.contains("warm_start")) {
    if (!s.at("warm_start").is_boolean()) fail("solver.warm_start", "expected true or false");
    o.warm_start = s.at("warm_start").get<bool>();
  }
  if (s.contains("boundary_mode")) {
    const std::string mode = s.at("boundary_mode").get<std::string>();
    if (mode == "linear") {
      o.picard.boundary_mode = BoundaryMode::linear;
    } else if (mode == "farfield_profile") {
      o.picard.boundary_mode = BoundaryMode::farfield_profile;
    } else {
      fail("solver.boundary_mode", "expected 'linear' or 'farfield_profile'");
    }
  }
}

void validate(const RunConfig& c) {
  const ContinuationOptions& s = c.solver;
  if (!(c.m > 0.0)) fail("m", "m must be positive");
  if (s.n_xi < 3 || s.n_eta < 3) fail("solver", "n_xi and n_eta must be at least 3");
  if (!(s.L0 > 0.0)) fail("solver.L0", "must be positive");
  if (!(s.L_max >= s.L0)) fail("solver.L_max", "must be at least L0");
  if (!(s.picard.tol_nonlinear > 0.0)) fail("solver.tol_nonlinear", "tolerance must be positive");
  if (!(s.tol_farfield > 0.0)) fail("solver.tol_farfield", "tolerance must be positive");
  if (!(s.eps0_scale > 0.0)) fail("solver.eps0_scale", "must be positive");
  if (!(s.picard.damping > 0.0 && s.picard.damping <= 1.0)) fail("solver.damping", "must lie in (0, 1]");
  if (s.picard.max_iter < 1) fail("solver.max_iter", "must be at least 1");
  if (!(c.critical.tol_m > 0.0)) fail("critical.tol_m", "tolerance must be positive");
  if (c.critical.m_start < 0.0) fail("critical.m_start", "must be nonnegative");
  if (!(c.diagnostics.mass_flux_tol > 0.0)) fail("diagnostics.mass_flux_tol", "tolerance must be positive");
  if (!(c.diagnostics.bernoulli_tol > 0.0)) fail("diagnostics.bernoulli_tol", "tolerance must be positive");
  if (c.diagnostics.streamlines < 1) fail("diagnostics.streamlines", "must be at least 1");
  if (c.gastable.count < 1 || !(c.gastable.s_max >= c.gastable.s_min)) fail("gastable", "need count >= 1 and s_min <= s_max");
}

}  // namespace

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  check_keys(doc, "config", {"gas", "B", "nozzle", "m", "solver", "diagnostics", "critical", "gastable", "outputs"});
  RunConfig c;
  try {
    c.gas = parse_gas(require(doc, "gas", ""));
    c.bernoulli = parse_bernoulli(require(doc, "B", ""), base_dir);
    c.nozzle_spec = parse_nozzle(require(doc, "nozzle", ""), base_dir);
    c.m = number(require(doc, "m", ""), "m");
    if (doc.contains("solver")) parse_solver(doc.at("solver"), c.solver);
    if (doc.contains("diagnostics")) {
      const json& d = doc.at("diagnostics");
      check_keys(d, "diagnostics", {"streamlines", "mass_flux_tol", "bernoulli_tol"});
      c.diagnostics.streamlines = integer(d, "streamlines", "diagnostics", c.diagnostics.streamlines);
      c.diagnostics.mass_flux_tol = number(d, "mass_flux_tol", "diagnostics", c.diagnostics.mass_flux_tol);
      c.diagnostics.bernoulli_tol = number(d, "bernoulli_tol", "diagnostics", c.diagnostics.bernoulli_tol);
    }
    if (doc.contains("critical")) {
      const json& k = doc.at("critical");
      check_keys(k, "critical", {"tol_m", "m_start"});
      c.critical.tol_m = number(k, "tol_m", "critical", c.critical.tol_m);
      c.critical.m_start = number(k, "m_start", "critical", c.critical.m_start);
    }
    if (doc.contains("gastable")) {
      const json& g = doc.at("gastable");
      check_keys(g, "gastable", {"s_min", "s_max", "count"});
      c.gastable.s_min = number(g, "s_min", "gastable", c.gastable.s_min);
      c.gastable.s_max = number(g, "s_max", "gastable", c.gastable.s_max);
      c.gastable.count = integer(g, "count", "gastable", c.gastable.count);
    }
    if (doc.contains("outputs")) {
      const json& o = doc.at("outputs");
      check_keys(o, "outputs", {"field_csv_path", "summary_json_path", "margin_csv_path", "profiles_csv_path",
                                "gastable_csv_path"});
      auto path = [&](const char* key, std::filesystem::path& out) {
        if (!o.contains(key)) return;
        if (!o.at(key).is_string()) fail(std::string("outputs.") + key, "expected a file path");
        out = o.at(key).get<std::string>();
      };
      path("field_csv_path", c.outputs.field_csv);
      path("summary_json_path", c.outputs.summary_json);
      path("margin_csv_path", c.outputs.margin_csv);
      path("profiles_csv_path", c.outputs.profiles_csv);
      path("gastable_csv_path", c.outputs.gastable_csv);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  validate(c);
  c.effective = doc;
  return c;
}

RunConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("configuration is not valid JSON");
  return parse_config(doc, base_dir);
}

RunConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError(path.string() + " is not valid JSON");
  for (const std::string& o : overrides) apply_override(doc, o);
  return parse_config(doc, path.parent_path());
}

std::filesystem::path summary_path_hint(const std::filesystem::path& path, std::span<const std::string> overrides) {
  const std::filesystem::path fallback = OutputPaths{}.summary_json;
  std::ifstream in(path);
  if (!in) return fallback;
  json doc = json::parse(in, nullptr, false);
  if (!doc.is_object()) return fallback;
  try {
    for (const std::string& o : overrides) apply_override(doc, o);
  } catch (const ConfigError&) {
    return fallback;
  }
  const json& out = doc.contains("outputs") ? doc.at("outputs") : json();
  if (out.is_object() && out.contains("summary_json_path") && out.at("summary_json_path").is_string()) {
    return out.at("summary_json_path").get<std::string>();
  }
  return fallback;
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &doc;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    if (!node->is_object()) throw ConfigError("override '" + key + "': '" + path[k] + "' is not an object");
    node = &(*node)[path[k]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError("override '" + key + "': parent is not an object");
  (*node)[path.back()] = std::move(value);
}

std::pair<std::vector<double>, std::vector<double>> read_two_column_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table " + path.string());
  std::vector<double> x, y;
  std::string line;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b;
    if (row >> a >> b) {
      x.push_back(a);
      y.push_back(b);
    }
  }
  if (x.size() < 2) throw ConfigError("table " + path.string() + " has fewer than two numeric rows");
  return {std::move(x), std::move(y)};
}

}  // namespace nozzleflow
