#include "bundle_spectra/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace bundle_spectra {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) {
  throw ConfigError(message);
}

void require_object(const json& node, const std::string& where) {
  if (!node.is_object()) fail(where + " must be a JSON object");
}

void reject_unknown_keys(const json& node, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : node.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* key) {
          return item.key() == key;
        })) {
      fail("unknown key \"" + item.key() + "\" in " + where);
    }
  }
}

double number_field(const json& node, const std::string& where) {
  if (!node.is_number()) fail(where + " must be a number");
  return node.get<double>();
}

int int_field(const json& node, const std::string& where) {
  if (!node.is_number_integer()) fail(where + " must be an integer");
  return node.get<int>();
}

std::string string_field(const json& node, const std::string& where) {
  if (!node.is_string()) fail(where + " must be a string");
  return node.get<std::string>();
}

TorusSpec parse_torus(const json& node, const std::string& where) {
  require_object(node, where);
  reject_unknown_keys(node, where, {"lengths", "grid"});
  if (!node.contains("lengths") || !node.contains("grid")) {
    fail(where + " requires \"lengths\" and \"grid\" arrays");
  }
  TorusSpec torus;
  const json& lengths = node.at("lengths");
  const json& grid = node.at("grid");
  if (!lengths.is_array() || !grid.is_array()) {
    fail(where + ".lengths and " + where + ".grid must be arrays");
  }
  for (std::size_t j = 0; j < lengths.size(); ++j) {
    torus.lengths.push_back(
        number_field(lengths[j], where + ".lengths[" + std::to_string(j) + "]"));
  }
  for (std::size_t j = 0; j < grid.size(); ++j) {
    torus.grid.push_back(
        int_field(grid[j], where + ".grid[" + std::to_string(j) + "]"));
  }
  try {
    torus.validate();
  } catch (const std::invalid_argument& e) {
    fail(where + ": " + e.what());
  }
  return torus;
}

BundleSpec parse_bundle(const json& node, const std::string& where,
                        const TorusSpec& torus) {
  require_object(node, where);
  reject_unknown_keys(node, where, {"kind", "theta", "flux"});
  if (!node.contains("kind")) fail(where + " requires \"kind\"");
  const std::string kind = string_field(node.at("kind"), where + ".kind");
  BundleSpec bundle;
  if (kind == "flat") {
    if (node.contains("flux")) fail(where + ".flux is only valid for kind \"magnetic\"");
    if (!node.contains("theta")) fail(where + " requires \"theta\" for kind \"flat\"");
    const json& theta = node.at("theta");
    if (!theta.is_array()) fail(where + ".theta must be an array of angle rows");
    std::vector<std::vector<double>> angles;
    for (std::size_t c = 0; c < theta.size(); ++c) {
      const std::string row_where =
          where + ".theta[" + std::to_string(c) + "]";
      if (!theta[c].is_array()) fail(row_where + " must be an array");
      std::vector<double> row;
      for (std::size_t j = 0; j < theta[c].size(); ++j) {
        row.push_back(number_field(theta[c][j],
                                   row_where + "[" + std::to_string(j) + "]"));
      }
      angles.push_back(std::move(row));
    }
    try {
      bundle = BundleSpec::make_flat(std::move(angles));
    } catch (const std::invalid_argument& e) {
      fail(where + ": " + e.what());
    }
  } else if (kind == "magnetic") {
    if (node.contains("theta")) fail(where + ".theta is only valid for kind \"flat\"");
    if (!node.contains("flux")) fail(where + " requires \"flux\" for kind \"magnetic\"");
    const json& flux = node.at("flux");
    if (!flux.is_array()) fail(where + ".flux must be a square integer matrix");
    std::vector<std::vector<int>> quanta;
    for (std::size_t i = 0; i < flux.size(); ++i) {
      const std::string row_where = where + ".flux[" + std::to_string(i) + "]";
      if (!flux[i].is_array()) fail(row_where + " must be an array");
      std::vector<int> row;
      for (std::size_t j = 0; j < flux[i].size(); ++j) {
        row.push_back(
            int_field(flux[i][j], row_where + "[" + std::to_string(j) + "]"));
      }
      quanta.push_back(std::move(row));
    }
    try {
      bundle = BundleSpec::make_magnetic(std::move(quanta));
    } catch (const std::invalid_argument& e) {
      fail(where + ": " + e.what());
    }
  } else {
    fail(where + ".kind must be \"flat\" or \"magnetic\"");
  }
  try {
    bundle.validate(torus);
  } catch (const std::invalid_argument& e) {
    fail(where + ": " + e.what());
  }
  return bundle;
}

SolverConfig parse_solver(const json& node, const std::string& where) {
  require_object(node, where);
  reject_unknown_keys(node, where, {"num_pairs", "tol", "max_iter", "seed"});
  SolverConfig solver;
  if (node.contains("num_pairs")) {
    solver.num_pairs = int_field(node.at("num_pairs"), where + ".num_pairs");
  }
  if (node.contains("tol")) {
    solver.tol = number_field(node.at("tol"), where + ".tol");
  }
  if (node.contains("max_iter")) {
    solver.max_iter = int_field(node.at("max_iter"), where + ".max_iter");
  }
  if (node.contains("seed")) {
    const json& seed = node.at("seed");
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
      fail(where + ".seed must be a nonnegative integer");
    }
    if (seed.is_number_integer() && seed.get<std::int64_t>() < 0) {
      fail(where + ".seed must be a nonnegative integer");
    }
    solver.seed = seed.get<std::uint64_t>();
  }
  if (solver.num_pairs < 1) fail(where + ".num_pairs must be >= 1");
  if (!(solver.tol > 0.0)) fail(where + ".tol must be > 0");
  if (solver.max_iter < 1) fail(where + ".max_iter must be >= 1");
  return solver;
}

std::vector<std::string> default_checks(const CaseConfig& config) {
  std::vector<std::string> checks = {"eigenpair", "moser", "orthonormal"};
  if (config.solver.num_pairs == config.bundle.rank) checks.push_back("frame");
  if (config.bundle.kind == BundleSpec::Kind::flat) checks.push_back("holonomy");
  return checks;
}

std::vector<std::string> parse_checks(const json& node, const std::string& where,
                                      const CaseConfig& config) {
  if (!node.is_array()) fail(where + " must be an array of check ids");
  std::set<std::string> requested;
  for (const auto& entry : node) {
    const std::string id = string_field(entry, where + " entry");
    const auto& known = known_checks();
    if (std::find(known.begin(), known.end(), id) == known.end()) {
      fail("unknown check id \"" + id + "\" in " + where);
    }
    if (!requested.insert(id).second) {
      fail("duplicate check id \"" + id + "\" in " + where);
    }
  }
  if (requested.count("frame") &&
      config.solver.num_pairs != config.bundle.rank) {
    fail(where + ": check \"frame\" requires solver.num_pairs == bundle rank");
  }
  if (requested.count("holonomy") &&
      config.bundle.kind != BundleSpec::Kind::flat) {
    fail(where + ": check \"holonomy\" requires a flat bundle");
  }
  std::vector<std::string> ordered;
  for (const std::string& id : known_checks()) {
    if (requested.count(id)) ordered.push_back(id);
  }
  return ordered;
}

CaseConfig parse_case(const json& node, const std::string& where,
                      const std::string& default_id) {
  require_object(node, where);
  reject_unknown_keys(node, where,
                      {"case_id", "torus", "bundle", "overrides", "solver",
                       "checks", "moser_j_max", "beta_search_radius"});
  CaseConfig config;
  config.case_id = node.contains("case_id")
                       ? string_field(node.at("case_id"), where + ".case_id")
                       : default_id;
  if (config.case_id.empty()) fail(where + ".case_id must be nonempty");
  if (!node.contains("torus")) fail(where + " requires \"torus\"");
  config.torus = parse_torus(node.at("torus"), where + ".torus");
  if (!node.contains("bundle")) fail(where + " requires \"bundle\"");
  config.bundle = parse_bundle(node.at("bundle"), where + ".bundle", config.torus);
  if (node.contains("overrides")) {
    const json& overrides = node.at("overrides");
    const std::string sub = where + ".overrides";
    require_object(overrides, sub);
    reject_unknown_keys(overrides, sub, {"K", "r", "d"});
    if (overrides.contains("K")) {
      config.override_K = number_field(overrides.at("K"), sub + ".K");
      if (!(*config.override_K >= 0.0)) fail(sub + ".K must be >= 0");
    }
    if (overrides.contains("r")) {
      config.override_r = number_field(overrides.at("r"), sub + ".r");
      if (!(*config.override_r >= 0.0)) fail(sub + ".r must be >= 0");
    }
    if (overrides.contains("d")) {
      config.override_d = number_field(overrides.at("d"), sub + ".d");
      if (!(*config.override_d > 0.0)) fail(sub + ".d must be > 0");
    }
  }
  if (node.contains("solver")) {
    config.solver = parse_solver(node.at("solver"), where + ".solver");
  }
  if (node.contains("moser_j_max")) {
    config.moser_j_max = int_field(node.at("moser_j_max"), where + ".moser_j_max");
    if (config.moser_j_max < 1) fail(where + ".moser_j_max must be >= 1");
  }
  if (node.contains("beta_search_radius")) {
    config.beta_search_radius =
        int_field(node.at("beta_search_radius"), where + ".beta_search_radius");
    if (config.beta_search_radius < 1) {
      fail(where + ".beta_search_radius must be >= 1");
    }
  }
  config.checks = node.contains("checks")
                      ? parse_checks(node.at("checks"), where + ".checks", config)
                      : default_checks(config);
  return config;
}

OutputConfig parse_output(const json& node, const std::string& where) {
  require_object(node, where);
  reject_unknown_keys(node, where, {"format", "path"});
  OutputConfig output;
  if (node.contains("format")) {
    output.format = string_field(node.at("format"), where + ".format");
    if (output.format != "csv" && output.format != "json") {
      fail(where + ".format must be \"csv\" or \"json\"");
    }
  }
  if (node.contains("path")) {
    output.path = string_field(node.at("path"), where + ".path");
  }
  return output;
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> ids = {"eigenpair", "moser",
                                               "orthonormal", "frame",
                                               "holonomy"};
  return ids;
}

RunConfig parse_run_config(const nlohmann::json& doc) {
  require_object(doc, "config");
  RunConfig run;
  if (doc.contains("cases")) {
    reject_unknown_keys(doc, "config", {"cases", "output"});
    const json& cases = doc.at("cases");
    if (!cases.is_array() || cases.empty()) {
      fail("config.cases must be a nonempty array");
    }
    for (std::size_t i = 0; i < cases.size(); ++i) {
      run.cases.push_back(parse_case(cases[i],
                                     "cases[" + std::to_string(i) + "]",
                                     "case" + std::to_string(i)));
    }
  } else {
    json body = doc;
    body.erase("output");
    run.cases.push_back(parse_case(body, "config", "case0"));
  }
  if (doc.contains("output")) {
    run.output = parse_output(doc.at("output"), "config.output");
  }
  std::set<std::string> ids;
  for (const CaseConfig& config : run.cases) {
    if (!ids.insert(config.case_id).second) {
      fail("duplicate case_id \"" + config.case_id + "\"");
    }
  }
  return run;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    fail("config file " + path + " is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

}  // namespace bundle_spectra
