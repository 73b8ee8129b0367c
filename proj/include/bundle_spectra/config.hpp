#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bundle_spectra/lattice.hpp"

namespace bundle_spectra {

// Malformed or inconsistent configuration; the message names the offending
// field. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SolverConfig {
  int num_pairs = 1;
  double tol = 1e-9;
  int max_iter = 2000;
  std::uint64_t seed = 1;
};

struct OutputConfig {
  std::string format = "json";  // "csv" or "json"
  std::string path;             // empty = stdout
};

// One experiment: a torus, a bundle, optional bound overrides (which may
// only increase the auto-derived K, r, d), solver settings, and the checks
// to run.
struct CaseConfig {
  std::string case_id;
  TorusSpec torus;
  BundleSpec bundle;
  std::optional<double> override_K;
  std::optional<double> override_r;
  std::optional<double> override_d;
  SolverConfig solver;
  std::vector<std::string> checks;  // stored in canonical order
  int moser_j_max = 6;
  int beta_search_radius = 8;
};

struct RunConfig {
  std::vector<CaseConfig> cases;
  OutputConfig output;
};

// Recognized check ids in canonical execution order:
// eigenpair, moser, orthonormal, frame, holonomy.
const std::vector<std::string>& known_checks();

// Parses a config document: either one case's keys at the top level or a
// `cases` array, plus an optional shared `output` object. Unknown keys are
// rejected by name. A missing `checks` list defaults to every check that
// applies to the case (frame needs num_pairs == rank, holonomy needs a flat
// bundle); an explicit list must respect those rules.
RunConfig parse_run_config(const nlohmann::json& doc);

// Reads and parses a JSON config file.
RunConfig load_run_config(const std::string& path);

}  // namespace bundle_spectra
