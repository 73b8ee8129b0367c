#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "bundle_spectra/config.hpp"
#include "bundle_spectra/constants.hpp"
#include "bundle_spectra/holonomy.hpp"
#include "bundle_spectra/verify.hpp"

namespace bundle_spectra {

struct EigenvalueRecord {
  int index = 0;
  double lambda = 0.0;
  double residual = 0.0;
};

// One grid level of a convergence study: the scale factor applied to the
// base grid and the eigenvalues computed there.
struct ConvergenceLevelRecord {
  int scale = 1;
  std::vector<int> grid;
  std::vector<double> lambdas;
};

// Per-eigenvalue fit: errors against the analytic target when one exists
// (flat bundles), successive level differences otherwise; fitted_order is
// the least-squares slope of ln(error) against ln(h) over the levels whose
// error exceeds roundoff.
struct ConvergenceFitRecord {
  int index = 0;
  std::optional<double> target;
  std::vector<double> errors;
  std::optional<double> fitted_order;
};

struct CaseReport {
  std::string case_id;
  GeometricBounds bounds;
  BoundConstants constants;
  bool solver_ok = true;
  std::string solver_message;
  std::vector<EigenvalueRecord> eigenvalues;
  std::vector<VerdictRow> verdicts;
  std::optional<Eigen::MatrixXd> orthonormal_deviations;
  std::vector<double> frame_section_deviation;  // nonempty iff frame check ran
  std::vector<double> frame_gradient_sup;
  std::optional<BetaResult> beta;
  std::vector<ConvergenceLevelRecord> convergence_levels;
  std::vector<ConvergenceFitRecord> convergence_fits;
  double solve_seconds = 0.0;
};

struct Report {
  nlohmann::ordered_json config_echo;
  std::vector<CaseReport> cases;
  double total_seconds = 0.0;
};

// True when every solver converged and every verdict row passed.
bool report_passes(const Report& report);

// Effective configuration with defaults filled in, in stable key order.
nlohmann::ordered_json run_config_to_json(const RunConfig& config);

// Constant ledger with the log-scaled entries also rendered in log10, for
// reading slack columns directly.
nlohmann::ordered_json constants_ledger_json(const BoundConstants& constants);

// Full report tree in stable key order. All timing lives under "timing"
// subtrees so reports can be compared net of wall-clock noise.
nlohmann::ordered_json report_to_json(const Report& report);

// Serialized report: JSON is the full tree; CSV is the verdict table with
// header case_id,check_id,lambda,lhs,rhs_log10,slack_log10,pass and floats
// rendered with 17 significant digits.
std::string emit_report(const Report& report, const std::string& format);

}  // namespace bundle_spectra
