#include "bundle_spectra/report.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace bundle_spectra {
namespace {

using nlohmann::ordered_json;

constexpr double kLn10 = 2.302585092994045684;

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

ordered_json bounds_json(const GeometricBounds& bounds) {
  return ordered_json{
      {"n", bounds.n}, {"K", bounds.K}, {"d", bounds.d}, {"r", bounds.r}};
}

ordered_json verdict_json(const VerdictRow& row) {
  return ordered_json{{"check_id", row.check_id},
                      {"lambda", row.lambda},
                      {"lhs", row.lhs},
                      {"rhs_log10", row.rhs_log10},
                      {"slack_log10", row.slack_log10},
                      {"pass", row.pass},
                      {"context", row.context}};
}

ordered_json beta_json(const BetaResult& beta) {
  return ordered_json{{"beta", beta.beta},
                      {"witness_m", beta.witness_m},
                      {"search_radius", beta.search_radius},
                      {"tail_bound", beta.tail_bound},
                      {"component_beta", beta.component_beta},
                      {"mixture_beta", beta.mixture_beta}};
}

ordered_json case_json(const CaseReport& report) {
  ordered_json node;
  node["case_id"] = report.case_id;
  node["bounds"] = bounds_json(report.bounds);
  node["constants"] = constants_ledger_json(report.constants);
  ordered_json solver;
  solver["ok"] = report.solver_ok;
  solver["message"] = report.solver_message;
  ordered_json eigenvalues = ordered_json::array();
  for (const EigenvalueRecord& record : report.eigenvalues) {
    eigenvalues.push_back(ordered_json{{"index", record.index},
                                       {"lambda", record.lambda},
                                       {"residual", record.residual}});
  }
  solver["eigenvalues"] = std::move(eigenvalues);
  node["solver"] = std::move(solver);
  ordered_json verdicts = ordered_json::array();
  for (const VerdictRow& row : report.verdicts) {
    verdicts.push_back(verdict_json(row));
  }
  node["verdicts"] = std::move(verdicts);
  if (report.orthonormal_deviations) {
    const Eigen::MatrixXd& d = *report.orthonormal_deviations;
    ordered_json matrix = ordered_json::array();
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index j = 0; j < d.cols(); ++j) row.push_back(d(i, j));
      matrix.push_back(std::move(row));
    }
    node["orthonormal"] = ordered_json{{"deviations", std::move(matrix)}};
  }
  if (!report.frame_section_deviation.empty()) {
    node["frame"] =
        ordered_json{{"section_deviation", report.frame_section_deviation},
                     {"gradient_sup", report.frame_gradient_sup}};
  }
  if (report.beta) node["beta"] = beta_json(*report.beta);
  if (!report.convergence_levels.empty()) {
    ordered_json levels = ordered_json::array();
    for (const ConvergenceLevelRecord& level : report.convergence_levels) {
      levels.push_back(ordered_json{{"scale", level.scale},
                                    {"grid", level.grid},
                                    {"lambdas", level.lambdas}});
    }
    ordered_json fits = ordered_json::array();
    for (const ConvergenceFitRecord& fit : report.convergence_fits) {
      ordered_json entry;
      entry["index"] = fit.index;
      if (fit.target) entry["target"] = *fit.target;
      entry["errors"] = fit.errors;
      if (fit.fitted_order) entry["fitted_order"] = *fit.fitted_order;
      fits.push_back(std::move(entry));
    }
    node["convergence"] =
        ordered_json{{"levels", std::move(levels)}, {"fits", std::move(fits)}};
  }
  node["timing"] = ordered_json{{"solve_seconds", report.solve_seconds}};
  return node;
}

}  // namespace

bool report_passes(const Report& report) {
  for (const CaseReport& c : report.cases) {
    if (!c.solver_ok) return false;
    for (const VerdictRow& row : c.verdicts) {
      if (!row.pass) return false;
    }
  }
  return true;
}

nlohmann::ordered_json run_config_to_json(const RunConfig& config) {
  ordered_json cases = ordered_json::array();
  for (const CaseConfig& c : config.cases) {
    ordered_json node;
    node["case_id"] = c.case_id;
    node["torus"] =
        ordered_json{{"lengths", c.torus.lengths}, {"grid", c.torus.grid}};
    ordered_json bundle;
    if (c.bundle.kind == BundleSpec::Kind::flat) {
      bundle["kind"] = "flat";
      bundle["theta"] = c.bundle.theta;
    } else {
      bundle["kind"] = "magnetic";
      bundle["flux"] = c.bundle.flux;
    }
    node["bundle"] = std::move(bundle);
    if (c.override_K || c.override_r || c.override_d) {
      ordered_json overrides;
      if (c.override_K) overrides["K"] = *c.override_K;
      if (c.override_r) overrides["r"] = *c.override_r;
      if (c.override_d) overrides["d"] = *c.override_d;
      node["overrides"] = std::move(overrides);
    }
    node["solver"] = ordered_json{{"num_pairs", c.solver.num_pairs},
                                  {"tol", c.solver.tol},
                                  {"max_iter", c.solver.max_iter},
                                  {"seed", c.solver.seed}};
    node["checks"] = c.checks;
    node["moser_j_max"] = c.moser_j_max;
    node["beta_search_radius"] = c.beta_search_radius;
    cases.push_back(std::move(node));
  }
  ordered_json doc;
  doc["cases"] = std::move(cases);
  doc["output"] = ordered_json{{"format", config.output.format},
                               {"path", config.output.path}};
  return doc;
}

nlohmann::ordered_json constants_ledger_json(const BoundConstants& constants) {
  ordered_json node;
  node["epsilon"] = constants.epsilon;
  node["c_gallot"] = constants.c_gallot;
  node["C"] = constants.C;
  node["a_log"] = constants.a_log;
  node["b"] = constants.b;
  node["A1"] = constants.A1;
  node["A2"] = constants.A2;
  node["B1_log"] = constants.B1_log;
  node["B2_log"] = constants.B2_log;
  node["a_log10"] = constants.a_log / kLn10;
  node["B1_log10"] = constants.B1_log / kLn10;
  node["B2_log10"] = constants.B2_log / kLn10;
  node["bounds"] = bounds_json(constants.source_bounds);
  return node;
}

nlohmann::ordered_json report_to_json(const Report& report) {
  ordered_json doc;
  doc["config"] = report.config_echo;
  ordered_json cases = ordered_json::array();
  for (const CaseReport& c : report.cases) cases.push_back(case_json(c));
  doc["cases"] = std::move(cases);
  doc["passes"] = report_passes(report);
  doc["timing"] = ordered_json{{"total_seconds", report.total_seconds}};
  return doc;
}

std::string emit_report(const Report& report, const std::string& format) {
  if (format == "json") {
    return report_to_json(report).dump(2) + "\n";
  }
  if (format == "csv") {
    std::string out =
        "case_id,check_id,lambda,lhs,rhs_log10,slack_log10,pass\n";
    for (const CaseReport& c : report.cases) {
      for (const VerdictRow& row : c.verdicts) {
        out += c.case_id;
        out += ',';
        out += row.check_id;
        out += ',';
        out += format_double(row.lambda);
        out += ',';
        out += format_double(row.lhs);
        out += ',';
        out += format_double(row.rhs_log10);
        out += ',';
        out += format_double(row.slack_log10);
        out += ',';
        out += row.pass ? "true" : "false";
        out += '\n';
      }
    }
    return out;
  }
  throw std::invalid_argument("unknown report format: " + format);
}

}  // namespace bundle_spectra
