#include "bundle_spectra/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

#include "bundle_spectra/eigensolver.hpp"
#include "bundle_spectra/holonomy.hpp"

namespace bundle_spectra {
namespace {

std::string short_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// Derived geometry plus increase-only overrides. The comparison gets a
// 1e-12 relative grace so a config echoing the derived value back (through
// decimal round-trips) is not rejected.
GeometricBounds derive_bounds(const CaseConfig& config, double measured_r,
                              double diameter) {
  GeometricBounds bounds;
  bounds.n = config.torus.dim();
  bounds.K = 0.0;
  bounds.d = diameter;
  bounds.r = measured_r;
  if (config.override_K) bounds.K = *config.override_K;
  if (config.override_d) {
    if (*config.override_d < diameter * (1.0 - 1e-12)) {
      throw ConfigError("case \"" + config.case_id + "\": overrides.d (" +
                        short_double(*config.override_d) +
                        ") is below the derived diameter (" +
                        short_double(diameter) +
                        "); overrides may only increase");
    }
    bounds.d = std::max(*config.override_d, diameter);
  }
  if (config.override_r) {
    if (*config.override_r < measured_r * (1.0 - 1e-12)) {
      throw ConfigError("case \"" + config.case_id + "\": overrides.r (" +
                        short_double(*config.override_r) +
                        ") is below the measured plaquette curvature (" +
                        short_double(measured_r) +
                        "); overrides may only increase");
    }
    bounds.r = std::max(*config.override_r, measured_r);
  }
  return bounds;
}

SolverOptions solver_options(const CaseConfig& config) {
  SolverOptions options;
  options.max_iter = config.solver.max_iter;
  options.seed = config.solver.seed;
  return options;
}

bool wants(const CaseConfig& config, const char* check) {
  for (const std::string& id : config.checks) {
    if (id == check) return true;
  }
  return false;
}

CaseReport run_case(const CaseConfig& config) {
  CaseReport report;
  report.case_id = config.case_id;
  const LinkField links = build_links(config.torus, config.bundle);
  const TorusMetrics metrics = torus_metrics(config.torus);
  const double measured_r = plaquette_curvature(links, config.torus).second;
  report.bounds = derive_bounds(config, measured_r, metrics.diameter);
  report.constants = assemble_constants(report.bounds);

  const auto start = std::chrono::steady_clock::now();
  std::vector<Eigenpair> pairs;
  try {
    pairs = smallest_eigenpairs(links, config.torus, config.solver.num_pairs,
                                config.solver.tol, solver_options(config));
  } catch (const SolverError& e) {
    report.solver_ok = false;
    report.solver_message = e.what();
    report.solve_seconds = seconds_since(start);
    return report;
  }
  report.solve_seconds = seconds_since(start);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    report.eigenvalues.push_back({static_cast<int>(i), pairs[i].lambda,
                                  pairs[i].residual});
  }

  for (const std::string& id : config.checks) {
    if (id == "eigenpair") {
      for (const Eigenpair& pair : pairs) {
        auto rows = check_eigenpair(pair, links, config.torus, report.constants);
        report.verdicts.insert(report.verdicts.end(), rows.begin(), rows.end());
      }
    } else if (id == "moser") {
      for (const Eigenpair& pair : pairs) {
        auto rows = check_moser_chain(pair, links, config.torus,
                                      report.constants, config.moser_j_max);
        report.verdicts.insert(report.verdicts.end(), rows.begin(), rows.end());
      }
    } else if (id == "orthonormal") {
      DeviationResult deviation = check_near_orthonormal(pairs);
      report.orthonormal_deviations = std::move(deviation.deviations);
      report.verdicts.insert(report.verdicts.end(), deviation.rows.begin(),
                             deviation.rows.end());
    } else if (id == "frame") {
      try {
        FrameResult frame = gram_schmidt_frame(pairs, links, config.torus);
        report.frame_section_deviation = std::move(frame.section_deviation);
        report.frame_gradient_sup = std::move(frame.frame_gradient_sup);
        report.verdicts.insert(report.verdicts.end(), frame.rows.begin(),
                               frame.rows.end());
      } catch (const std::runtime_error& e) {
        report.verdicts.push_back(make_verdict_row(
            "frame_orthonormal", pairs.back().lambda, 1.0, -300.0, 0.0,
            e.what()));
      }
    } else if (id == "holonomy") {
      try {
        BetaResult beta =
            beta_flat(config.torus, config.bundle, config.beta_search_radius);
        auto rows =
            check_holonomy_bound(pairs.front().lambda, beta, report.constants);
        report.beta = std::move(beta);
        report.verdicts.insert(report.verdicts.end(), rows.begin(), rows.end());
      } catch (const std::runtime_error& e) {
        report.verdicts.push_back(make_verdict_row(
            "holonomy_direct", pairs.front().lambda, 1.0, -300.0, 0.0,
            e.what()));
      }
    }
  }
  sort_rows(report.verdicts);
  return report;
}

// Least-squares slope of ln(error) against ln(h), skipping levels whose
// error is at roundoff.
std::optional<double> fit_order(const std::vector<double>& spacings,
                                const std::vector<double>& errors) {
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t l = 0; l < errors.size(); ++l) {
    if (errors[l] >= 1e-13) {
      x.push_back(std::log(spacings[l]));
      y.push_back(std::log(errors[l]));
    }
  }
  if (x.size() < 2) return std::nullopt;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

CaseReport run_convergence_case(const CaseConfig& config,
                                const std::vector<int>& refinements) {
  CaseReport report;
  report.case_id = config.case_id;
  {
    const LinkField base_links = build_links(config.torus, config.bundle);
    const double measured_r =
        plaquette_curvature(base_links, config.torus).second;
    report.bounds =
        derive_bounds(config, measured_r, torus_metrics(config.torus).diameter);
    report.constants = assemble_constants(report.bounds);
  }

  const int count = config.solver.num_pairs;
  std::vector<double> spacings;
  std::vector<std::vector<Eigenpair>> level_pairs;
  const auto start = std::chrono::steady_clock::now();
  for (int scale : refinements) {
    TorusSpec scaled = config.torus;
    for (int& n : scaled.grid) n *= scale;
    const LinkField links = build_links(scaled, config.bundle);
    std::vector<Eigenpair> pairs;
    try {
      pairs = smallest_eigenpairs(links, scaled, count, config.solver.tol,
                                  solver_options(config));
    } catch (const SolverError& e) {
      report.solver_ok = false;
      report.solver_message =
          "scale " + std::to_string(scale) + ": " + e.what();
      report.solve_seconds = seconds_since(start);
      return report;
    }
    spacings.push_back(scaled.max_spacing());
    ConvergenceLevelRecord level;
    level.scale = scale;
    level.grid = scaled.grid;
    for (const Eigenpair& pair : pairs) level.lambdas.push_back(pair.lambda);
    report.convergence_levels.push_back(std::move(level));
    level_pairs.push_back(std::move(pairs));
  }
  report.solve_seconds = seconds_since(start);

  const std::vector<Eigenpair>& finest = level_pairs.back();
  for (int i = 0; i < count; ++i) {
    report.eigenvalues.push_back({i, finest[i].lambda, finest[i].residual});
  }

  const std::size_t levels = refinements.size();
  const bool flat = config.bundle.kind == BundleSpec::Kind::flat;
  std::vector<FlatMode> targets;
  if (flat) {
    targets = flat_spectrum(config.torus, config.bundle, count, false);
  }
  for (int i = 0; i < count; ++i) {
    ConvergenceFitRecord fit;
    fit.index = i;
    if (flat) {
      fit.target = targets[i].lambda;
      for (std::size_t l = 0; l < levels; ++l) {
        fit.errors.push_back(
            std::fabs(report.convergence_levels[l].lambdas[i] - *fit.target));
      }
      fit.fitted_order = fit_order(spacings, fit.errors);
      if (fit.fitted_order) {
        report.verdicts.push_back(make_verdict_row(
            "converge_order", finest[i].lambda,
            std::fabs(*fit.fitted_order - 2.0), std::log10(0.3), 0.0,
            "index " + std::to_string(i)));
      }
    } else {
      for (std::size_t l = 0; l + 1 < levels; ++l) {
        fit.errors.push_back(
            std::fabs(report.convergence_levels[l + 1].lambdas[i] -
                      report.convergence_levels[l].lambdas[i]));
      }
    }
    for (std::size_t l = 0; l + 1 < fit.errors.size(); ++l) {
      report.verdicts.push_back(make_verdict_row(
          "converge_monotone", finest[i].lambda, fit.errors[l + 1],
          std::log10(std::max(fit.errors[l], 1e-300)), 0.0,
          "index " + std::to_string(i) + " level " + std::to_string(l) +
              " -> " + std::to_string(l + 1)));
    }
    report.convergence_fits.push_back(std::move(fit));
  }
  sort_rows(report.verdicts);
  return report;
}

}  // namespace

Report run_config(const RunConfig& config) {
  Report report;
  report.config_echo = run_config_to_json(config);
  const auto start = std::chrono::steady_clock::now();
  for (const CaseConfig& c : config.cases) {
    report.cases.push_back(run_case(c));
  }
  report.total_seconds = seconds_since(start);
  return report;
}

Report convergence_study(const RunConfig& base,
                         const std::vector<int>& refinements) {
  if (refinements.size() < 3) {
    throw ConfigError("convergence study needs at least 3 refinement levels");
  }
  for (std::size_t i = 0; i < refinements.size(); ++i) {
    if (refinements[i] < 1 ||
        (i > 0 && refinements[i] <= refinements[i - 1])) {
      throw ConfigError(
          "refinement factors must be strictly increasing positive integers");
    }
  }
  Report report;
  report.config_echo = run_config_to_json(base);
  report.config_echo["refinements"] = refinements;
  const auto start = std::chrono::steady_clock::now();
  for (const CaseConfig& c : base.cases) {
    report.cases.push_back(run_convergence_case(c, refinements));
  }
  report.total_seconds = seconds_since(start);
  return report;
}

int report_exit_code(const Report& report) {
  return report_passes(report) ? 0 : 1;
}

}  // namespace bundle_spectra
