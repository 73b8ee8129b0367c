#pragma once

#include <vector>

#include "bundle_spectra/config.hpp"
#include "bundle_spectra/report.hpp"

namespace bundle_spectra {

// Runs every configured case: builds the link field, derives the geometric
// bounds (d from the torus metrics, r from the measured plaquette curvature,
// K = 0), applies the increase-only overrides, assembles the constant
// ledger, solves the eigenproblem, and runs the requested checks. A solver
// failure yields a partial case report with solver_ok = false; an override
// below its derived value raises ConfigError.
Report run_config(const RunConfig& config);

// Refinement study: re-solves each case on the base grid scaled by each
// factor (at least three strictly increasing positive integers). Flat
// bundles are measured against the continuum spectrum and get a fitted
// convergence order; magnetic bundles fall back to self-convergence of
// successive level differences. Emits converge_monotone and converge_order
// verdict rows; the reported eigenvalues come from the finest level.
Report convergence_study(const RunConfig& base,
                         const std::vector<int>& refinements);

// 0 when every solver converged and every verdict passed, 1 otherwise.
int report_exit_code(const Report& report);

}  // namespace bundle_spectra
