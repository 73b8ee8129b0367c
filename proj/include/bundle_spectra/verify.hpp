#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bundle_spectra/calculus.hpp"
#include "bundle_spectra/constants.hpp"
#include "bundle_spectra/eigensolver.hpp"
#include "bundle_spectra/holonomy.hpp"
#include "bundle_spectra/lattice.hpp"

namespace bundle_spectra {

// One checked inequality lhs <= rhs. The right-hand side and the slack live
// in log10 because several bounds overflow doubles:
//   slack_log10 = rhs_log10 - log10(max(lhs, 1e-300)).
// `pass` grants a relative tolerance of 1e-9; rows whose left-hand side is a
// forward-difference sup-norm of a continuum inequality additionally receive
// the discretization allowance factor (1 + 5h) on the lhs.
struct VerdictRow {
  std::string check_id;
  double lambda = 0.0;
  double lhs = 0.0;
  double rhs_log10 = 0.0;
  double slack_log10 = 0.0;
  bool pass = false;
  std::string context;
};

// Sup deviations D_ij = sup_x |<S_i(x), S_j(x)> - delta_ij| together with
// the symmetry verdict for the matrix.
struct DeviationResult {
  Eigen::MatrixXd deviations;
  std::vector<VerdictRow> rows;
};

// Pointwise Gram-Schmidt frame built from eigensections: the frame sections,
// the distances |e_i - S_i|_inf, the frame gradient sup-norms |grad e_i|_inf,
// and the frame orthonormality verdict.
struct FrameResult {
  std::vector<SectionGrid> frames;
  std::vector<double> section_deviation;
  std::vector<double> frame_gradient_sup;
  std::vector<VerdictRow> rows;
};

// Rows for one eigenpair: the gradient sup-norm estimate in the measured
// case plus the complementary case, the sup-norm lemma at the optimal
// exponent, and the energy identity |grad S|_2^2 = lambda (within the solver
// residual plus summation roundoff). Pairs with lambda <= residual are
// parallel up to solver accuracy: the estimate rows are replaced by the
// parallel-section row |grad S|_inf <= residual.
std::vector<VerdictRow> check_eigenpair(const Eigenpair& pair,
                                        const LinkField& links,
                                        const TorusSpec& torus,
                                        const BoundConstants& constants);

// Iteration rows for k = q^j, j = 0..j_max, plus the Holder interpolation
// row and the collapsed prefactor row |grad S|_inf <= P N^{1-eps}
// |grad S|_{2q}^eps.
std::vector<VerdictRow> check_moser_chain(const Eigenpair& pair,
                                          const LinkField& links,
                                          const TorusSpec& torus,
                                          const BoundConstants& constants,
                                          int j_max);

DeviationResult check_near_orthonormal(const std::vector<Eigenpair>& pairs);

// Monotonicity along a parameter family: sorted by decreasing lambda_max,
// each sup deviation must not exceed its predecessor. Requires at least two
// levels of matching length.
std::vector<VerdictRow> check_deviation_family(
    const std::vector<double>& lambda_max,
    const std::vector<double>& deviation_sup);

// Requires exactly rank-many sections; throws std::runtime_error naming the
// site when the pointwise vectors are linearly dependent there.
FrameResult gram_schmidt_frame(const std::vector<Eigenpair>& pairs,
                               const LinkField& links, const TorusSpec& torus);

// Row 1: the proof inequality beta <= lambda1^alpha exp(A1 sqrt(2 lambda1))
// B1. Row 2: lambda1 >= holonomy_lower_bound(constants, beta).
std::vector<VerdictRow> check_holonomy_bound(double lambda1,
                                             const BetaResult& beta,
                                             const BoundConstants& constants);

// Builds a row with the slack/pass policy described on VerdictRow; lhs is
// floored at 1e-300 before taking logs.
VerdictRow make_verdict_row(std::string check_id, double lambda, double lhs,
                            double rhs_log10, double allowance_log10,
                            std::string context);

// Deterministic presentation order: check_id, then lambda; stable for ties.
void sort_rows(std::vector<VerdictRow>& rows);

}  // namespace bundle_spectra
