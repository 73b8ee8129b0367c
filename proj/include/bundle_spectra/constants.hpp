#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace bundle_spectra {

// Geometric data governing every constant: base dimension n, Ricci
// lower-bound parameter K (Ric >= -(n-1)K), diameter upper bound d, and
// bundle curvature bound r (|R^E| <= r). D = sqrt(K)*d is the combination
// entering the Sobolev constant.
struct GeometricBounds {
  int n = 3;
  double K = 0.0;
  double d = 1.0;
  double r = 0.0;

  double D() const { return std::sqrt(K) * d; }
  void validate() const;  // throws std::invalid_argument on violation
};

// The full constant ledger of the gradient sup-norm estimate
//   |grad S|_inf <= lambda^alpha * exp(A*sqrt(2*lambda)) * B * |S|_2.
// a, B1 and B2 overflow doubles for moderate inputs, so they are stored as
// natural logarithms; A1, A2, b and C stay in linear scale.
struct BoundConstants {
  double epsilon = 0.0;   // limiting Moser exponent, in (0, 1)
  double c_gallot = 0.0;  // Sobolev constant c(n, sqrt(K)*d)
  double C = 0.0;         // (2n+2)/n * c * d
  double a_log = 0.0;     // ln a(n),  a(n) = ((n+2)/n)^((n+2)^2/(4n*eps))
  double b = 0.0;         // curvature contribution, >= 0
  double A1 = 0.0;
  double A2 = 0.0;
  double B1_log = 0.0;    // ln B1 = ln a + b
  double B2_log = 0.0;    // ln B2 = (eps*n/(n+2(1-eps))) * (ln a + b)
  GeometricBounds source_bounds;
};

// Norm exponents of the Moser iteration: q = (n+2)/n, k_j = q^j and
// p_j = 1 - q^{-j}; the partial products of p_j decrease toward epsilon(n).
struct MoserSchedule {
  double q = 0.0;
  std::vector<double> k_values;
  std::vector<double> p_values;
};

// Limiting exponent epsilon(n) = prod_{i>=1} (1 - (n/(n+2))^i), computed by
// partial products with a geometric-series tail bound; absolute error <=
// 1e-12. Requires n >= 3.
double epsilon_product(int n);

// Sobolev constant
//   c(n, D) = (1/D) * int_0^D ((1/2)e^{(n-1)D} cosh t + sinh t/(nD))^{n-1} dt
// evaluated by adaptive quadrature after substituting t = s*D; at D = 0 the
// closed-form limit (1/2 + 1/n)^n - 2^{-n} is returned. Requires n >= 3 and
// D >= 0; throws std::range_error when the integrand overflows.
double gallot_constant(int n, double D);

// Derives the complete ledger from the geometric data.
BoundConstants assemble_constants(const GeometricBounds& bounds);

// Exponent of the lambda prefactor: 1/2 when lambda >= 1 or the gradient
// sup-norm dominates the section sup-norm; eps*n/(2n + 4(1-eps)) otherwise.
// Requires lambda > 0.
double alpha_exponent(int n, double lambda, bool grad_dominates);

// G = sqrt(2*(lambda + (n-1)K + n^2(r + r^2))). Requires lambda >= 0.
double g_factor(const GeometricBounds& bounds, double lambda);

// Natural log of the estimate's right-hand side per unit |S|_2:
//   lambda^alpha * exp(A*sqrt(2*lambda)) * B
// with (A1, B1) when case2 is false and (A2, B2, alpha = eps*n/(2n+4(1-eps)))
// when case2 is true. grad_dominates forces alpha = 1/2 in the case-1 branch.
// Requires lambda > 0.
double main_bound(const BoundConstants& constants, double lambda, bool case2,
                  bool grad_dominates = false);

// Natural log of the sup-norm bound per unit |S|_2:
//   exp(2*sqrt(lambda) * c * d * sqrt(p) / ((2-p)(sqrt(p) - sqrt(2-p)))).
// p must lie in (1, n/(n-1)]; when absent, the prefactor is minimized over
// that interval by golden-section search (relative tolerance 1e-8).
double lemma_sup_bound(const GeometricBounds& bounds, double lambda,
                       std::optional<double> p = std::nullopt);

// One Moser step: (1 + k*C*G)^{1/k} * N^{1/k} * norm_2k^{(k-1)/k} with
// G = g_factor(source_bounds, lambda). Requires k >= 1 and N > 0.
double moser_rhs(const BoundConstants& constants, double lambda, double k,
                 double N, double norm_2k);

// Natural log of the prefactor P collapsing the full iteration:
//   P = exp((n/2) * C * G) * ((n+2)/n)^{(n^2+2n)/4},
// so that |grad S|_inf <= P * N^{1-eps} * |grad S|_{2q}^{eps}. Requires
// lambda >= 0.
double inequality_a_prefactor_log(const BoundConstants& constants,
                                  double lambda);

// min{1, lambda*} where lambda* solves
//   lambda = (beta/B1)^{1/alpha} * exp(-(A1/alpha) * sqrt(2*lambda)),
// alpha = eps*n/(2n + 4(1-eps)). The fixed point is bracketed in log(lambda)
// and bisected to relative width 1e-13, which dominates the stated absolute
// tolerance 1e-12 on [0, 1]; values below the double range clamp to 0.
double holonomy_lower_bound(const BoundConstants& constants, double beta);

// The first j_max entries of the iteration schedule. Requires j_max >= 1.
MoserSchedule moser_schedule(int n, int j_max);

}  // namespace bundle_spectra
