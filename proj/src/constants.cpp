#include "bundle_spectra/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bundle_spectra/quadrature.hpp"

namespace bundle_spectra {

void GeometricBounds::validate() const {
  if (n < 3) throw std::invalid_argument("dimension n must be at least 3");
  if (!(K >= 0.0)) throw std::invalid_argument("K must be nonnegative");
  if (!(d > 0.0)) throw std::invalid_argument("diameter bound d must be positive");
  if (!(r >= 0.0)) throw std::invalid_argument("curvature bound r must be nonnegative");
}

double epsilon_product(int n) {
  if (n < 3) throw std::invalid_argument("dimension n must be at least 3");
  const double x = static_cast<double>(n) / (n + 2);
  double prod = 1.0;
  double xi = 1.0;  // x^i
  for (int i = 1; i <= 100000; ++i) {
    xi *= x;
    prod *= 1.0 - xi;
    const double tail = xi * x / (1.0 - x);  // sum_{j>i} x^j
    if (tail <= 1e-12) {
      // The remaining factors lie in [1 - tail, 1); split the difference.
      return prod * (1.0 - 0.5 * tail);
    }
  }
  return prod;
}

double gallot_constant(int n, double D) {
  if (n < 3) throw std::invalid_argument("dimension n must be at least 3");
  if (!(D >= 0.0)) throw std::invalid_argument("D must be nonnegative");
  if (D == 0.0) {
    return std::pow(0.5 + 1.0 / n, n) - std::pow(2.0, -n);
  }
  const double amp = 0.5 * std::exp((n - 1.0) * D);
  const double value = integrate(
      [n, D, amp](double s) {
        return std::pow(amp * std::cosh(s * D) + std::sinh(s * D) / (n * D),
                        n - 1);
      },
      0.0, 1.0, 1e-10);
  if (!std::isfinite(value)) {
    throw std::range_error("Sobolev constant overflows for these bounds");
  }
  return value;
}

BoundConstants assemble_constants(const GeometricBounds& bounds) {
  bounds.validate();
  const double n = bounds.n;
  const double eps = epsilon_product(bounds.n);
  const double c = gallot_constant(bounds.n, bounds.D());

  BoundConstants out;
  out.epsilon = eps;
  out.c_gallot = c;
  out.C = (2.0 * n + 2.0) / n * c * bounds.d;
  out.a_log = (n + 2.0) * (n + 2.0) / (4.0 * n * eps) * std::log((n + 2.0) / n);
  out.b = (n + 2.0) * (n + 1.0) / (n * eps) * c * bounds.d *
          std::sqrt(2.0 * ((n - 1.0) * bounds.K +
                           n * n * (bounds.r + bounds.r * bounds.r)));
  out.A1 = (n + 2.0) * (n + 1.0) / (n * eps) * c * bounds.d;
  out.A2 = c * bounds.d * ((n + 2.0) * (n + 1.0) / (n + 2.0 * (1.0 - eps))) *
           (1.0 + std::sqrt(2.0) * (1.0 - eps) * std::sqrt(n + 2.0) /
                      (n * (std::sqrt(n + 2.0) - std::sqrt(n))));
  out.B1_log = out.a_log + out.b;
  const double shrink = eps * n / (n + 2.0 * (1.0 - eps));
  out.B2_log = shrink * out.a_log + shrink * out.b;
  out.source_bounds = bounds;
  return out;
}

double alpha_exponent(int n, double lambda, bool grad_dominates) {
  if (n < 3) throw std::invalid_argument("dimension n must be at least 3");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (lambda >= 1.0 || grad_dominates) return 0.5;
  const double eps = epsilon_product(n);
  return eps * n / (2.0 * n + 4.0 * (1.0 - eps));
}

double g_factor(const GeometricBounds& bounds, double lambda) {
  bounds.validate();
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  const double n = bounds.n;
  return std::sqrt(2.0 * (lambda + (n - 1.0) * bounds.K +
                          n * n * (bounds.r + bounds.r * bounds.r)));
}

double main_bound(const BoundConstants& constants, double lambda, bool case2,
                  bool grad_dominates) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const int n = constants.source_bounds.n;
  const double eps = constants.epsilon;
  const double root = std::sqrt(2.0 * lambda);
  if (case2) {
    const double alpha = eps * n / (2.0 * n + 4.0 * (1.0 - eps));
    return alpha * std::log(lambda) + constants.A2 * root + constants.B2_log;
  }
  const double alpha = alpha_exponent(n, lambda, grad_dominates);
  return alpha * std::log(lambda) + constants.A1 * root + constants.B1_log;
}

namespace {

// Prefactor sqrt(p) / ((2-p)(sqrt(p) - sqrt(2-p))); diverges as p -> 1.
double lemma_prefactor(double p) {
  return std::sqrt(p) /
         ((2.0 - p) * (std::sqrt(p) - std::sqrt(2.0 - p)));
}

double optimal_lemma_prefactor(int n) {
  // Golden-section minimization over (1, n/(n-1)], shrunk away from the
  // divergent left endpoint.
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 1.0 + 1e-6;
  double hi = static_cast<double>(n) / (n - 1.0);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = lemma_prefactor(x1);
  double f2 = lemma_prefactor(x2);
  while (hi - lo > 1e-8 * hi) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = lemma_prefactor(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = lemma_prefactor(x2);
    }
  }
  return std::min(f1, f2);
}

}  // namespace

double lemma_sup_bound(const GeometricBounds& bounds, double lambda,
                       std::optional<double> p) {
  bounds.validate();
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  double prefactor = 0.0;
  if (p.has_value()) {
    const double hi = static_cast<double>(bounds.n) / (bounds.n - 1.0);
    if (!(*p > 1.0) || !(*p <= hi)) {
      throw std::invalid_argument("p must lie in (1, n/(n-1)]");
    }
    prefactor = lemma_prefactor(*p);
  } else {
    prefactor = optimal_lemma_prefactor(bounds.n);
  }
  const double c = gallot_constant(bounds.n, bounds.D());
  return 2.0 * std::sqrt(lambda) * c * bounds.d * prefactor;
}

double moser_rhs(const BoundConstants& constants, double lambda, double k,
                 double N, double norm_2k) {
  if (!(k >= 1.0)) throw std::invalid_argument("k must be at least 1");
  if (!(N > 0.0)) throw std::invalid_argument("N must be positive");
  if (!(norm_2k >= 0.0)) throw std::invalid_argument("norm must be nonnegative");
  const double G = g_factor(constants.source_bounds, lambda);
  return std::pow(1.0 + k * constants.C * G, 1.0 / k) * std::pow(N, 1.0 / k) *
         std::pow(norm_2k, (k - 1.0) / k);
}

double inequality_a_prefactor_log(const BoundConstants& constants,
                                  double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  const double n = constants.source_bounds.n;
  const double G = g_factor(constants.source_bounds, lambda);
  return 0.5 * n * constants.C * G +
         (n * n + 2.0 * n) / 4.0 * std::log((n + 2.0) / n);
}

double holonomy_lower_bound(const BoundConstants& constants, double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  if (beta == 0.0) return 0.0;
  const double n = constants.source_bounds.n;
  const double eps = constants.epsilon;
  const double alpha = eps * n / (2.0 * n + 4.0 * (1.0 - eps));
  const double offset = constants.B1_log - std::log(beta);

  // Root of F(x) = alpha*x + A1*sqrt(2 e^x) + offset in x = log(lambda);
  // F is strictly increasing, so the fixed point is unique.
  const auto F = [&](double x) {
    return alpha * x + constants.A1 * std::sqrt(2.0 * std::exp(x)) + offset;
  };
  if (F(0.0) <= 0.0) return 1.0;  // fixed point at or above 1; capped
  double hi = 0.0;
  double lo = -32.0;
  while (F(lo) > 0.0) {
    lo *= 2.0;
    if (lo < -760.0) return 0.0;  // below the double range; clamp
  }
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (F(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

MoserSchedule moser_schedule(int n, int j_max) {
  if (n < 3) throw std::invalid_argument("dimension n must be at least 3");
  if (j_max < 1) throw std::invalid_argument("j_max must be at least 1");
  MoserSchedule sched;
  sched.q = (n + 2.0) / n;
  sched.k_values.reserve(j_max);
  sched.p_values.reserve(j_max);
  double k = 1.0;
  for (int j = 1; j <= j_max; ++j) {
    k *= sched.q;
    sched.k_values.push_back(k);
    sched.p_values.push_back(1.0 - 1.0 / k);
  }
  return sched;
}

}  // namespace bundle_spectra
