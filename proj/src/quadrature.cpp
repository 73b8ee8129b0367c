#include "bundle_spectra/quadrature.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace bundle_spectra {

namespace {

constexpr int kOrder = 15;

struct Rule {
  std::array<double, kOrder> node;
  std::array<double, kOrder> weight;
};

// Legendre polynomial P_15 and its derivative at x, by the three-term
// recurrence; used to place the rule nodes by Newton iteration.
void legendre15(long double x, long double* p, long double* dp) {
  long double p0 = 1.0L, p1 = x;
  for (int k = 2; k <= kOrder; ++k) {
    const long double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  *p = p1;
  *dp = kOrder * (x * p1 - p0) / (x * x - 1.0L);
}

Rule make_rule() {
  Rule r;
  const long double pi = 3.14159265358979323846264338327950288L;
  for (int i = 0; i < kOrder; ++i) {
    long double x = std::cos(static_cast<double>(pi * (i + 0.75L) / (kOrder + 0.5L)));
    long double p = 0, dp = 0;
    for (int it = 0; it < 100; ++it) {
      legendre15(x, &p, &dp);
      const long double dx = p / dp;
      x -= dx;
      if (std::fabs(static_cast<double>(dx)) < 1e-19) break;
    }
    legendre15(x, &p, &dp);
    r.node[i] = static_cast<double>(x);
    r.weight[i] = static_cast<double>(2.0L / ((1.0L - x * x) * dp * dp));
  }
  return r;
}

const Rule& rule() {
  static const Rule r = make_rule();
  return r;
}

double panel(const std::function<double(double)>& f, double a, double b) {
  const Rule& r = rule();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < kOrder; ++i) {
    const double v = f(mid + half * r.node[i]);
    if (!std::isfinite(v)) {
      throw std::range_error("integrand evaluated to a non-finite value");
    }
    sum += r.weight[i] * v;
  }
  return half * sum;
}

double refine(const std::function<double(double)>& f, double a, double b,
              double whole, double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = panel(f, a, mid);
  const double right = panel(f, mid, b);
  const double split = left + right;
  if (std::fabs(split - whole) <= tol || depth >= 48) return split;
  return refine(f, a, mid, left, 0.5 * tol, depth + 1) +
         refine(f, mid, b, right, 0.5 * tol, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol) {
  if (!(b >= a)) throw std::invalid_argument("integration bounds out of order");
  if (a == b) return 0.0;
  const double whole = panel(f, a, b);
  const double tol = rel_tol * std::max(std::fabs(whole), 1e-300);
  return refine(f, a, b, whole, tol, 0);
}

}  // namespace bundle_spectra
