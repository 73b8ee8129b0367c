#pragma once

#include <functional>

namespace bundle_spectra {

// Adaptive Gauss-Legendre quadrature of f over [a, b]. Each panel is
// integrated with a 15-point rule and split in half until the refined value
// agrees with the parent panel within its share of the tolerance budget.
// Throws std::range_error if the integrand evaluates to a non-finite value.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol);

}  // namespace bundle_spectra
