#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "bundle_spectra/lattice.hpp"

namespace bundle_spectra {

// Forward covariant differences, one n x k fiber matrix per site:
// g[(site*dim + j)*rank + c] holds the fiber-c component of (grad_j S)(site).
struct GradientGrid {
  int rank = 0;
  int dim = 0;
  Eigen::VectorXcd g;

  std::size_t sites() const {
    return (rank > 0 && dim > 0) ? g.size() / (static_cast<std::size_t>(rank) * dim)
                                 : 0;
  }
};

// Per-site Gram matrices of a family of sections:
// entry (i, j) at `site` lives at g[(site*count + i)*count + j].
struct GramField {
  int count = 0;
  Eigen::VectorXcd g;

  std::size_t sites() const {
    return count > 0 ? g.size() / (static_cast<std::size_t>(count) * count) : 0;
  }
  std::complex<double> value(std::size_t site, int i, int j) const {
    return g[(site * count + i) * count + j];
  }
};

// Deterministic tree reduction; the result is independent of how callers
// produced the entries, which keeps norms reproducible across thread counts.
double pairwise_sum(const std::vector<double>& values);
std::complex<double> pairwise_sum(const std::vector<std::complex<double>>& values);

// (grad_j S)(x) = (U_j(x) S(x+e_j) - S(x)) / h_j for each forward direction.
GradientGrid covariant_gradient(const LinkField& links, const SectionGrid& s,
                                const TorusSpec& torus);

// (grad* grad S)(x) = sum_j (2 S(x) - U_j(x) S(x+e_j) - U_j(x-e_j)^* S(x-e_j)) / h_j^2,
// the exact adjoint composition of covariant_gradient under the uniform site measure.
SectionGrid apply_laplacian(const LinkField& links, const SectionGrid& s,
                            const TorusSpec& torus);

// Matrix-free kernel behind apply_laplacian; `in` and `out` hold sites*rank
// coefficients and must not alias.
void apply_laplacian_into(const LinkField& links, const TorusSpec& torus,
                          const std::complex<double>* in, std::complex<double>* out);

// Pointwise magnitudes: fiber norm |S|(x), Frobenius norm |grad S|(x).
std::vector<double> magnitudes(const SectionGrid& s);
std::vector<double> magnitudes(const GradientGrid& g);

// Volume-normalized L^p norm ((1/#sites) sum |v(x)|^p)^{1/p}; max for p = inf.
double lp_norm(const std::vector<double>& values, double p);
double lp_norm(const SectionGrid& s, double p);
double lp_norm(const GradientGrid& g, double p);

// Volume-normalized L^2 pairing, conjugate-linear in the first argument.
std::complex<double> l2_inner(const SectionGrid& a, const SectionGrid& b);
std::complex<double> l2_inner(const GradientGrid& a, const GradientGrid& b);

// Per-site Gram matrices G_ij(x) = <S_i(x), S_j(x)> of the fiber inner product.
GramField pointwise_gram(const std::vector<SectionGrid>& sections);

}  // namespace bundle_spectra
