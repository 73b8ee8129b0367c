#pragma once

// Shared helpers for the test suites: deterministic pseudo-random sections,
// link fields, and gauge transformations.

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "bundle_spectra/lattice.hpp"

namespace test_util {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::complex<double> random_entry(std::mt19937_64& rng) {
  return {2.0 * uniform01(rng) - 1.0, 2.0 * uniform01(rng) - 1.0};
}

inline bundle_spectra::SectionGrid random_section(std::size_t sites, int rank,
                                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  bundle_spectra::SectionGrid s;
  s.rank = rank;
  s.v.resize(sites * rank);
  for (Eigen::Index i = 0; i < s.v.size(); ++i) s.v[i] = random_entry(rng);
  return s;
}

inline Eigen::MatrixXcd random_unitary(int k, std::mt19937_64& rng) {
  Eigen::MatrixXcd g(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) g(i, j) = random_entry(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  // Fix the phase of each column so the factorization is unambiguous.
  Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j) {
    const std::complex<double> d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

inline bundle_spectra::LinkField random_links(const bundle_spectra::TorusSpec& torus,
                                              int rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  bundle_spectra::LinkField links(torus, rank);
  for (std::size_t site = 0; site < links.sites(); ++site) {
    for (int j = 0; j < links.dim(); ++j) {
      Eigen::Map<Eigen::MatrixXcd> U(links.at(site, j), rank, rank);
      U = random_unitary(rank, rng);
    }
  }
  return links;
}

// U_j(x) -> g(x) U_j(x) g(x + e_j)^*, with an independent random unitary
// g(x) per site.
inline bundle_spectra::LinkField gauge_transform(
    const bundle_spectra::LinkField& links, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int k = links.rank();
  std::vector<Eigen::MatrixXcd> g(links.sites());
  for (auto& m : g) m = random_unitary(k, rng);
  bundle_spectra::LinkField out = links;
  for (std::size_t site = 0; site < links.sites(); ++site) {
    for (int j = 0; j < links.dim(); ++j) {
      Eigen::Map<Eigen::MatrixXcd> U(out.at(site, j), k, k);
      U = g[site] * links.matrix(site, j) * g[links.forward(site, j)].adjoint();
    }
  }
  return out;
}

}  // namespace test_util
