#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "bundle_spectra/lattice.hpp"

namespace bundle_spectra {

// Closed lattice loop: a base site and signed 1-based direction steps
// (+j moves forward along direction j-1, -j moves backward).
struct LoopSpec {
  std::size_t base = 0;
  std::vector<int> steps;
};

// Geometric length of the loop: sum of the traversed grid spacings.
double loop_length(const LoopSpec& loop, const TorusSpec& torus);

// Parallel transport around the loop: ordered product of link matrices,
// adjoint for backward steps, acting on fiber vectors at the base site.
Eigen::MatrixXcd loop_holonomy(const LinkField& links, const LoopSpec& loop);

// The holonomy displacement functional for diagonal flat bundles.
// beta is the certified infimum over unit fiber vectors of
// sup_m 2|sin(theta_v . m / 2)| / l(m) with l(m) the shortest loop length
// in homotopy class m; the search box is grown until the tail bound
// 2/l(outside) falls below the computed supremum.
struct BetaResult {
  double beta = 0.0;
  std::vector<int> witness_m;
  int search_radius = 0;
  double tail_bound = 0.0;
  double component_beta = 0.0;  // best pure fiber component
  double mixture_beta = 0.0;    // best sampled unit mixture (rank >= 2)
};

BetaResult beta_flat(const TorusSpec& torus, const BundleSpec& bundle,
                     int search_radius);

}  // namespace bundle_spectra
