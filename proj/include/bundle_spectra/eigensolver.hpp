#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bundle_spectra/lattice.hpp"

namespace bundle_spectra {

// One converged eigenpair of the connection Laplacian. The section is scaled
// to unit volume-normalized L^2 norm; the residual is the volume-normalized
// L^2 norm of grad*grad S - lambda S, recomputed after convergence.
struct Eigenpair {
  double lambda = 0.0;
  SectionGrid section;
  double residual = 0.0;
};

// Thrown when the iteration exhausts its budget; carries the best residual
// reached so callers can report how close the solve came.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_ = 0.0;
};

struct SolverOptions {
  int max_iter = 2000;
  std::uint64_t seed = 1;
};

// Block Rayleigh-quotient minimization (LOBPCG) with a diagonal
// preconditioner and matrix-free operator applications. Returns the k
// smallest eigenpairs in nondecreasing order, each certified by an
// independent residual evaluation; deterministic for a fixed seed.
std::vector<Eigenpair> smallest_eigenpairs(const LinkField& links,
                                           const TorusSpec& torus, int k, double tol,
                                           const SolverOptions& options = {});

// Full Hermitian diagonalization of the explicitly assembled operator
// (degrees of freedom capped at 8192); oracle for the iterative path.
std::vector<Eigenpair> dense_reference(const LinkField& links, const TorusSpec& torus,
                                       int k);

}  // namespace bundle_spectra
