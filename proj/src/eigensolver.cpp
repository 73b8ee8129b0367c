#include "bundle_spectra/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <array>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "bundle_spectra/calculus.hpp"

namespace bundle_spectra {

namespace {

constexpr double kTieTolerance = 1e-10;

void check_problem(const LinkField& links, const TorusSpec& torus, int k) {
  if (links.sites() != static_cast<std::size_t>(torus.sites())) {
    throw std::invalid_argument("link field does not match torus site count");
  }
  const std::size_t dof = links.sites() * static_cast<std::size_t>(links.rank());
  if (k < 1) throw std::invalid_argument("at least one eigenpair must be requested");
  if (static_cast<std::size_t>(k) > dof) {
    throw std::invalid_argument("more eigenpairs requested than degrees of freedom");
  }
}

Eigen::MatrixXcd apply_block(const LinkField& links, const TorusSpec& torus,
                             const Eigen::MatrixXcd& block) {
  Eigen::MatrixXcd out(block.rows(), block.cols());
  for (Eigen::Index c = 0; c < block.cols(); ++c) {
    apply_laplacian_into(links, torus, block.col(c).data(), out.col(c).data());
  }
  return out;
}

// Gram-eigenvalue orthonormalization: returns T with (S*T) orthonormal,
// dropping directions whose scaled Gram eigenvalue falls below a cutoff.
// Columns are normalized before forming the Gram matrix so that small
// residual blocks are not mistaken for numerically dependent directions.
Eigen::MatrixXcd orthonormalizer(const Eigen::MatrixXcd& s) {
  if (s.cols() == 0) return Eigen::MatrixXcd(0, 0);
  Eigen::VectorXd norms(s.cols());
  for (Eigen::Index i = 0; i < s.cols(); ++i) norms[i] = s.col(i).norm();
  if (!(norms.maxCoeff() > 0.0)) return Eigen::MatrixXcd(s.cols(), 0);
  const double norm_floor = norms.maxCoeff() * 1e-150;

  Eigen::MatrixXcd gram = s.adjoint() * s;
  for (Eigen::Index i = 0; i < s.cols(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      const double scale = std::max(norms[i], norm_floor) * std::max(norms[j], norm_floor);
      gram(i, j) = (norms[i] > norm_floor && norms[j] > norm_floor)
                       ? gram(i, j) / scale
                       : std::complex<double>(i == j ? 1e-300 : 0.0);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
  const Eigen::VectorXd d = eig.eigenvalues();
  const double cutoff = std::max(d.maxCoeff(), 0.0) * 1e-8;
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] > cutoff && d[i] > 0.0) ++kept;
  }
  Eigen::MatrixXcd t(s.cols(), kept);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] > cutoff && d[i] > 0.0) {
      t.col(col) = eig.eigenvectors().col(i) / std::sqrt(d[i]);
      for (Eigen::Index row = 0; row < s.cols(); ++row) {
        t(row, col) /= std::max(norms[row], norm_floor);
      }
      ++col;
    }
  }
  return t;
}

// Deterministic projection signature that orders eigenvectors inside an
// eigenvalue tie; the probe vectors depend only on the problem size.
std::vector<std::array<double, 4>> tie_signatures(const Eigen::MatrixXcd& x) {
  std::mt19937_64 rng(0x5851F42D4C957F2DULL);
  auto uniform = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  Eigen::VectorXcd z1(x.rows()), z2(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    z1[i] = std::complex<double>(uniform() - 0.5, uniform() - 0.5);
    z2[i] = std::complex<double>(uniform() - 0.5, uniform() - 0.5);
  }
  std::vector<std::array<double, 4>> sig(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const std::complex<double> p1 = z1.dot(x.col(c));
    const std::complex<double> p2 = z2.dot(x.col(c));
    sig[c] = {p1.real(), p1.imag(), p2.real(), p2.imag()};
  }
  return sig;
}

std::vector<Eigenpair> package_pairs(const LinkField& links, const TorusSpec& torus,
                                     const Eigen::VectorXd& lambda,
                                     const Eigen::MatrixXcd& x, int k) {
  const int rank = links.rank();
  const double scale = std::sqrt(static_cast<double>(links.sites()));

  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;
  const auto sig = tie_signatures(x.leftCols(k));
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (std::fabs(lambda[a] - lambda[b]) > kTieTolerance) return lambda[a] < lambda[b];
    return sig[a] < sig[b];
  });

  // Independent residual certificates: one fresh operator application per pair.
  const Eigen::MatrixXcd ax = apply_block(links, torus, x.leftCols(k));
  std::vector<Eigenpair> pairs(k);
  for (int i = 0; i < k; ++i) {
    const int c = order[i];
    Eigenpair& pair = pairs[i];
    pair.lambda = lambda[c];
    pair.residual = (ax.col(c) - lambda[c] * x.col(c)).norm();
    pair.section.rank = rank;
    pair.section.v = x.col(c) * scale;
  }
  return pairs;
}

}  // namespace

std::vector<Eigenpair> smallest_eigenpairs(const LinkField& links,
                                           const TorusSpec& torus, int k, double tol,
                                           const SolverOptions& options) {
  check_problem(links, torus, k);
  if (!(tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
  if (options.max_iter < 1) {
    throw std::invalid_argument("solver iteration budget must be positive");
  }

  const std::size_t dof = links.sites() * static_cast<std::size_t>(links.rank());
  const int m =
      static_cast<int>(std::min<std::size_t>(dof, static_cast<std::size_t>(k) + 4));

  // Gaussian starting block via Box-Muller, reproducible across standard
  // libraries (std::normal_distribution is not pinned by the standard).
  std::mt19937_64 rng(options.seed);
  auto uniform = [&rng]() {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  };
  Eigen::MatrixXcd x(dof, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(dof); ++i) {
      const double radius = std::sqrt(-2.0 * std::log(uniform()));
      const double angle = 2.0 * M_PI * uniform();
      x(i, c) = std::complex<double>(radius * std::cos(angle),
                                     radius * std::sin(angle));
    }
  }
  x = x * orthonormalizer(x);
  if (x.cols() < m) throw SolverError("starting block lost rank", -1.0);

  double inv_diag = 0.0;
  for (int j = 0; j < torus.dim(); ++j) {
    inv_diag += 2.0 / (torus.spacing(j) * torus.spacing(j));
  }
  inv_diag = 1.0 / inv_diag;

  Eigen::MatrixXcd ax = apply_block(links, torus, x);
  Eigen::VectorXd lambda(m);
  {
    Eigen::MatrixXcd h = x.adjoint() * ax;
    h = 0.5 * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
    lambda = eig.eigenvalues();
    x = (x * eig.eigenvectors()).eval();
    ax = (ax * eig.eigenvectors()).eval();
  }

  Eigen::MatrixXcd p(dof, 0), ap(dof, 0);
  double best_residual = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < options.max_iter; ++iter) {
    Eigen::MatrixXcd r = ax;
    for (int i = 0; i < m; ++i) r.col(i) -= lambda[i] * x.col(i);
    double worst = 0.0;
    for (int i = 0; i < k; ++i) worst = std::max(worst, r.col(i).norm());
    if (!std::isfinite(worst)) {
      throw SolverError("iteration produced non-finite values", best_residual);
    }
    best_residual = std::min(best_residual, worst);

    if (worst <= tol) {
      // Certify against drift in the cached products before accepting.
      ax = apply_block(links, torus, x);
      r = ax;
      for (int i = 0; i < m; ++i) r.col(i) -= lambda[i] * x.col(i);
      worst = 0.0;
      for (int i = 0; i < k; ++i) worst = std::max(worst, r.col(i).norm());
      best_residual = std::min(best_residual, worst);
      if (worst <= tol) return package_pairs(links, torus, lambda, x, k);
    }

    // Each block is orthonormalized on its own and projected against the
    // earlier blocks twice, so [X W P] is orthonormal by construction and
    // the Ritz step never divides by small Gram eigenvalues.
    Eigen::MatrixXcd w = r * inv_diag;
    for (int pass = 0; pass < 2; ++pass) {
      w -= x * (x.adjoint() * w).eval();
      w = (w * orthonormalizer(w)).eval();
    }
    const Eigen::MatrixXcd aw = apply_block(links, torus, w);

    if (p.cols() > 0) {
      for (int pass = 0; pass < 2; ++pass) {
        Eigen::MatrixXcd cx = x.adjoint() * p;
        Eigen::MatrixXcd cw = w.adjoint() * p;
        p -= x * cx + w * cw;
        ap -= ax * cx + aw * cw;
        const Eigen::MatrixXcd tp = orthonormalizer(p);
        p = (p * tp).eval();
        ap = (ap * tp).eval();
      }
    }

    const Eigen::Index span = m + w.cols() + p.cols();
    if (span == m) {
      throw SolverError("search subspace stopped growing before convergence",
                        best_residual);
    }
    Eigen::MatrixXcd s(dof, span), as(dof, span);
    s.leftCols(m) = x;
    s.middleCols(m, w.cols()) = w;
    as.leftCols(m) = ax;
    as.middleCols(m, w.cols()) = aw;
    if (p.cols() > 0) {
      s.rightCols(p.cols()) = p;
      as.rightCols(p.cols()) = ap;
    }

    Eigen::MatrixXcd h = s.adjoint() * as;
    h = 0.5 * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);

    const Eigen::MatrixXcd c = eig.eigenvectors().leftCols(m);
    lambda = eig.eigenvalues().head(m);
    x = s * c;
    ax = as * c;

    // Next conjugate block: the part of the update outside the previous X.
    const Eigen::MatrixXcd c_tail = c.bottomRows(span - m);
    p = s.rightCols(span - m) * c_tail;
    ap = as.rightCols(span - m) * c_tail;
  }

  throw SolverError("eigensolver did not converge within the iteration budget",
                    best_residual);
}

std::vector<Eigenpair> dense_reference(const LinkField& links, const TorusSpec& torus,
                                       int k) {
  check_problem(links, torus, k);
  const std::size_t dof = links.sites() * static_cast<std::size_t>(links.rank());
  if (dof > 8192) {
    throw std::invalid_argument("dense reference is capped at 8192 degrees of freedom");
  }

  Eigen::MatrixXcd a(dof, dof);
  Eigen::VectorXcd unit = Eigen::VectorXcd::Zero(dof);
  for (std::size_t i = 0; i < dof; ++i) {
    unit[i] = 1.0;
    apply_laplacian_into(links, torus, unit.data(), a.col(i).data());
    unit[i] = 0.0;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(a);
  if (eig.info() != Eigen::Success) {
    throw SolverError("dense diagonalization failed", -1.0);
  }
  return package_pairs(links, torus, eig.eigenvalues().head(k),
                       eig.eigenvectors().leftCols(k), k);
}

}  // namespace bundle_spectra
