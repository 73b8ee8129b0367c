#include "bundle_spectra/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "bundle_spectra/parallel.hpp"

namespace bundle_spectra {

std::size_t TorusSpec::sites() const {
  std::size_t total = 1;
  for (int n : grid) total *= static_cast<std::size_t>(n);
  return total;
}

double TorusSpec::max_spacing() const {
  double h = 0.0;
  for (int j = 0; j < dim(); ++j) h = std::max(h, spacing(j));
  return h;
}

void TorusSpec::validate() const {
  if (lengths.size() != grid.size()) {
    throw std::invalid_argument("torus lengths and grid must have equal size");
  }
  if (dim() < 3) throw std::invalid_argument("torus dimension must be at least 3");
  for (double L : lengths) {
    if (!(L > 0.0)) throw std::invalid_argument("torus lengths must be positive");
  }
  for (int n : grid) {
    if (n < 4) throw std::invalid_argument("grid size must be at least 4 per direction");
  }
}

GridIndexer::GridIndexer(const TorusSpec& torus)
    : grid(torus.grid), strides(torus.grid.size()) {
  const int n = static_cast<int>(grid.size());
  strides[n - 1] = 1;
  for (int j = n - 2; j >= 0; --j) {
    strides[j] = strides[j + 1] * static_cast<std::size_t>(grid[j + 1]);
  }
}

std::size_t GridIndexer::flatten(const int* coords) const {
  std::size_t site = 0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    site += static_cast<std::size_t>(coords[j]) * strides[j];
  }
  return site;
}

void GridIndexer::coordinates(std::size_t site, int* coords) const {
  for (std::size_t j = 0; j < grid.size(); ++j) {
    coords[j] = static_cast<int>(site / strides[j]);
    site %= strides[j];
  }
}

BundleSpec BundleSpec::make_flat(std::vector<std::vector<double>> angles) {
  BundleSpec spec;
  spec.kind = Kind::flat;
  spec.rank = static_cast<int>(angles.size());
  spec.theta = std::move(angles);
  return spec;
}

BundleSpec BundleSpec::make_magnetic(std::vector<std::vector<int>> flux) {
  BundleSpec spec;
  spec.kind = Kind::magnetic;
  spec.rank = 1;
  spec.flux = std::move(flux);
  return spec;
}

void BundleSpec::validate(const TorusSpec& torus) const {
  torus.validate();
  const int n = torus.dim();
  if (rank < 1) throw std::invalid_argument("bundle rank must be positive");
  if (kind == Kind::flat) {
    if (static_cast<int>(theta.size()) != rank) {
      throw std::invalid_argument("flat bundle needs one angle tuple per fiber component");
    }
    for (const auto& row : theta) {
      if (static_cast<int>(row.size()) != n) {
        throw std::invalid_argument("holonomy angle tuple size must match the dimension");
      }
      for (double t : row) {
        if (!(t > -M_PI) || !(t <= M_PI)) {
          throw std::invalid_argument("holonomy angles must lie in (-pi, pi]");
        }
      }
    }
  } else {
    if (rank != 1) {
      throw std::invalid_argument("magnetic bundles are line bundles (rank 1)");
    }
    if (static_cast<int>(flux.size()) != n) {
      throw std::invalid_argument("flux matrix must be n x n");
    }
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(flux[i].size()) != n) {
        throw std::invalid_argument("flux matrix must be n x n");
      }
      for (int j = 0; j < n; ++j) {
        if (flux[i][j] != -flux[j][i]) {
          throw std::invalid_argument("flux matrix must be antisymmetric");
        }
        // Keep every plaquette phase inside (-pi, pi) so arg() is faithful.
        if (2 * std::abs(flux[i][j]) >=
            static_cast<long>(torus.grid[i]) * torus.grid[j]) {
          throw std::invalid_argument(
              "flux too large for this grid: plaquette phase would wrap");
        }
      }
    }
  }
}

LinkField::LinkField(const TorusSpec& torus, int rank)
    : rank_(rank),
      dim_(torus.dim()),
      sites_(torus.sites()),
      indexer_(torus),
      u_(sites_ * dim_ * rank * rank),
      neighbors_(2 * sites_ * dim_) {
  parallel_for(0, sites_, [this](std::size_t lo, std::size_t hi) {
    std::vector<int> c(dim_);
    for (std::size_t site = lo; site < hi; ++site) {
      coordinates(site, c.data());
      for (int j = 0; j < dim_; ++j) {
        const std::size_t stride = indexer_.strides[j];
        const int N = indexer_.grid[j];
        neighbors_[2 * (site * dim_ + j)] =
            c[j] + 1 == N ? site - stride * (N - 1) : site + stride;
        neighbors_[2 * (site * dim_ + j) + 1] =
            c[j] == 0 ? site + stride * (N - 1) : site - stride;
      }
    }
  });
}

double LinkField::unitarity_defect() const {
  double worst = 0.0;
  Eigen::MatrixXcd prod(rank_, rank_);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(rank_, rank_);
  for (std::size_t site = 0; site < sites_; ++site) {
    for (int j = 0; j < dim_; ++j) {
      const auto U = matrix(site, j);
      prod.noalias() = U * U.adjoint();
      worst = std::max(worst, (prod - id).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

LinkField build_links(const TorusSpec& torus, const BundleSpec& bundle) {
  bundle.validate(torus);
  const int n = torus.dim();
  const int k = bundle.rank;
  LinkField links(torus, k);

  if (bundle.kind == BundleSpec::Kind::flat) {
    // Diagonal connection: the same diagonal unitary on every site.
    std::vector<std::vector<std::complex<double>>> diag(
        n, std::vector<std::complex<double>>(k));
    for (int j = 0; j < n; ++j) {
      for (int c = 0; c < k; ++c) {
        const double phase = bundle.theta[c][j] * torus.spacing(j) /
                             torus.lengths[j];
        diag[j][c] = std::polar(1.0, phase);
      }
    }
    parallel_for(0, links.sites(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t site = lo; site < hi; ++site) {
        for (int j = 0; j < n; ++j) {
          std::complex<double>* U = links.at(site, j);
          for (int c = 0; c < k; ++c) U[c * k + c] = diag[j][c];
        }
      }
    });
    return links;
  }

  // Magnetic line bundle: accumulate phases per flux plane, then
  // exponentiate. The direction-i links carry -F*x_j*h_i; the direction-j
  // links that close the torus carry +F*L_j*x_i.
  parallel_for(0, links.sites(), [&](std::size_t lo, std::size_t hi) {
    std::vector<int> c(n);
    std::vector<double> phase(n);
    for (std::size_t site = lo; site < hi; ++site) {
      links.coordinates(site, c.data());
      std::fill(phase.begin(), phase.end(), 0.0);
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          if (bundle.flux[i][j] == 0) continue;
          const double F = 2.0 * M_PI * bundle.flux[i][j] /
                           (torus.lengths[i] * torus.lengths[j]);
          const double xi = c[i] * torus.spacing(i);
          const double xj = c[j] * torus.spacing(j);
          phase[i] -= F * xj * torus.spacing(i);
          if (c[j] + 1 == torus.grid[j]) {
            phase[j] += F * torus.lengths[j] * xi;
          }
        }
      }
      for (int j = 0; j < n; ++j) {
        links.at(site, j)[0] = std::polar(1.0, phase[j]);
      }
    }
  });
  return links;
}

std::pair<CurvatureField, double> plaquette_curvature(const LinkField& links,
                                                      const TorusSpec& torus) {
  const int n = links.dim();
  const int k = links.rank();
  CurvatureField field;
  field.dim = n;
  field.rank = k;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) field.planes.emplace_back(i, j);
  }
  field.f.assign(links.sites() * field.planes.size() * k, 0.0);

  parallel_for(0, links.sites(), [&](std::size_t lo, std::size_t hi) {
    Eigen::MatrixXcd P(k, k);
    for (std::size_t site = lo; site < hi; ++site) {
      for (std::size_t plane = 0; plane < field.planes.size(); ++plane) {
        const auto [i, j] = field.planes[plane];
        const double scale = 1.0 / (torus.spacing(i) * torus.spacing(j));
        double* out = field.f.data() + (site * field.planes.size() + plane) * k;
        if (k == 1) {
          const std::complex<double> holonomy =
              links.at(site, i)[0] * links.at(links.forward(site, i), j)[0] *
              std::conj(links.at(links.forward(site, j), i)[0]) *
              std::conj(links.at(site, j)[0]);
          out[0] = std::arg(holonomy) * scale;
          continue;
        }
        P.noalias() = links.matrix(site, i) *
                      links.matrix(links.forward(site, i), j) *
                      links.matrix(links.forward(site, j), i).adjoint() *
                      links.matrix(site, j).adjoint();
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(P, false);
        std::vector<double> args(k);
        for (int c = 0; c < k; ++c) args[c] = std::arg(eig.eigenvalues()[c]);
        std::sort(args.begin(), args.end());
        for (int c = 0; c < k; ++c) out[c] = args[c] * scale;
      }
    }
  });

  double r = 0.0;
  for (double f : field.f) r = std::max(r, std::fabs(f));
  return {std::move(field), r};
}

TorusMetrics torus_metrics(const TorusSpec& torus) {
  torus.validate();
  TorusMetrics m;
  double sq = 0.0;
  m.volume = 1.0;
  for (double L : torus.lengths) {
    sq += L * L;
    m.volume *= L;
  }
  m.diameter = 0.5 * std::sqrt(sq);
  return m;
}

namespace {

bool mode_less(const FlatMode& a, const FlatMode& b) {
  if (a.lambda != b.lambda) return a.lambda < b.lambda;
  if (a.fiber != b.fiber) return a.fiber < b.fiber;
  return a.m < b.m;
}

// Enumerates all (fiber, m) combinations with m_j running over `windows`.
std::vector<FlatMode> enumerate_modes(
    const TorusSpec& torus, const BundleSpec& bundle,
    const std::vector<std::vector<int>>& windows, bool discrete) {
  const int n = torus.dim();
  std::vector<FlatMode> modes;
  for (int c = 0; c < bundle.rank; ++c) {
    std::vector<std::size_t> idx(n, 0);
    while (true) {
      FlatMode mode;
      mode.fiber = c;
      mode.m.resize(n);
      double lambda = 0.0;
      for (int j = 0; j < n; ++j) {
        mode.m[j] = windows[j][idx[j]];
        const double wave = bundle.theta[c][j] + 2.0 * M_PI * mode.m[j];
        if (discrete) {
          const double h = torus.spacing(j);
          lambda += (2.0 - 2.0 * std::cos(wave * h / torus.lengths[j])) / (h * h);
        } else {
          lambda += (wave / torus.lengths[j]) * (wave / torus.lengths[j]);
        }
      }
      mode.lambda = lambda;
      modes.push_back(std::move(mode));
      int j = n - 1;
      while (j >= 0 && ++idx[j] == windows[j].size()) idx[j--] = 0;
      if (j < 0) break;
    }
  }
  return modes;
}

}  // namespace

std::vector<FlatMode> flat_spectrum(const TorusSpec& torus,
                                    const BundleSpec& bundle, int count,
                                    bool discrete) {
  bundle.validate(torus);
  if (bundle.kind != BundleSpec::Kind::flat) {
    throw std::invalid_argument("analytic spectra exist only for flat bundles");
  }
  if (count < 1) throw std::invalid_argument("count must be positive");
  const int n = torus.dim();

  if (discrete) {
    // One residue per distinct discrete momentum: m_j in
    // [-floor((N_j-1)/2), floor(N_j/2)], exactly N_j values.
    std::vector<std::vector<int>> windows(n);
    for (int j = 0; j < n; ++j) {
      const int N = torus.grid[j];
      for (int m = -(N - 1) / 2; m <= N / 2; ++m) windows[j].push_back(m);
    }
    std::vector<FlatMode> modes = enumerate_modes(torus, bundle, windows, true);
    std::sort(modes.begin(), modes.end(), mode_less);
    if (static_cast<std::size_t>(count) < modes.size()) {
      modes.resize(count);
    }
    return modes;
  }

  // Continuum: expand the search box until the count-th eigenvalue is
  // certainly below anything outside the box.
  double max_len = *std::max_element(torus.lengths.begin(), torus.lengths.end());
  for (int radius = 2;; radius *= 2) {
    std::vector<std::vector<int>> windows(n);
    for (int j = 0; j < n; ++j) {
      for (int m = -radius; m <= radius; ++m) windows[j].push_back(m);
    }
    std::vector<FlatMode> modes = enumerate_modes(torus, bundle, windows, false);
    std::sort(modes.begin(), modes.end(), mode_less);
    const double outside = std::pow((2.0 * M_PI * (radius + 1) - M_PI) / max_len, 2);
    if (modes.size() >= static_cast<std::size_t>(count) &&
        modes[count - 1].lambda <= outside) {
      modes.resize(count);
      return modes;
    }
  }
}

SectionGrid flat_eigensection(const TorusSpec& torus, const BundleSpec& bundle,
                              const FlatMode& mode) {
  bundle.validate(torus);
  if (bundle.kind != BundleSpec::Kind::flat) {
    throw std::invalid_argument("analytic eigensections exist only for flat bundles");
  }
  const int n = torus.dim();
  const int k = bundle.rank;
  if (mode.fiber < 0 || mode.fiber >= k || static_cast<int>(mode.m.size()) != n) {
    throw std::invalid_argument("mode does not match the bundle");
  }
  // In the uniform-link gauge the holonomy angle lives on the links, so the
  // eigensections are the plain periodic Fourier modes; the angle reappears
  // in the dispersion relation through U_j S(x+e_j) = e^{i(theta_j+2pi m_j)/N_j} S(x).
  std::vector<double> per_step(n);
  for (int j = 0; j < n; ++j) {
    per_step[j] = 2.0 * M_PI * mode.m[j] / torus.grid[j];
  }
  SectionGrid s;
  s.rank = k;
  s.v = Eigen::VectorXcd::Zero(torus.sites() * k);
  const GridIndexer indexer(torus);
  parallel_for(0, torus.sites(), [&](std::size_t lo, std::size_t hi) {
    std::vector<int> c(n);
    for (std::size_t site = lo; site < hi; ++site) {
      indexer.coordinates(site, c.data());
      double phase = 0.0;
      for (int j = 0; j < n; ++j) phase += per_step[j] * c[j];
      s.v[site * k + mode.fiber] = std::polar(1.0, phase);
    }
  });
  return s;
}

}  // namespace bundle_spectra
