#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace bundle_spectra {

// Rectangular flat torus: side lengths L_j and grid sizes N_j per direction,
// with spacing h_j = L_j / N_j. Site x = (i_0 h_0, ..., i_{n-1} h_{n-1}).
struct TorusSpec {
  std::vector<double> lengths;
  std::vector<int> grid;

  int dim() const { return static_cast<int>(lengths.size()); }
  std::size_t sites() const;
  double spacing(int j) const { return lengths[j] / grid[j]; }
  double max_spacing() const;
  void validate() const;  // n >= 3, matching sizes, L_j > 0, N_j >= 4
};

// Row-major site indexing (direction 0 slowest).
struct GridIndexer {
  std::vector<int> grid;
  std::vector<std::size_t> strides;

  explicit GridIndexer(const TorusSpec& torus);
  std::size_t flatten(const int* coords) const;
  void coordinates(std::size_t site, int* coords) const;
};

// Connection data. Flat bundles carry one n-tuple of holonomy angles in
// (-pi, pi] per fiber component (a diagonal flat connection); magnetic
// bundles are complex line bundles with an antisymmetric integer matrix of
// flux quanta, giving constant curvature F_ij = 2*pi*flux_ij/(L_i L_j).
struct BundleSpec {
  enum class Kind { flat, magnetic };

  Kind kind = Kind::flat;
  int rank = 1;
  std::vector<std::vector<double>> theta;  // flat: rank x n angles
  std::vector<std::vector<int>> flux;      // magnetic: n x n antisymmetric

  static BundleSpec make_flat(std::vector<std::vector<double>> angles);
  static BundleSpec make_magnetic(std::vector<std::vector<int>> flux);
  void validate(const TorusSpec& torus) const;
};

// One k x k unitary per site and forward direction: U_j(x) transports fiber
// data from x to x + e_j. Matrices are stored column-major and contiguous;
// neighbor tables are precomputed so operator kernels avoid index
// arithmetic on the hot path.
class LinkField {
 public:
  LinkField(const TorusSpec& torus, int rank);

  int rank() const { return rank_; }
  int dim() const { return dim_; }
  std::size_t sites() const { return sites_; }

  std::complex<double>* at(std::size_t site, int j) {
    return u_.data() + ((site * dim_ + j) * rank_) * rank_;
  }
  const std::complex<double>* at(std::size_t site, int j) const {
    return u_.data() + ((site * dim_ + j) * rank_) * rank_;
  }
  Eigen::Map<const Eigen::MatrixXcd> matrix(std::size_t site, int j) const {
    return {at(site, j), rank_, rank_};
  }

  std::size_t forward(std::size_t site, int j) const {
    return neighbors_[2 * (site * dim_ + j)];
  }
  std::size_t backward(std::size_t site, int j) const {
    return neighbors_[2 * (site * dim_ + j) + 1];
  }

  // Integer coordinates of a flattened site index (row-major, direction 0
  // slowest).
  void coordinates(std::size_t site, int* coords) const {
    indexer_.coordinates(site, coords);
  }

  // Largest deviation of any link from unitarity, |U U^* - I|_max.
  double unitarity_defect() const;

 private:
  int rank_;
  int dim_;
  std::size_t sites_;
  GridIndexer indexer_;
  std::vector<std::complex<double>> u_;
  std::vector<std::size_t> neighbors_;
};

// Fiber-valued grid function: one complex k-vector per site, flattened as
// v[site*rank + c]. Norms over sections use the uniform site weight
// 1/(number of sites).
struct SectionGrid {
  int rank = 1;
  Eigen::VectorXcd v;

  std::size_t sites() const {
    return static_cast<std::size_t>(v.size()) / rank;
  }
};

// Per-site, per-plane eigenphases of the plaquette holonomy divided by
// h_i h_j; the discrete curvature. Planes (i, j), i < j, are indexed
// lexicographically.
struct CurvatureField {
  int dim = 0;
  int rank = 1;
  std::vector<std::pair<int, int>> planes;
  std::vector<double> f;  // [site][plane][fiber]

  double value(std::size_t site, int plane, int fiber) const {
    return f[(site * planes.size() + plane) * rank + fiber];
  }
};

struct TorusMetrics {
  double diameter = 0.0;
  double volume = 0.0;
};

// One analytic eigenmode of a flat bundle: eigenvalue, fiber component, and
// winding vector m.
struct FlatMode {
  double lambda = 0.0;
  int fiber = 0;
  std::vector<int> m;
};

// Builds the link field. Flat: U_j(x) = diag_c exp(i*theta_{c,j}*h_j/L_j),
// independent of the site. Magnetic: per flux plane (i, j) the direction-i
// links carry phase -F_ij*x_j*h_i and the direction-j links closing the
// torus (x_j = L_j - h_j) carry the compensating phase +F_ij*L_j*x_i, so
// every (i, j)-plaquette holds the uniform phase F_ij*h_i*h_j.
LinkField build_links(const TorusSpec& torus, const BundleSpec& bundle);

// Discrete curvature of a link field and its sup bound r = max |F|.
std::pair<CurvatureField, double> plaquette_curvature(const LinkField& links,
                                                      const TorusSpec& torus);

// diameter = (1/2)*sqrt(sum L_j^2), volume = prod L_j.
TorusMetrics torus_metrics(const TorusSpec& torus);

// The `count` smallest eigenvalues of the connection Laplacian on a flat
// bundle, in nondecreasing order (ties broken by fiber then winding).
// Continuum: lambda = sum_j ((theta_{c,j} + 2*pi*m_j)/L_j)^2 over all m.
// Discrete: lambda = sum_j (2 - 2*cos((theta_{c,j} + 2*pi*m_j)*h_j/L_j))/h_j^2
// over the N_j distinct residues per direction - the exact spectrum of the
// discrete operator.
std::vector<FlatMode> flat_spectrum(const TorusSpec& torus,
                                    const BundleSpec& bundle, int count,
                                    bool discrete);

// The plane-wave eigensection of a flat mode, volume-normalized to
// |S|_2 = 1 (in fact |S(x)| = 1 at every site).
SectionGrid flat_eigensection(const TorusSpec& torus, const BundleSpec& bundle,
                              const FlatMode& mode);

}  // namespace bundle_spectra
