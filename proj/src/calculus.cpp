#include "bundle_spectra/calculus.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bundle_spectra/parallel.hpp"

namespace bundle_spectra {

namespace {

template <typename T>
T pairwise_sum_range(const T* values, std::size_t count) {
  if (count == 0) return T{};
  if (count <= 8) {
    T acc = values[0];
    for (std::size_t i = 1; i < count; ++i) acc += values[i];
    return acc;
  }
  const std::size_t half = count / 2;
  return pairwise_sum_range(values, half) +
         pairwise_sum_range(values + half, count - half);
}

void require_shapes(const LinkField& links, const SectionGrid& s,
                    const TorusSpec& torus) {
  if (s.rank != links.rank()) {
    throw std::invalid_argument("section rank does not match link field rank");
  }
  if (links.sites() != static_cast<std::size_t>(torus.sites())) {
    throw std::invalid_argument("link field does not match torus site count");
  }
  if (s.v.size() !=
      static_cast<Eigen::Index>(links.sites() * static_cast<std::size_t>(s.rank))) {
    throw std::invalid_argument("section size does not match torus and rank");
  }
}

}  // namespace

double pairwise_sum(const std::vector<double>& values) {
  return pairwise_sum_range(values.data(), values.size());
}

std::complex<double> pairwise_sum(const std::vector<std::complex<double>>& values) {
  return pairwise_sum_range(values.data(), values.size());
}

GradientGrid covariant_gradient(const LinkField& links, const SectionGrid& s,
                                const TorusSpec& torus) {
  require_shapes(links, s, torus);
  const int k = s.rank;
  const int n = links.dim();
  const std::size_t sites = links.sites();

  GradientGrid grad;
  grad.rank = k;
  grad.dim = n;
  grad.g.resize(static_cast<Eigen::Index>(sites) * n * k);

  const std::complex<double>* in = s.v.data();
  std::complex<double>* out = grad.g.data();
  parallel_for(0, sites, [&](std::size_t begin, std::size_t end) {
    for (std::size_t x = begin; x < end; ++x) {
      const std::complex<double>* sx = in + x * k;
      for (int j = 0; j < n; ++j) {
        const double inv_h = 1.0 / torus.spacing(j);
        const std::complex<double>* u = links.at(x, j);
        const std::complex<double>* fwd = in + links.forward(x, j) * k;
        std::complex<double>* gx = out + (x * n + j) * k;
        for (int c = 0; c < k; ++c) {
          std::complex<double> moved = 0.0;
          for (int d = 0; d < k; ++d) moved += u[c + d * k] * fwd[d];
          gx[c] = (moved - sx[c]) * inv_h;
        }
      }
    }
  });
  return grad;
}

void apply_laplacian_into(const LinkField& links, const TorusSpec& torus,
                          const std::complex<double>* in,
                          std::complex<double>* out) {
  const int k = links.rank();
  const int n = links.dim();
  const std::size_t sites = links.sites();

  std::vector<double> inv_h2(n);
  for (int j = 0; j < n; ++j) inv_h2[j] = 1.0 / (torus.spacing(j) * torus.spacing(j));

  parallel_for(0, sites, [&](std::size_t begin, std::size_t end) {
    for (std::size_t x = begin; x < end; ++x) {
      const std::complex<double>* sx = in + x * k;
      std::complex<double>* ox = out + x * k;
      for (int c = 0; c < k; ++c) ox[c] = 0.0;
      for (int j = 0; j < n; ++j) {
        const std::size_t xb = links.backward(x, j);
        const std::complex<double>* u_fwd = links.at(x, j);
        const std::complex<double>* u_bwd = links.at(xb, j);
        const std::complex<double>* fwd = in + links.forward(x, j) * k;
        const std::complex<double>* bwd = in + xb * k;
        for (int c = 0; c < k; ++c) {
          std::complex<double> moved = 2.0 * sx[c];
          for (int d = 0; d < k; ++d) {
            moved -= u_fwd[c + d * k] * fwd[d];
            moved -= std::conj(u_bwd[d + c * k]) * bwd[d];
          }
          ox[c] += moved * inv_h2[j];
        }
      }
    }
  });
}

SectionGrid apply_laplacian(const LinkField& links, const SectionGrid& s,
                            const TorusSpec& torus) {
  require_shapes(links, s, torus);
  SectionGrid result;
  result.rank = s.rank;
  result.v.resize(s.v.size());
  apply_laplacian_into(links, torus, s.v.data(), result.v.data());
  return result;
}

std::vector<double> magnitudes(const SectionGrid& s) {
  const std::size_t sites = s.sites();
  const int k = s.rank;
  std::vector<double> out(sites);
  parallel_for(0, sites, [&](std::size_t begin, std::size_t end) {
    for (std::size_t x = begin; x < end; ++x) {
      double acc = 0.0;
      for (int c = 0; c < k; ++c) acc += std::norm(s.v[x * k + c]);
      out[x] = std::sqrt(acc);
    }
  });
  return out;
}

std::vector<double> magnitudes(const GradientGrid& g) {
  const std::size_t sites = g.sites();
  const int per_site = g.rank * g.dim;
  std::vector<double> out(sites);
  parallel_for(0, sites, [&](std::size_t begin, std::size_t end) {
    for (std::size_t x = begin; x < end; ++x) {
      double acc = 0.0;
      for (int c = 0; c < per_site; ++c) acc += std::norm(g.g[x * per_site + c]);
      out[x] = std::sqrt(acc);
    }
  });
  return out;
}

double lp_norm(const std::vector<double>& values, double p) {
  if (std::isnan(p) || p < 1.0) {
    throw std::invalid_argument("lp_norm requires p >= 1");
  }
  if (values.empty()) throw std::invalid_argument("lp_norm of an empty field");

  double max_value = 0.0;
  for (double v : values) max_value = std::max(max_value, v);
  if (std::isinf(p) || max_value == 0.0) return max_value;

  // Factoring out the max keeps every power in [0, 1], so arbitrarily large p
  // degrades gracefully toward the sup norm instead of overflowing.
  std::vector<double> powers(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    powers[i] = std::pow(values[i] / max_value, p);
  }
  const double mean = pairwise_sum(powers) / static_cast<double>(values.size());
  return max_value * std::pow(mean, 1.0 / p);
}

double lp_norm(const SectionGrid& s, double p) { return lp_norm(magnitudes(s), p); }

double lp_norm(const GradientGrid& g, double p) { return lp_norm(magnitudes(g), p); }

std::complex<double> l2_inner(const SectionGrid& a, const SectionGrid& b) {
  if (a.rank != b.rank || a.v.size() != b.v.size()) {
    throw std::invalid_argument("l2_inner requires sections of equal shape");
  }
  const std::size_t sites = a.sites();
  const int k = a.rank;
  std::vector<std::complex<double>> terms(sites);
  parallel_for(0, sites, [&](std::size_t begin, std::size_t end) {
    for (std::size_t x = begin; x < end; ++x) {
      std::complex<double> acc = 0.0;
      for (int c = 0; c < k; ++c) acc += std::conj(a.v[x * k + c]) * b.v[x * k + c];
      terms[x] = acc;
    }
  });
  return pairwise_sum(terms) / static_cast<double>(sites);
}

std::complex<double> l2_inner(const GradientGrid& a, const GradientGrid& b) {
  if (a.rank != b.rank || a.dim != b.dim || a.g.size() != b.g.size()) {
    throw std::invalid_argument("l2_inner requires gradients of equal shape");
  }
  const std::size_t sites = a.sites();
  const int per_site = a.rank * a.dim;
  std::vector<std::complex<double>> terms(sites);
  parallel_for(0, sites, [&](std::size_t begin, std::size_t end) {
    for (std::size_t x = begin; x < end; ++x) {
      std::complex<double> acc = 0.0;
      for (int c = 0; c < per_site; ++c) {
        acc += std::conj(a.g[x * per_site + c]) * b.g[x * per_site + c];
      }
      terms[x] = acc;
    }
  });
  return pairwise_sum(terms) / static_cast<double>(sites);
}

GramField pointwise_gram(const std::vector<SectionGrid>& sections) {
  if (sections.empty()) throw std::invalid_argument("pointwise_gram of no sections");
  const int m = static_cast<int>(sections.size());
  const int k = sections.front().rank;
  const std::size_t sites = sections.front().sites();
  for (const SectionGrid& s : sections) {
    if (s.rank != k || s.sites() != sites) {
      throw std::invalid_argument("pointwise_gram requires sections of equal shape");
    }
  }

  GramField gram;
  gram.count = m;
  gram.g.resize(static_cast<Eigen::Index>(sites) * m * m);
  parallel_for(0, sites, [&](std::size_t begin, std::size_t end) {
    for (std::size_t x = begin; x < end; ++x) {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          std::complex<double> acc = 0.0;
          for (int c = 0; c < k; ++c) {
            acc += std::conj(sections[i].v[x * k + c]) * sections[j].v[x * k + c];
          }
          gram.g[(x * m + i) * m + j] = acc;
        }
      }
    }
  });
  return gram;
}

}  // namespace bundle_spectra
