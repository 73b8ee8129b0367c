#include "bundle_spectra/holonomy.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace bundle_spectra {

namespace {

int step_direction(int step, int dim) {
  const int j = std::abs(step) - 1;
  if (step == 0 || j >= dim) {
    throw std::invalid_argument("loop step must be a signed 1-based direction");
  }
  return j;
}

constexpr int kRadiusCap = 256;
constexpr int kMixtureSamples = 1000;

}  // namespace

double loop_length(const LoopSpec& loop, const TorusSpec& torus) {
  if (loop.steps.empty()) throw std::invalid_argument("loop has no steps");
  double length = 0.0;
  for (int step : loop.steps) length += torus.spacing(step_direction(step, torus.dim()));
  return length;
}

Eigen::MatrixXcd loop_holonomy(const LinkField& links, const LoopSpec& loop) {
  if (loop.steps.empty()) throw std::invalid_argument("loop has no steps");
  if (loop.base >= links.sites()) throw std::invalid_argument("loop base site out of range");

  const int k = links.rank();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Identity(k, k);
  std::size_t site = loop.base;
  // Ordered product of the links along the path (adjoint when a link is
  // traversed against its orientation); gauge changes conjugate the result
  // by the frame at the base point only.
  for (int step : loop.steps) {
    const int j = step_direction(step, links.dim());
    if (step > 0) {
      h = (h * links.matrix(site, j)).eval();
      site = links.forward(site, j);
    } else {
      site = links.backward(site, j);
      h = (h * links.matrix(site, j).adjoint()).eval();
    }
  }
  if (site != loop.base) throw std::invalid_argument("loop does not close");
  return h;
}

BetaResult beta_flat(const TorusSpec& torus, const BundleSpec& bundle,
                     int search_radius) {
  torus.validate();
  bundle.validate(torus);
  if (bundle.kind != BundleSpec::Kind::flat) {
    throw std::invalid_argument("beta is implemented for flat bundles only");
  }
  if (search_radius < 1) throw std::invalid_argument("search radius must be >= 1");

  const int n = torus.dim();
  const int k = bundle.rank;
  double min_length = torus.lengths[0];
  for (double length : torus.lengths) min_length = std::min(min_length, length);

  // A component with trivial holonomy admits a parallel unit section: beta = 0.
  for (int c = 0; c < k; ++c) {
    bool all_zero = true;
    for (double angle : bundle.theta[c]) all_zero = all_zero && angle == 0.0;
    if (all_zero) {
      BetaResult result;
      result.witness_m.assign(n, 0);
      result.search_radius = search_radius;
      result.tail_bound = 2.0 / ((search_radius + 1.0) * min_length);
      return result;
    }
  }

  for (int radius = search_radius;; radius *= 2) {
    if (radius > kRadiusCap) {
      throw std::runtime_error(
          "beta search radius cap reached without certifying the supremum");
    }
    const double tail = 2.0 / ((radius + 1.0) * min_length);

    // Pass 1: per-component suprema over the box, and the floor
    // sup_m min_c g_c(m) that lets pass 2 discard m's no mixture can use.
    std::vector<double> comp_sup(k, 0.0);
    std::vector<std::vector<int>> comp_witness(k, std::vector<int>(n, 0));
    double floor_sq = 0.0;

    std::vector<int> m(n, -radius);
    std::vector<double> g(k);
    const auto advance = [&]() {
      for (int j = 0; j < n; ++j) {
        if (++m[j] <= radius) return true;
        m[j] = -radius;
      }
      return false;
    };
    const auto evaluate = [&](const std::vector<int>& mm) {
      double len_sq = 0.0;
      for (int j = 0; j < n; ++j) {
        len_sq += mm[j] * torus.lengths[j] * mm[j] * torus.lengths[j];
      }
      for (int c = 0; c < k; ++c) {
        double phase = 0.0;
        for (int j = 0; j < n; ++j) phase += bundle.theta[c][j] * mm[j];
        const double s = std::sin(phase / 2.0);
        g[c] = 4.0 * s * s / len_sq;
      }
    };

    do {
      bool origin = true;
      for (int j = 0; j < n; ++j) origin = origin && m[j] == 0;
      if (origin) continue;
      evaluate(m);
      double g_min = g[0];
      for (int c = 0; c < k; ++c) {
        g_min = std::min(g_min, g[c]);
        if (g[c] > comp_sup[c]) {
          comp_sup[c] = g[c];
          comp_witness[c] = m;
        }
      }
      floor_sq = std::max(floor_sq, g_min);
    } while (advance());

    int best_component = 0;
    for (int c = 1; c < k; ++c) {
      if (comp_sup[c] < comp_sup[best_component]) best_component = c;
    }
    const double component_beta = std::sqrt(comp_sup[best_component]);

    double mixture_beta = component_beta;
    std::vector<int> mixture_witness = comp_witness[best_component];
    if (k >= 2) {
      // Pass 2: candidate classes for mixtures. Any m with max_c g_c below
      // the floor is dominated for every convex weight vector.
      std::vector<std::vector<int>> candidates;
      std::vector<std::vector<double>> candidate_g;
      std::fill(m.begin(), m.end(), -radius);
      do {
        bool origin = true;
        for (int j = 0; j < n; ++j) origin = origin && m[j] == 0;
        if (origin) continue;
        evaluate(m);
        double g_max = 0.0;
        for (int c = 0; c < k; ++c) g_max = std::max(g_max, g[c]);
        if (g_max >= floor_sq) {
          candidates.push_back(m);
          candidate_g.push_back(g);
        }
      } while (advance());

      std::mt19937_64 rng(0x243F6A8885A308D3ULL);
      auto uniform = [&rng]() {
        return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
      };
      std::vector<double> w(k);
      for (int sample = 0; sample < kMixtureSamples; ++sample) {
        double total = 0.0;
        for (int c = 0; c < k; ++c) {
          // |complex Gaussian|^2 weights: uniform over the unit-sphere measure.
          w[c] = -std::log(uniform());
          total += w[c];
        }
        double sup = 0.0;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
          double value = 0.0;
          for (int c = 0; c < k; ++c) value += w[c] * candidate_g[i][c];
          if (value > sup) {
            sup = value;
            arg = i;
          }
        }
        sup = std::sqrt(sup / total);
        if (sup < mixture_beta && !candidates.empty()) {
          mixture_beta = sup;
          mixture_witness = candidates[arg];
        }
      }
    }

    BetaResult result;
    result.component_beta = component_beta;
    result.mixture_beta = mixture_beta;
    if (mixture_beta < component_beta) {
      result.beta = mixture_beta;
      result.witness_m = mixture_witness;
    } else {
      result.beta = component_beta;
      result.witness_m = comp_witness[best_component];
    }
    result.search_radius = radius;
    result.tail_bound = tail;
    if (tail < result.beta) return result;
  }
}

}  // namespace bundle_spectra
