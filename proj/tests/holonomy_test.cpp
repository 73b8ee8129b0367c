#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "bundle_spectra/calculus.hpp"
#include "bundle_spectra/holonomy.hpp"
#include "bundle_spectra/lattice.hpp"
#include "test_util.hpp"

using namespace bundle_spectra;

namespace {

const TorusSpec kSmallTorus{{1.0, 1.5, 0.75}, {4, 4, 4}};
const TorusSpec kUnitTorus{{1.0, 1.0, 1.0}, {16, 16, 16}};

LoopSpec plaquette_loop(std::size_t base, int i, int j) {
  return {base, {i + 1, j + 1, -(i + 1), -(j + 1)}};
}

LoopSpec winding_loop(std::size_t base, const TorusSpec& torus,
                      const std::vector<int>& winding) {
  LoopSpec loop{base, {}};
  for (int j = 0; j < torus.dim(); ++j) {
    for (int s = 0; s < torus.grid[j] * std::abs(winding[j]); ++s) {
      loop.steps.push_back(winding[j] > 0 ? j + 1 : -(j + 1));
    }
  }
  return loop;
}

}  // namespace

TEST_CASE("loop length sums the traversed spacings") {
  const LoopSpec loop{0, {1, 2, -1, -2}};
  CHECK(loop_length(loop, kSmallTorus) == doctest::Approx(2.0 * (0.25 + 0.375)));
  const LoopSpec wind{0, {3, 3, 3, 3}};
  CHECK(loop_length(wind, kSmallTorus) == doctest::Approx(4.0 * 0.1875));
  CHECK_THROWS_AS(loop_length({0, {}}, kSmallTorus), std::invalid_argument);
  CHECK_THROWS_AS(loop_length({0, {4}}, kSmallTorus), std::invalid_argument);
  CHECK_THROWS_AS(loop_length({0, {0}}, kSmallTorus), std::invalid_argument);
}

TEST_CASE("trivial bundle has identity holonomy around every loop") {
  const auto bundle = BundleSpec::make_flat({{0, 0, 0}, {0, 0, 0}});
  const LinkField links = build_links(kSmallTorus, bundle);
  for (std::size_t base : {std::size_t{0}, std::size_t{17}, std::size_t{63}}) {
    const auto p = loop_holonomy(links, plaquette_loop(base, 0, 2));
    CHECK((p - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-14);
    const auto w = loop_holonomy(links, winding_loop(base, kSmallTorus, {1, 0, 1}));
    CHECK((w - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-14);
  }
}

TEST_CASE("magnetic plaquette loops carry the uniform flux phase") {
  const auto bundle = BundleSpec::make_magnetic({{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}});
  const LinkField links = build_links(kUnitTorus, bundle);
  const double cell = kUnitTorus.spacing(0) * kUnitTorus.spacing(1);
  const double expected = 2.0 * M_PI * cell;  // F_12 = 2*pi / (L_1 L_2)
  GridIndexer indexer(kUnitTorus);
  for (const auto& coords : {std::vector<int>{0, 0, 0}, {3, 7, 2}, {15, 15, 0},
                             {0, 15, 9}, {15, 0, 4}}) {
    const std::size_t base = indexer.flatten(coords.data());
    const auto h = loop_holonomy(links, plaquette_loop(base, 0, 1));
    CHECK(std::abs(std::arg(h(0, 0)) - expected) < 1e-12);
    CHECK(std::abs(std::abs(h(0, 0)) - 1.0) < 1e-12);
    // Plaquettes in the flux-free planes stay trivial.
    const auto h13 = loop_holonomy(links, plaquette_loop(base, 0, 2));
    CHECK(std::abs(std::arg(h13(0, 0))) < 1e-12);
  }
}

TEST_CASE("flat winding loops recover the holonomy angles") {
  const auto bundle = BundleSpec::make_flat(
      {{M_PI / 4.0, -0.3, 0.1}, {1.0, 2.0, -1.5}});
  const TorusSpec torus{{1.0, 1.0, 1.0}, {8, 8, 8}};
  const LinkField links = build_links(torus, bundle);

  SUBCASE("single winding") {
    const auto h = loop_holonomy(links, winding_loop(5, torus, {1, 0, 0}));
    for (int c = 0; c < 2; ++c) {
      const std::complex<double> expected = std::polar(1.0, bundle.theta[c][0]);
      CHECK(std::abs(h(c, c) - expected) < 1e-12);
    }
    CHECK(std::abs(h(0, 1)) < 1e-14);
    CHECK(std::abs(h(1, 0)) < 1e-14);
  }

  SUBCASE("mixed winding accumulates the angle inner product") {
    const auto h = loop_holonomy(links, winding_loop(0, torus, {1, -1, 2}));
    for (int c = 0; c < 2; ++c) {
      const double angle =
          bundle.theta[c][0] - bundle.theta[c][1] + 2.0 * bundle.theta[c][2];
      CHECK(std::abs(h(c, c) - std::polar(1.0, angle)) < 1e-12);
    }
  }
}

TEST_CASE("holonomy of same-class loops agrees after a random gauge change") {
  const auto bundle = BundleSpec::make_flat({{0.7, -1.1, 0.4}, {2.2, 0.9, -2.4}});
  const LinkField links =
      test_util::gauge_transform(build_links(kSmallTorus, bundle), 2026);

  // Contractible loops in a flat bundle are trivial in every gauge.
  const auto p = loop_holonomy(links, plaquette_loop(21, 1, 2));
  CHECK((p - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-12);

  // Two homotopic winding paths from the same base agree exactly.
  LoopSpec direct = winding_loop(21, kSmallTorus, {1, 0, 0});
  LoopSpec detour{21, {2}};
  for (int s = 0; s < kSmallTorus.grid[0]; ++s) detour.steps.push_back(1);
  detour.steps.push_back(-2);
  const auto a = loop_holonomy(links, direct);
  const auto b = loop_holonomy(links, detour);
  CHECK((a - b).norm() < 1e-12);
}

TEST_CASE("loop holonomy rejects malformed loops") {
  const auto bundle = BundleSpec::make_flat({{0.1, 0.2, 0.3}});
  const LinkField links = build_links(kSmallTorus, bundle);
  CHECK_THROWS_AS(loop_holonomy(links, {0, {}}), std::invalid_argument);
  CHECK_THROWS_AS(loop_holonomy(links, {0, {1, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(loop_holonomy(links, {0, {5, -5}}), std::invalid_argument);
  CHECK_THROWS_AS(loop_holonomy(links, {0, {0}}), std::invalid_argument);
  CHECK_THROWS_AS(loop_holonomy(links, {1000, {1, -1}}), std::invalid_argument);
}

TEST_CASE("beta of a half-turn holonomy is exactly two") {
  const auto bundle = BundleSpec::make_flat({{M_PI, 0.0, 0.0}});
  const auto result = beta_flat(kUnitTorus, bundle, 2);
  CHECK(result.beta == 2.0);
  CHECK(result.component_beta == 2.0);
  CHECK(result.mixture_beta == 2.0);
  CHECK(std::abs(result.witness_m[0]) == 1);
  CHECK(result.witness_m[1] == 0);
  CHECK(result.witness_m[2] == 0);
  CHECK(result.tail_bound < result.beta);
}

TEST_CASE("beta for a quarter-turn holonomy matches the closed form") {
  const auto bundle = BundleSpec::make_flat({{M_PI / 4.0, 0.0, 0.0}});
  const auto result = beta_flat(kUnitTorus, bundle, 2);
  // Best winding is m = (1,0,0): 2 sin(pi/8) beats 2 sin(pi/4)/2 from m = (2,0,0).
  CHECK(result.beta == doctest::Approx(2.0 * std::sin(M_PI / 8.0)).epsilon(1e-12));
  CHECK(std::abs(result.witness_m[0]) == 1);
  CHECK(result.search_radius == 2);
  CHECK(result.tail_bound < result.beta);

  SUBCASE("a larger certified radius does not change the value") {
    const auto wide = beta_flat(kUnitTorus, bundle, 16);
    CHECK(wide.beta == result.beta);
    CHECK(wide.search_radius == 16);
  }

  SUBCASE("the sign of the holonomy angles is irrelevant") {
    const auto mirrored = BundleSpec::make_flat({{-M_PI / 4.0, 0.0, 0.0}});
    CHECK(beta_flat(kUnitTorus, mirrored, 2).beta == result.beta);
  }
}

TEST_CASE("beta is invariant under a coordinate relabeling") {
  const TorusSpec torus{{1.0, 1.5, 0.75}, {4, 4, 4}};
  const TorusSpec swapped{{1.5, 1.0, 0.75}, {4, 4, 4}};
  const auto bundle = BundleSpec::make_flat({{M_PI / 4.0, 1.1, 0.0}});
  const auto relabeled = BundleSpec::make_flat({{1.1, M_PI / 4.0, 0.0}});
  const auto a = beta_flat(torus, bundle, 4);
  const auto b = beta_flat(swapped, relabeled, 4);
  CHECK(a.beta == b.beta);
  CHECK(a.witness_m[0] == b.witness_m[1]);
  CHECK(a.witness_m[1] == b.witness_m[0]);
}

TEST_CASE("the search radius grows until the tail bound certifies the value") {
  const auto bundle = BundleSpec::make_flat({{0.5, 0.0, 0.0}});
  const auto result = beta_flat(kUnitTorus, bundle, 1);
  // beta ~ 2 sin(0.25) = 0.495, so radius 1 and 2 fail the tail test and 4 passes.
  CHECK(result.beta == doctest::Approx(2.0 * std::sin(0.25)).epsilon(1e-12));
  CHECK(result.search_radius == 4);
  CHECK(result.tail_bound < result.beta);

  SUBCASE("an uncertifiable request fails loudly") {
    const auto tiny = BundleSpec::make_flat({{1e-3, 0.0, 0.0}});
    CHECK_THROWS_AS(beta_flat(kUnitTorus, tiny, 300), std::runtime_error);
  }
}

TEST_CASE("a trivial holonomy component forces beta to zero") {
  const auto rank1 = BundleSpec::make_flat({{0.0, 0.0, 0.0}});
  CHECK(beta_flat(kUnitTorus, rank1, 2).beta == 0.0);

  const auto rank2 = BundleSpec::make_flat({{1.0, 0.5, 0.2}, {0.0, 0.0, 0.0}});
  const auto result = beta_flat(kUnitTorus, rank2, 2);
  CHECK(result.beta == 0.0);
  CHECK(result.component_beta == 0.0);
}

TEST_CASE("mixing fibers can beat every pure component") {
  const auto bundle =
      BundleSpec::make_flat({{M_PI, 0.0, 0.0}, {0.0, M_PI, 0.0}});
  const auto result = beta_flat(kUnitTorus, bundle, 4);
  // Pure components give 2; the balanced mixture gives sqrt(2) via m = (1,1,0).
  CHECK(result.component_beta == 2.0);
  CHECK(result.beta < result.component_beta);
  CHECK(result.beta == doctest::Approx(std::sqrt(2.0)).epsilon(0.01));
  CHECK(result.beta >= std::sqrt(2.0) - 1e-12);
  CHECK(result.tail_bound < result.beta);
}

TEST_CASE("beta rejects invalid inputs") {
  const auto flat = BundleSpec::make_flat({{0.3, 0.0, 0.0}});
  CHECK_THROWS_AS(beta_flat(kUnitTorus, flat, 0), std::invalid_argument);
  const auto magnetic = BundleSpec::make_magnetic({{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}});
  CHECK_THROWS_AS(beta_flat(kUnitTorus, magnetic, 2), std::invalid_argument);
}

TEST_CASE("beta lower-bounds the gradient sup of the ground eigensection") {
  const auto bundle = BundleSpec::make_flat({{M_PI / 4.0, 0.0, 0.0}});
  const auto modes = flat_spectrum(kUnitTorus, bundle, 1, true);
  const SectionGrid ground = flat_eigensection(kUnitTorus, bundle, modes[0]);
  const LinkField links = build_links(kUnitTorus, bundle);
  const GradientGrid grad = covariant_gradient(links, ground, kUnitTorus);
  const double grad_sup = lp_norm(grad, std::numeric_limits<double>::infinity());
  const auto result = beta_flat(kUnitTorus, bundle, 2);
  CHECK(result.beta <= grad_sup);
  CHECK(grad_sup == doctest::Approx(std::sqrt(modes[0].lambda)).epsilon(1e-12));
}
