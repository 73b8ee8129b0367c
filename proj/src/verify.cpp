#include "bundle_spectra/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bundle_spectra {

namespace {

constexpr double kLhsFloor = 1e-300;
const double kInf = std::numeric_limits<double>::infinity();

double log10_floor(double v) { return std::log10(std::max(v, kLhsFloor)); }

double spacing_allowance_log10(const TorusSpec& torus) {
  return std::log10(1.0 + 5.0 * torus.max_spacing());
}

constexpr double kLn10 = 2.302585092994045684;

}  // namespace

VerdictRow make_verdict_row(std::string check_id, double lambda, double lhs,
                            double rhs_log10, double allowance_log10,
                            std::string context) {
  VerdictRow row;
  row.check_id = std::move(check_id);
  row.lambda = lambda;
  row.lhs = lhs;
  row.rhs_log10 = rhs_log10;
  row.slack_log10 = rhs_log10 - log10_floor(lhs);
  row.pass = row.slack_log10 >= -(std::log10(1.0 + 1e-9) + allowance_log10);
  row.context = std::move(context);
  return row;
}

std::vector<VerdictRow> check_eigenpair(const Eigenpair& pair,
                                        const LinkField& links,
                                        const TorusSpec& torus,
                                        const BoundConstants& constants) {
  const SectionGrid& s = pair.section;
  const GradientGrid grad = covariant_gradient(links, s, torus);
  const std::vector<double> s_mag = magnitudes(s);
  const std::vector<double> g_mag = magnitudes(grad);
  const double s_sup = lp_norm(s_mag, kInf);
  const double s_l2 = lp_norm(s_mag, 2.0);
  const double g_sup = lp_norm(g_mag, kInf);
  const double g_l2 = lp_norm(g_mag, 2.0);
  const double allow = spacing_allowance_log10(torus);

  std::vector<VerdictRow> rows;

  // Exact discrete identity <grad* grad S, S> = |grad S|_2^2, so the energy
  // mismatch is bounded by the residual; the epsilon term absorbs the
  // roundoff of accumulating |grad S|_2^2 itself.
  const double energy_lhs = std::abs(g_l2 * g_l2 - pair.lambda * s_l2 * s_l2);
  const double energy_rhs =
      pair.residual * s_l2 + 64.0 * std::numeric_limits<double>::epsilon() *
                                 (std::abs(pair.lambda) * s_l2 * s_l2 + g_l2 * g_l2);
  rows.push_back(make_verdict_row("energy_identity", pair.lambda, energy_lhs,
                          log10_floor(energy_rhs), 0.0,
                          "|grad S|_2^2 vs lambda"));

  if (pair.lambda <= pair.residual) {
    rows.push_back(make_verdict_row("parallel_grad", pair.lambda, g_sup,
                            log10_floor(pair.residual), 0.0,
                            "lambda below residual"));
    sort_rows(rows);
    return rows;
  }

  const bool grad_dominates = g_sup >= s_sup;
  for (bool case2 : {false, true}) {
    const double ln_rhs =
        main_bound(constants, pair.lambda, case2, case2 ? false : grad_dominates) +
        std::log(s_l2);
    const bool measured = case2 == !grad_dominates;
    rows.push_back(make_verdict_row(case2 ? "main_case2" : "main_case1", pair.lambda,
                            g_sup, ln_rhs / kLn10, allow,
                            measured ? "measured" : "complement"));
  }

  const double ln_lemma =
      lemma_sup_bound(constants.source_bounds, pair.lambda) + std::log(s_l2);
  rows.push_back(make_verdict_row("lemma_sup", pair.lambda, s_sup, ln_lemma / kLn10,
                          allow, "optimal p"));

  sort_rows(rows);
  return rows;
}

std::vector<VerdictRow> check_moser_chain(const Eigenpair& pair,
                                          const LinkField& links,
                                          const TorusSpec& torus,
                                          const BoundConstants& constants,
                                          int j_max) {
  if (j_max < 1) throw std::invalid_argument("j_max must be at least 1");
  const SectionGrid& s = pair.section;
  const GradientGrid grad = covariant_gradient(links, s, torus);
  const std::vector<double> s_mag = magnitudes(s);
  const std::vector<double> g_mag = magnitudes(grad);
  const double s_sup = lp_norm(s_mag, kInf);
  const double g_sup = lp_norm(g_mag, kInf);
  const double big_n = std::max(s_sup, g_sup);
  const double n = constants.source_bounds.n;
  const double q = (n + 2.0) / n;
  const double eps = constants.epsilon;
  const double allow = spacing_allowance_log10(torus);

  std::vector<VerdictRow> rows;
  for (int j = 0; j <= j_max; ++j) {
    const double k = std::pow(q, j);
    const double lhs = lp_norm(g_mag, 2.0 * k * q);
    const double rhs =
        moser_rhs(constants, pair.lambda, k, big_n, lp_norm(g_mag, 2.0 * k));
    std::ostringstream context;
    context << "j=" << j << " k=" << k;
    rows.push_back(make_verdict_row("moser_step", pair.lambda, lhs, log10_floor(rhs),
                            allow, context.str()));
  }

  const double holder_rhs_log10 = (n / (n + 2.0)) * log10_floor(lp_norm(g_mag, 2.0)) +
                                  (2.0 / (n + 2.0)) * log10_floor(g_sup);
  rows.push_back(make_verdict_row("holder_interp", pair.lambda, lp_norm(g_mag, 2.0 * q),
                          holder_rhs_log10, 0.0, "p = 2(n+2)/n"));

  const double a_rhs_log10 =
      inequality_a_prefactor_log(constants, pair.lambda) / kLn10 +
      (1.0 - eps) * log10_floor(big_n) +
      eps * log10_floor(lp_norm(g_mag, 2.0 * q));
  rows.push_back(make_verdict_row("inequality_a", pair.lambda, g_sup, a_rhs_log10,
                          allow, "collapsed iteration"));

  sort_rows(rows);
  return rows;
}

DeviationResult check_near_orthonormal(const std::vector<Eigenpair>& pairs) {
  DeviationResult out;
  const int count = static_cast<int>(pairs.size());
  out.deviations = Eigen::MatrixXd::Zero(count, count);
  if (count == 0) return out;

  std::vector<SectionGrid> sections;
  sections.reserve(pairs.size());
  double lambda_max = 0.0;
  for (const Eigenpair& pair : pairs) {
    sections.push_back(pair.section);
    lambda_max = std::max(lambda_max, pair.lambda);
  }
  const GramField gram = pointwise_gram(sections);
  for (std::size_t site = 0; site < gram.sites(); ++site) {
    for (int i = 0; i < count; ++i) {
      for (int j = 0; j < count; ++j) {
        const double target = i == j ? 1.0 : 0.0;
        out.deviations(i, j) = std::max(
            out.deviations(i, j), std::abs(gram.value(site, i, j) - target));
      }
    }
  }

  double asym = 0.0;
  for (int i = 0; i < count; ++i) {
    for (int j = i + 1; j < count; ++j) {
      asym = std::max(asym,
                      std::abs(out.deviations(i, j) - out.deviations(j, i)));
    }
  }
  std::ostringstream context;
  context << count << " sections";
  out.rows.push_back(make_verdict_row("ortho_symmetric", lambda_max, asym, -14.0, 0.0,
                              context.str()));
  return out;
}

std::vector<VerdictRow> check_deviation_family(
    const std::vector<double>& lambda_max,
    const std::vector<double>& deviation_sup) {
  if (lambda_max.size() != deviation_sup.size()) {
    throw std::invalid_argument("family levels must pair a lambda with a deviation");
  }
  if (lambda_max.size() < 2) {
    throw std::invalid_argument("a family needs at least two levels");
  }
  std::vector<std::size_t> order(lambda_max.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lambda_max[a] > lambda_max[b];
  });

  std::vector<VerdictRow> rows;
  for (std::size_t i = 1; i < order.size(); ++i) {
    const std::size_t prev = order[i - 1];
    const std::size_t next = order[i];
    std::ostringstream context;
    context << "lambda " << lambda_max[prev] << " -> " << lambda_max[next];
    rows.push_back(make_verdict_row("family_monotone", lambda_max[next],
                            deviation_sup[next],
                            log10_floor(deviation_sup[prev]), 0.0,
                            context.str()));
  }
  return rows;
}

FrameResult gram_schmidt_frame(const std::vector<Eigenpair>& pairs,
                               const LinkField& links, const TorusSpec& torus) {
  const int k = links.rank();
  if (static_cast<int>(pairs.size()) != k) {
    throw std::invalid_argument("a frame needs exactly rank-many sections");
  }
  const std::size_t sites = links.sites();
  double lambda_max = 0.0;
  for (const Eigenpair& pair : pairs) {
    if (pair.section.rank != k ||
        static_cast<std::size_t>(pair.section.v.size()) != sites * k) {
      throw std::invalid_argument("section shape does not match the link field");
    }
    lambda_max = std::max(lambda_max, pair.lambda);
  }

  FrameResult out;
  out.frames.assign(k, SectionGrid{});
  for (SectionGrid& frame : out.frames) {
    frame.rank = k;
    frame.v.resize(static_cast<Eigen::Index>(sites * k));
  }
  out.section_deviation.assign(k, 0.0);

  for (std::size_t site = 0; site < sites; ++site) {
    for (int i = 0; i < k; ++i) {
      Eigen::Map<const Eigen::VectorXcd> original(
          pairs[i].section.v.data() + site * k, k);
      Eigen::VectorXcd v = original;
      for (int j = 0; j < i; ++j) {
        Eigen::Map<const Eigen::VectorXcd> e(out.frames[j].v.data() + site * k, k);
        v -= e.dot(v) * e;
      }
      const double norm = v.norm();
      if (!(norm > 1e-12)) {
        throw std::runtime_error(
            "pointwise Gram matrix is singular at site " + std::to_string(site) +
            " (section " + std::to_string(i) + ")");
      }
      Eigen::Map<Eigen::VectorXcd> e(out.frames[i].v.data() + site * k, k);
      e = v / norm;
      out.section_deviation[i] =
          std::max(out.section_deviation[i], (e - original).norm());
    }
  }

  out.frame_gradient_sup.reserve(k);
  for (const SectionGrid& frame : out.frames) {
    out.frame_gradient_sup.push_back(
        lp_norm(covariant_gradient(links, frame, torus), kInf));
  }

  const GramField gram = pointwise_gram(out.frames);
  double defect = 0.0;
  for (std::size_t site = 0; site < sites; ++site) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        const double target = i == j ? 1.0 : 0.0;
        defect = std::max(defect, std::abs(gram.value(site, i, j) - target));
      }
    }
  }
  out.rows.push_back(make_verdict_row("frame_orthonormal", lambda_max, defect, -12.0,
                              0.0, "pointwise Gram-Schmidt"));
  return out;
}

std::vector<VerdictRow> check_holonomy_bound(double lambda1,
                                             const BetaResult& beta,
                                             const BoundConstants& constants) {
  if (!(lambda1 >= 0.0)) {
    throw std::invalid_argument("lambda1 must be nonnegative");
  }
  std::vector<VerdictRow> rows;

  double direct_rhs_log10 = -300.0;
  if (lambda1 > 0.0) {
    const double alpha =
        alpha_exponent(constants.source_bounds.n, lambda1, false);
    direct_rhs_log10 =
        alpha * std::log10(lambda1) +
        (constants.A1 * std::sqrt(2.0 * lambda1) + constants.B1_log) / kLn10;
  }
  rows.push_back(make_verdict_row("holonomy_direct", lambda1, beta.beta,
                          direct_rhs_log10, 0.0, "proof inequality"));

  rows.push_back(make_verdict_row("holonomy_lower", lambda1,
                          holonomy_lower_bound(constants, beta.beta),
                          log10_floor(lambda1), 0.0, "fixed point"));
  sort_rows(rows);
  return rows;
}

void sort_rows(std::vector<VerdictRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const VerdictRow& a, const VerdictRow& b) {
                     if (a.check_id != b.check_id) return a.check_id < b.check_id;
                     return a.lambda < b.lambda;
                   });
}

}  // namespace bundle_spectra
