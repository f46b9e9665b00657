#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fslink/core.hpp"
#include "fslink/lsap.hpp"
#include "fslink/parallel.hpp"
#include "fslink/weights.hpp"

namespace fslink {

// Additive-loss parameters: cost of a missed link, of a false link against a
// truly unlinked record, and of linking to the wrong record.
class BrlLossParams {
 public:
  BrlLossParams() = default;
  BrlLossParams(double lambda10, double lambda01, double lambda11)
      : l10_(lambda10), l01_(lambda01), l11_(lambda11) {
    for (double l : {l10_, l01_, l11_})
      if (!(l > 0.0) || !std::isfinite(l))
        throw std::invalid_argument("BrlLossParams: costs must be positive");
  }

  double lambda10() const { return l10_; }
  double lambda01() const { return l01_; }
  double lambda11() const { return l11_; }

 private:
  double l10_ = 1.0;
  double l01_ = 1.0;
  double l11_ = 2.0;
};

struct KObjective {
  std::int32_t k;
  double objective;
};

struct EstimateReport {
  LinkageStructure estimate;
  double objective_value = 0.0;
  std::vector<KObjective> per_k_trace;  // empty when the scan does not apply
};

namespace detail {

// Shared outer scan: per cardinality k, a score matrix and the structure
// maximizing it; the best k wins, ties resolved toward the smallest k. Each
// k is independent, so the sweep may run on several threads; slots are
// preallocated and the reduction is a deterministic ascending scan.
template <typename DeltaFn, typename ObjectiveFn>
EstimateReport cardinality_scan(const ProblemDims& dims, double k0_objective,
                                double m_factor, DeltaFn&& delta_for_k,
                                ObjectiveFn&& objective_of, int threads) {
  const std::int32_t kmax = std::min(dims.n_a, dims.n_b);
  std::vector<double> objective(kmax + 1, 0.0);
  std::vector<LinkageStructure> result(kmax + 1,
                                       LinkageStructure::all_unlinked(dims));
  objective[0] = k0_objective;
  parallel_for(static_cast<std::size_t>(kmax),
               threads < 1 ? 1u : static_cast<unsigned>(threads),
               [&](std::size_t idx) {
    const auto k = static_cast<std::int32_t>(idx) + 1;
    const ScoreMatrix delta = delta_for_k(k);
    // The weight construction bounds every entry, making k * m_factor a
    // valid dummy value; the max () guards the borderline rounding case.
    const double m = std::max(k * m_factor, k * delta.max_score());
    auto est = solve_k_cardinality(AugmentedScoreMatrix(delta, k, m));
    objective[k] = objective_of(k, delta, est);
    result[k] = std::move(est);
  });

  std::int32_t best = 0;
  for (std::int32_t k = 1; k <= kmax; ++k)
    if (objective[k] > objective[best]) best = k;
  std::vector<KObjective> trace;
  trace.reserve(kmax + 1);
  for (std::int32_t k = 0; k <= kmax; ++k) trace.push_back({k, objective[k]});
  return {std::move(result[best]), objective[best], std::move(trace)};
}

}  // namespace detail

// Maximizes the posterior expected F-score over all bipartite structures.
// For each cardinality k the inner problem is linear in the link indicators
// (the F denominator depends on the estimate only through k), so an exact
// assignment solve per k plus an outer scan over k is exact overall. The
// reported objective at k >= 1 is the summed selected weights, which equals
// the Monte-Carlo expected F at that cardinality; at k = 0 it is the
// fraction of draws with no links at all.
inline EstimateReport fscore_bayes(const PosteriorSamples& samples,
                                   const FScoreConfig& cfg = FScoreConfig(),
                                   int threads = 1) {
  std::int64_t empty_draws = 0;
  for (std::int32_t m : samples.match_counts())
    if (m == 0) ++empty_draws;
  const double k0 = static_cast<double>(empty_draws) / samples.num_samples();
  const double b2 = cfg.beta_sq();
  return detail::cardinality_scan(
      samples.dims(), k0, (1.0 + b2) / b2,
      [&](std::int32_t k) { return mc_delta(samples, k, cfg); },
      [](std::int32_t, const ScoreMatrix& delta, const LinkageStructure& est) {
        return total_score(delta, est);
      },
      threads);
}

// Plug-in variant on pair probabilities: same scan, objective evaluated as
// (1 + beta^2) * (selected probability mass) / (beta^2 * total_mass + k).
// With no probability mass anywhere the empty estimate scores 1 (the
// plug-in surrogate of "the true linkage is certainly empty"), else 0.
inline EstimateReport fscore_optimal_score(const PairProbabilities& probs,
                                           const FScoreConfig& cfg = FScoreConfig(),
                                           int threads = 1) {
  std::vector<ScoreEntry> raw;
  raw.reserve(probs.entries().size());
  for (const auto& e : probs.entries())
    if (e.p > 0.0) raw.push_back({e.i, e.j, e.p});
  const ScoreMatrix p_matrix(probs.dims(), std::move(raw));
  const double b2 = cfg.beta_sq();
  const double mass = probs.total_mass();
  return detail::cardinality_scan(
      probs.dims(), mass == 0.0 ? 1.0 : 0.0, (1.0 + b2) / b2,
      [&](std::int32_t k) { return plugin_delta(probs, k, cfg); },
      [&](std::int32_t k, const ScoreMatrix&, const LinkageStructure& est) {
        return (1.0 + b2) * total_score(p_matrix, est) / (b2 * mass + k);
      },
      threads);
}

namespace detail {

// Expected-loss cost of declaring record j linked to row i (i < n_a) or
// unlinked (i == n_a + j), from the marginal link frequencies.
inline std::vector<double> brl_costs(const ProblemDims& d,
                                     const PairProbabilities& marginals,
                                     const std::vector<double>& q,
                                     const BrlLossParams& loss) {
  const std::int32_t rows = d.n_a + d.n_b;
  std::vector<double> costs(static_cast<std::size_t>(rows) * d.n_b, kInf);
  for (std::int32_t j = 0; j < d.n_b; ++j) {
    const double base =
        loss.lambda01() * q[j] + loss.lambda11() * (1.0 - q[j]);
    for (std::int32_t i = 0; i < d.n_a; ++i)
      costs[static_cast<std::size_t>(i) * d.n_b + j] = base;
    costs[static_cast<std::size_t>(d.n_a + j) * d.n_b + j] =
        loss.lambda10() * (1.0 - q[j]);
  }
  for (const auto& e : marginals.entries())
    costs[static_cast<std::size_t>(e.i) * d.n_b + e.j] =
        loss.lambda01() * q[e.j] +
        loss.lambda11() * (1.0 - q[e.j] - e.p);
  return costs;
}

}  // namespace detail

// Loss-minimizing competitor: assigns every record of file B a row of the
// (n_a + n_b) x n_b expected-loss matrix, where row n_a + j is record j's
// own no-link option and other no-link rows are forbidden. The objective is
// the total posterior expected loss (lower is better).
inline EstimateReport brl_estimate(const PosteriorSamples& samples,
                                   const BrlLossParams& loss = BrlLossParams()) {
  const auto& d = samples.dims();
  const auto marginals = marginal_match_probs(samples);
  const auto q = no_link_frequencies(samples);
  const auto costs = detail::brl_costs(d, marginals, q, loss);
  const auto res =
      solve_assignment(costs, d.n_a + d.n_b, d.n_b, Objective::minimize);
  std::vector<std::int32_t> z(d.n_b);
  for (std::int32_t j = 0; j < d.n_b; ++j) {
    const std::int32_t r = res.row_of_col[j];
    if (r >= d.n_a && r != d.n_a + j)
      throw std::logic_error("brl_estimate: foreign no-link row selected");
    z[j] = r;
  }
  return {LinkageStructure(d, std::move(z)), res.total, {}};
}

struct BrlClosedFormResult {
  // Per record: a row index below n_a, or n_a + j for no link.
  std::vector<std::int32_t> decisions;
  // The per-record rule can in principle link two records to one row; when
  // that happens the vector is not a valid bipartite structure.
  bool bipartite_valid = true;
};

// Per-record threshold rule available when 0 < lambda10 <= lambda01 and
// lambda11 >= lambda10 + lambda01: link (i, j) iff the link frequency clears
// lambda01/(lambda01+lambda10) plus a penalty proportional to the mass on
// other rows.
inline BrlClosedFormResult brl_closed_form(const PosteriorSamples& samples,
                                           const BrlLossParams& loss = BrlLossParams()) {
  if (!(loss.lambda10() <= loss.lambda01()) ||
      !(loss.lambda11() >= loss.lambda10() + loss.lambda01()))
    throw std::invalid_argument(
        "brl_closed_form: needs lambda10 <= lambda01 and lambda11 >= lambda10 + lambda01");
  const auto& d = samples.dims();
  const auto marginals = marginal_match_probs(samples);
  const auto q = no_link_frequencies(samples);
  const double denom = loss.lambda01() + loss.lambda10();
  const double slope = (loss.lambda11() - loss.lambda01() - loss.lambda10()) / denom;
  const double intercept = loss.lambda01() / denom;

  BrlClosedFormResult out;
  out.decisions.resize(d.n_b);
  for (std::int32_t j = 0; j < d.n_b; ++j) out.decisions[j] = d.n_a + j;
  for (const auto& e : marginals.entries()) {
    const double threshold = intercept + slope * (1.0 - e.p - q[e.j]);
    if (e.p > threshold && out.decisions[e.j] == d.n_a + e.j)
      out.decisions[e.j] = e.i;
  }
  std::vector<char> taken(d.n_a, 0);
  for (std::int32_t j = 0; j < d.n_b; ++j) {
    const std::int32_t r = out.decisions[j];
    if (r < d.n_a) {
      if (taken[r]) out.bipartite_valid = false;
      taken[r] = 1;
    }
  }
  return out;
}

// Sufficient condition for the loss-based estimator to leave record j
// unlinked: (l10 + l01 - l11) * P(no link) >= l10 - l11 + l11 * max link
// frequency. One-sided; the converse does not hold in general.
inline bool prop1_nonmatch_predicate(std::int32_t j,
                                     const PosteriorSamples& samples,
                                     const BrlLossParams& loss = BrlLossParams()) {
  const auto& d = samples.dims();
  if (j < 0 || j >= d.n_b)
    throw std::invalid_argument("prop1_nonmatch_predicate: record out of range");
  const auto L = static_cast<double>(samples.num_samples());
  const double q = samples.no_link_count(j) / L;
  double max_p = 0.0;
  for (std::int32_t p = 0; p < samples.num_pairs(); ++p)
    if (samples.pair_j(p) == j)
      max_p = std::max(max_p, samples.pair_count(p) / L);
  return (loss.lambda10() + loss.lambda01() - loss.lambda11()) * q >=
         loss.lambda10() - loss.lambda11() + loss.lambda11() * max_p;
}

}  // namespace fslink
