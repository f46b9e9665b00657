#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fslink/core.hpp"
#include "fslink/estimators.hpp"
#include "fslink/model.hpp"
#include "fslink/parallel.hpp"
#include "fslink/random.hpp"
#include "fslink/simgen.hpp"
#include "fslink/weights.hpp"

namespace fslink {

// Posterior summary of the overlap (number of links): mean plus the 95%
// equal-tailed credible interval. Quantiles use the nearest-rank rule, so
// both endpoints are counts that actually occur among the draws.
struct OverlapSummary {
  double mean = 0.0;
  std::int32_t ci_low = 0;
  std::int32_t ci_high = 0;
};

inline OverlapSummary overlap_summary(std::vector<std::int32_t> counts) {
  if (counts.empty())
    throw std::invalid_argument("overlap_summary: no draws");
  std::sort(counts.begin(), counts.end());
  const auto n = static_cast<double>(counts.size());
  const auto rank = [&](double q) {
    const auto r = static_cast<std::size_t>(std::ceil(q * n));
    return counts[std::max<std::size_t>(r, 1) - 1];
  };
  double total = 0.0;
  for (const std::int32_t c : counts) total += c;
  return {total / n, rank(0.025), rank(0.975)};
}

inline OverlapSummary overlap_summary(const PosteriorSamples& samples) {
  return overlap_summary(samples.match_counts());
}

struct EstimatorMetrics {
  std::string name;
  EstimateReport report;
  std::int32_t estimated_overlap = 0;
  std::int64_t population = 0;
  // Only meaningful when ground truth was supplied.
  bool has_truth = false;
  double f_vs_truth = 0.0;
};

inline EstimatorMetrics make_metrics(std::string name, EstimateReport report,
                                     const LinkageStructure* truth,
                                     const FScoreConfig& cfg) {
  const std::int32_t links = overlap_size(report.estimate);
  const std::int64_t pop = population_size(report.estimate);
  const bool has_truth = truth != nullptr;
  const double f = has_truth ? f_score(report.estimate, *truth, cfg) : 0.0;
  return {std::move(name), std::move(report), links, pop, has_truth, f};
}

struct RunReport {
  ProblemDims dims{0, 0};
  bool has_posterior = false;
  OverlapSummary overlap;
  std::vector<EstimatorMetrics> estimators;
};

// One replicate of the simulation study. The credible interval covers the
// posterior of the overlap; `covered` records whether the true overlap fell
// inside it.
struct ReplicateResult {
  std::int32_t true_overlap = 0;
  OverlapSummary overlap;
  bool covered = false;
  double f_bayes = 0.0, f_brl = 0.0;
  std::int32_t overlap_bayes = 0, overlap_brl = 0;
};

struct StudyConfig {
  SimulationConfig sim;
  SamplerConfig sampler;  // per-replicate seeds are derived from sim.seed
  FScoreConfig fscore;
  BrlLossParams loss;
  int threads = 1;
};

struct StudySummary {
  std::vector<ReplicateResult> rows;
  double avg_true_overlap = 0.0;
  double avg_f_bayes = 0.0, avg_f_brl = 0.0;
  double avg_overlap_bayes = 0.0, avg_overlap_brl = 0.0;
  double avg_ci_low = 0.0, avg_ci_high = 0.0, avg_post_mean = 0.0;
  double ci_coverage = 0.0;
};

// Runs the full per-replicate pipeline (generate, sample, estimate with both
// estimators, score against the generating truth) and aggregates in
// replicate order. Replicates may run concurrently; results are identical
// for any thread count because every replicate's stream is keyed by
// (sim.seed, r) and the reduction happens on the ordered result vector.
inline StudySummary run_study(const StudyConfig& cfg) {
  validate_config(cfg.sim);
  validate_config(cfg.sampler);
  const std::int32_t N = cfg.sim.replicates;
  StudySummary out;
  out.rows.resize(N);

  parallel_for(
      static_cast<std::size_t>(N),
      cfg.threads < 1 ? 1u : static_cast<unsigned>(cfg.threads),
      [&](std::size_t idx) {
        const auto r = static_cast<std::int32_t>(idx);
        const Replicate rep = generate_replicate(cfg.sim, r);
        SamplerConfig scfg = cfg.sampler;
        scfg.seed = derive_seed(cfg.sim.seed, static_cast<std::uint64_t>(r), 1);
        const PosteriorSamples samples = gibbs_sample(rep.data, scfg);

        ReplicateResult& row = out.rows[idx];
        row.true_overlap = rep.truth.num_links();
        row.overlap = overlap_summary(samples);
        row.covered = row.overlap.ci_low <= row.true_overlap &&
                      row.true_overlap <= row.overlap.ci_high;

        const EstimateReport bayes = fscore_bayes(samples, cfg.fscore, 1);
        row.f_bayes = f_score(bayes.estimate, rep.truth, cfg.fscore);
        row.overlap_bayes = overlap_size(bayes.estimate);

        const EstimateReport brl = brl_estimate(samples, cfg.loss);
        row.f_brl = f_score(brl.estimate, rep.truth, cfg.fscore);
        row.overlap_brl = overlap_size(brl.estimate);
      });

  for (const ReplicateResult& row : out.rows) {
    out.avg_true_overlap += row.true_overlap;
    out.avg_f_bayes += row.f_bayes;
    out.avg_f_brl += row.f_brl;
    out.avg_overlap_bayes += row.overlap_bayes;
    out.avg_overlap_brl += row.overlap_brl;
    out.avg_ci_low += row.overlap.ci_low;
    out.avg_ci_high += row.overlap.ci_high;
    out.avg_post_mean += row.overlap.mean;
    out.ci_coverage += row.covered ? 1.0 : 0.0;
  }
  const double n = N;
  out.avg_true_overlap /= n;
  out.avg_f_bayes /= n;
  out.avg_f_brl /= n;
  out.avg_overlap_bayes /= n;
  out.avg_overlap_brl /= n;
  out.avg_ci_low /= n;
  out.avg_ci_high /= n;
  out.avg_post_mean /= n;
  out.ci_coverage /= n;
  return out;
}

}  // namespace fslink
