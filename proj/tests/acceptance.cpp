// Acceptance checks, one per command-line argument (1..8), each printing a
// single PASS/FAIL line. Run with no arguments to execute all of them.
// Tolerances and budgets are pinned as constants next to each check.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fslink/core.hpp"
#include "fslink/estimators.hpp"
#include "fslink/io.hpp"
#include "fslink/lsap.hpp"
#include "fslink/model.hpp"
#include "fslink/random.hpp"
#include "fslink/simgen.hpp"
#include "fslink/study.hpp"
#include "fslink/weights.hpp"
#include "oracles.hpp"

namespace {

using fslink::AugmentedScoreMatrix;
using fslink::BrlLossParams;
using fslink::ComparisonData;
using fslink::FScoreConfig;
using fslink::LinkageStructure;
using fslink::PairProbabilities;
using fslink::PosteriorSamples;
using fslink::ProblemDims;
using fslink::SamplerConfig;
using fslink::ScoreEntry;
using fslink::ScoreMatrix;
using fslink::SimulationConfig;

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt1(double x) {
  std::ostringstream s;
  s.precision(3);
  s << x;
  return s.str();
}

// 1. Exact k-cardinality optima against exhaustive enumeration on every
//    shape up to 5x5, every cardinality, 200 random matrices per shape.
constexpr double kC1BudgetSeconds = 10.0;

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  fslink::Rng rng(101);
  const double densities[3] = {0.4, 0.7, 1.0};
  long instances = 0;
  for (std::int32_t na = 1; na <= 5; ++na)
    for (std::int32_t nb = 1; nb <= 5; ++nb)
      for (int rep = 0; rep < 200; ++rep) {
        const ProblemDims d{na, nb};
        const auto scores =
            testutil::random_dyadic_scores(rng, d, densities[rep % 3]);
        for (std::int32_t k = 0; k <= std::min(na, nb); ++k) {
          const auto est = fslink::solve_k_cardinality(scores, k);
          if (est.num_links() != k)
            return fail("wrong cardinality at " + std::to_string(na) + "x" +
                        std::to_string(nb) + " k=" + std::to_string(k));
          const double got = fslink::total_score(scores, est);
          const double want = testutil::brute_force_k_best(scores, k).total;
          if (got != want)
            return fail("total " + std::to_string(got) + " vs exhaustive " +
                        std::to_string(want) + " at " + std::to_string(na) +
                        "x" + std::to_string(nb) + " k=" + std::to_string(k));
          ++instances;
        }
      }
  const double secs = seconds_since(t0);
  if (secs >= kC1BudgetSeconds)
    return fail("took " + fmt1(secs) + " s, budget " +
                fmt1(kC1BudgetSeconds) + " s");
  return {true, std::to_string(instances) + " solves exact, " + fmt1(secs) +
                    " s"};
}

// 2. The 3x3 illustration with one dummy row at 4.0 and k=2: links are
//    (A1,B3) and (A3,B2), selected real score exactly 1.5.
Outcome criterion2() {
  const ProblemDims d{3, 3};
  std::vector<ScoreEntry> entries;
  const double rows[3][3] = {
      {0.1, 0.4, 0.9}, {0.2, 0.5, 0.8}, {0.3, 0.6, 0.7}};
  for (std::int32_t i = 0; i < 3; ++i)
    for (std::int32_t j = 0; j < 3; ++j) entries.push_back({i, j, rows[i][j]});
  const ScoreMatrix base(d, entries);
  const auto est =
      fslink::solve_k_cardinality(AugmentedScoreMatrix(base, 2, 4.0));
  if (est.num_links() != 2) return fail("cardinality != 2");
  if (est.is_linked(0)) return fail("column 1 should use the dummy row");
  if (est.link_of(1) != 2 || est.link_of(2) != 0)
    return fail("links are not (A1,B3) and (A3,B2)");
  const double score = fslink::total_score(base, est);
  if (score != 1.5) return fail("real-link score " + std::to_string(score));
  return {true, "links (A1,B3),(A3,B2), score exactly 1.5"};
}

// 3. Both point estimators attain the enumeration-oracle maximum on 100
//    random 4x3 instances with 20 posterior draws. Objectives are compared
//    in exact integer or rational arithmetic, so equality means equality.
constexpr double kC3BudgetSeconds = 30.0;

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  fslink::Rng rng(303);
  const ProblemDims d{4, 3};
  const auto all = testutil::enumerate_structures(d);
  const std::int32_t L = 20;

  for (int inst = 0; inst < 100; ++inst) {
    std::vector<LinkageStructure> draws;
    for (std::int32_t s = 0; s < L; ++s)
      draws.push_back(testutil::random_structure(rng, d, 0.5));
    const PosteriorSamples samples(d, draws);

    // Expected F at beta=1 scaled by 60L is integral: each draw contributes
    // 120*TP/(m+k) with m+k in 1..6, all divisors of 60 (or 60 for an
    // agreeing pair of empty structures).
    const auto int_score = [&](const LinkageStructure& est) -> std::int64_t {
      const std::int32_t k = est.num_links();
      std::int64_t acc = 0;
      for (const auto& s : draws) {
        const std::int32_t m = s.num_links();
        if (k == 0) {
          acc += m == 0 ? 60 : 0;
          continue;
        }
        std::int64_t tp = 0;
        for (std::int32_t j = 0; j < d.n_b; ++j)
          if (est.is_linked(j) && s.is_linked(j) &&
              est.link_of(j) == s.link_of(j))
            ++tp;
        acc += 120 * tp / (m + k);
      }
      return acc;
    };

    const auto report = fslink::fscore_bayes(samples);
    std::int64_t best = -1;
    for (const auto& s : all) best = std::max(best, int_score(s));
    if (int_score(report.estimate) != best)
      return fail("posterior estimator below oracle on instance " +
                  std::to_string(inst));

    // Plug-in scores with dyadic probabilities t/1024; per record the four
    // numerators stay below 1024 so each column is a subdistribution. The
    // plug-in objective is 2*sel/(tot + 1024*k) after scaling, compared by
    // cross multiplication.
    std::vector<PairProbabilities::Entry> pe;
    std::vector<std::vector<std::int64_t>> t(
        d.n_b, std::vector<std::int64_t>(d.n_a, 0));
    std::int64_t tot = 0;
    for (std::int32_t j = 0; j < d.n_b; ++j)
      for (std::int32_t i = 0; i < d.n_a; ++i) {
        const auto v = static_cast<std::int64_t>(rng.uniform_below(256));
        if (v == 0) continue;
        t[j][i] = v;
        tot += v;
        pe.push_back({i, j, static_cast<double>(v) / 1024.0});
      }
    const PairProbabilities probs(d, pe);
    const auto value = [&](const LinkageStructure& est) {
      const std::int64_t k = est.num_links();
      std::int64_t sel = 0;
      for (std::int32_t j = 0; j < d.n_b; ++j)
        if (est.is_linked(j)) sel += t[j][est.link_of(j)];
      if (tot == 0 && k == 0) return std::pair<std::int64_t, std::int64_t>{1, 1};
      return std::pair<std::int64_t, std::int64_t>{2 * sel, tot + 1024 * k};
    };
    const auto plug = fslink::fscore_optimal_score(probs);
    auto best_v = value(all.front());
    for (const auto& s : all) {
      const auto v = value(s);
      if (v.first * best_v.second > best_v.first * v.second) best_v = v;
    }
    const auto got_v = value(plug.estimate);
    if (got_v.first * best_v.second != best_v.first * got_v.second)
      return fail("plug-in estimator below oracle on instance " +
                  std::to_string(inst));
  }
  const double secs = seconds_since(t0);
  if (secs >= kC3BudgetSeconds)
    return fail("took " + fmt1(secs) + " s, budget " +
                fmt1(kC3BudgetSeconds) + " s");
  return {true, "100 instances, both estimators exactly optimal, " +
                    fmt1(secs) + " s"};
}

// 4. Loss-based estimator: the split-posterior scenario stays unlinked under
//    default costs, the diffuse scenario is unlinked and flagged by the
//    sufficient condition under unity costs, and on 1000 random posteriors
//    the sufficient condition never contradicts the estimate.
Outcome criterion4() {
  const ProblemDims d{5, 1};
  const auto column_samples = [&](const std::vector<std::pair<int, int>>&
                                      spec) {
    std::vector<std::int32_t> flat;
    for (const auto& [z, count] : spec)
      flat.insert(flat.end(), count, z);
    return PosteriorSamples(d, flat, static_cast<std::int32_t>(flat.size()));
  };

  // Two candidates at 0.49 each, no-link mass 0.02.
  const auto split = column_samples({{0, 49}, {1, 49}, {5, 2}});
  if (fslink::brl_estimate(split).estimate.is_linked(0))
    return fail("split scenario linked under default costs");

  // Diffuse candidates (.25,.25,.10,.09,.01), no-link mass 0.30.
  const auto diffuse =
      column_samples({{0, 25}, {1, 25}, {2, 10}, {3, 9}, {4, 1}, {5, 30}});
  const BrlLossParams unity(1.0, 1.0, 1.0);
  if (!fslink::prop1_nonmatch_predicate(0, diffuse, unity))
    return fail("sufficient condition missed the diffuse scenario");
  if (fslink::brl_estimate(diffuse, unity).estimate.is_linked(0))
    return fail("diffuse scenario linked under unity costs");

  fslink::Rng rng(404);
  for (int rep = 0; rep < 1000; ++rep) {
    const ProblemDims rd{2 + static_cast<std::int32_t>(rng.uniform_below(5)),
                         1 + static_cast<std::int32_t>(rng.uniform_below(4))};
    std::vector<LinkageStructure> draws;
    for (int s = 0; s < 40; ++s)
      draws.push_back(testutil::random_structure(rng, rd, 0.4));
    const PosteriorSamples samples(rd, draws);
    BrlLossParams loss;
    switch (rep % 3) {
      case 0: break;  // defaults
      case 1: loss = unity; break;
      default:
        loss = BrlLossParams(0.25 + 2.0 * rng.uniform01(),
                             0.25 + 2.0 * rng.uniform01(),
                             0.25 + 2.0 * rng.uniform01());
    }
    const auto est = fslink::brl_estimate(samples, loss).estimate;
    for (std::int32_t j = 0; j < rd.n_b; ++j)
      if (fslink::prop1_nonmatch_predicate(j, samples, loss) &&
          est.is_linked(j))
        return fail("sufficient condition contradicted on replicate " +
                    std::to_string(rep));
  }
  return {true, "both scenarios unlinked, condition held on 1000 posteriors"};
}

// 5. Reduced-scale simulation study, 100 replicates of 1000x50 under the
//    default sampler settings. Bands are wide enough for N=100 noise.
constexpr double kC5LowFMin = 0.90, kC5LowFMax = 1.00;
constexpr double kC5LowOverlapMin = 42.0, kC5LowOverlapMax = 50.0;
constexpr double kC5ModBrlFMax = 0.05;
constexpr double kC5ModFMin = 0.30, kC5ModFMax = 0.60;
constexpr double kC5ModOverlapMin = 20.0, kC5ModOverlapMax = 36.0;

Outcome criterion5() {
  const unsigned hw = std::thread::hardware_concurrency();
  fslink::StudyConfig cfg;
  cfg.sim.dims = {1000, 50};
  cfg.sim.replicates = 100;
  cfg.sampler.burn_in = 5000;
  cfg.sampler.kept = 20000;
  cfg.threads = hw == 0 ? 1 : static_cast<int>(hw);

  cfg.sim.pi = 1.0;
  cfg.sim.mu = fslink::preset_error_level(fslink::ErrorLevel::low);
  cfg.sim.seed = 51;
  const auto low = fslink::run_study(cfg);

  cfg.sim.pi = 0.5;
  cfg.sim.mu = fslink::preset_error_level(fslink::ErrorLevel::moderate);
  cfg.sim.seed = 52;
  const auto mod = fslink::run_study(cfg);

  const std::string detail =
      "low: F " + fmt1(low.avg_f_bayes) + "/" + fmt1(low.avg_f_brl) +
      ", overlap " + fmt1(low.avg_overlap_bayes) + ", post mean " +
      fmt1(low.avg_post_mean) + " CI [" + fmt1(low.avg_ci_low) + ", " +
      fmt1(low.avg_ci_high) + "]; moderate: F " + fmt1(mod.avg_f_bayes) +
      ", brl F " + fmt1(mod.avg_f_brl) + ", overlap " +
      fmt1(mod.avg_overlap_bayes) + ", post mean " + fmt1(mod.avg_post_mean) +
      " CI [" + fmt1(mod.avg_ci_low) + ", " + fmt1(mod.avg_ci_high) + "]";

  const bool ok =
      low.avg_f_bayes >= kC5LowFMin && low.avg_f_bayes <= kC5LowFMax &&
      low.avg_f_brl >= kC5LowFMin && low.avg_f_brl <= kC5LowFMax &&
      low.avg_overlap_bayes >= kC5LowOverlapMin &&
      low.avg_overlap_bayes <= kC5LowOverlapMax &&
      mod.avg_f_brl <= kC5ModBrlFMax && mod.avg_f_bayes >= kC5ModFMin &&
      mod.avg_f_bayes <= kC5ModFMax &&
      mod.avg_overlap_bayes >= kC5ModOverlapMin &&
      mod.avg_overlap_bayes <= kC5ModOverlapMax;
  return {ok, detail};
}

// 6. Sampler correctness: chain frequencies on the enumerable 2x2 problem
//    within 3 Monte-Carlo SEs of the exhaustive posterior at 50000 draws,
//    and the posterior mean of each field's top agreement probability
//    within 0.05 of the generating truth on one low-error replicate.
constexpr std::int32_t kC6Kept = 50000;
constexpr double kC6SeMultiple = 3.0;
constexpr double kC6MTolerance = 0.05;

double log_dirichlet_marginal(const std::vector<std::int64_t>& counts) {
  double total = 0.0;
  double lg = std::lgamma(static_cast<double>(counts.size()));
  for (const auto c : counts) {
    lg += std::lgamma(static_cast<double>(c) + 1.0);
    total += static_cast<double>(c);
  }
  return lg - std::lgamma(static_cast<double>(counts.size()) + total);
}

Outcome criterion6() {
  const ProblemDims d{2, 2};
  const std::vector<std::uint8_t> g = {1, 1, 2, 2, 2, 2, 1, 2};
  const ComparisonData data(d, {2, 2}, g);

  const std::vector<std::pair<int, int>> states = {
      {-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 0}};
  std::vector<double> log_post;
  for (const auto& [z0, z1] : states) {
    const int n = (z0 >= 0 ? 1 : 0) + (z1 >= 0 ? 1 : 0);
    double lp = std::lgamma(n + 1.0) + std::lgamma(3.0 - n) -
                std::lgamma(4.0) + std::lgamma(3.0 - n) - std::lgamma(3.0);
    for (int f = 0; f < 2; ++f) {
      std::vector<std::int64_t> mc(2, 0), uc(2, 0);
      for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i) {
          const int level = data.level(i, j, f);
          const bool linked = (j == 0 ? z0 : z1) == i;
          (linked ? mc : uc)[level - 1] += 1;
        }
      lp += log_dirichlet_marginal(mc) + log_dirichlet_marginal(uc);
    }
    log_post.push_back(lp);
  }
  const double lmax = *std::max_element(log_post.begin(), log_post.end());
  std::vector<double> post;
  double norm = 0.0;
  for (const double lp : log_post) {
    post.push_back(std::exp(lp - lmax));
    norm += post.back();
  }
  for (double& p : post) p /= norm;

  SamplerConfig scfg;
  scfg.burn_in = 2000;
  scfg.kept = kC6Kept;
  scfg.seed = 31337;
  const PosteriorSamples samples = gibbs_sample(data, scfg);

  const auto state_of = [&](std::int32_t s) -> std::size_t {
    const int z0 = samples.z(0, s) < 2 ? samples.z(0, s) : -1;
    const int z1 = samples.z(1, s) < 2 ? samples.z(1, s) : -1;
    for (std::size_t t = 0; t < states.size(); ++t)
      if (states[t] == std::make_pair(z0, z1)) return t;
    return states.size();
  };

  // Monte-Carlo SE per state: batch means over 100 batches guards against
  // autocorrelation, the iid binomial SE is the floor for tiny masses.
  const int num_batches = 100;
  const int batch_len = kC6Kept / num_batches;
  std::vector<std::vector<double>> batch_freq(
      states.size(), std::vector<double>(num_batches, 0.0));
  for (std::int32_t s = 0; s < kC6Kept; ++s) {
    const auto t = state_of(s);
    if (t == states.size()) return fail("sampler produced an unknown state");
    batch_freq[t][std::min<int>(s / batch_len, num_batches - 1)] += 1.0;
  }
  double worst = 0.0;
  for (std::size_t t = 0; t < states.size(); ++t) {
    double freq = 0.0;
    for (const double b : batch_freq[t]) freq += b;
    freq /= kC6Kept;
    double var = 0.0;
    for (const double b : batch_freq[t]) {
      const double dev = b / batch_len - freq;
      var += dev * dev;
    }
    const double se_batch =
        std::sqrt(var / (num_batches * (num_batches - 1.0)));
    const double se_iid = std::sqrt(post[t] * (1.0 - post[t]) / kC6Kept);
    const double tol = kC6SeMultiple * std::max(se_batch, se_iid);
    const double dev = std::abs(freq - post[t]);
    worst = std::max(worst, dev / tol);
    if (dev > tol)
      return fail("state " + std::to_string(t) + " off by " + fmt1(dev) +
                  ", tolerance " + fmt1(tol));
  }

  SimulationConfig sim;
  sim.dims = {1000, 50};
  sim.pi = 1.0;
  sim.seed = 404;
  const auto rep = fslink::generate_replicate(sim, 0);
  SamplerConfig mcfg;
  mcfg.seed = 808;
  fslink::detail::GibbsChain chain(rep.data, mcfg);
  for (int t = 0; t < 1000; ++t) chain.step();
  std::vector<double> mean_m1(3, 0.0);
  const int kept = 4000;
  for (int t = 0; t < kept; ++t) {
    chain.step();
    for (int f = 0; f < 3; ++f) mean_m1[f] += chain.m()[f][0];
  }
  const double truth[3] = {0.93, 0.93, 0.98};
  for (int f = 0; f < 3; ++f) {
    mean_m1[f] /= kept;
    if (std::abs(mean_m1[f] - truth[f]) > kC6MTolerance)
      return fail("m mean for field " + std::to_string(f + 1) + " is " +
                  fmt1(mean_m1[f]) + ", truth " + fmt1(truth[f]));
  }
  return {true, "worst state deviation " + fmt1(worst) +
                    " of tolerance; m means " + fmt1(mean_m1[0]) + "/" +
                    fmt1(mean_m1[1]) + "/" + fmt1(mean_m1[2])};
}

// 7. The sparse pair-weight pass equals a dense triple loop exactly on every
//    shape up to 6x6 with up to 50 draws, and its wall time stays within a
//    factor 2 of linear when the draw count doubles.
constexpr double kC7LinearSlack = 2.0;

Outcome criterion7() {
  fslink::Rng rng(707);
  for (std::int32_t na = 1; na <= 6; ++na)
    for (std::int32_t nb = 1; nb <= 6; ++nb)
      for (const std::int32_t L : {1, 5, 17, 50}) {
        const ProblemDims d{na, nb};
        std::vector<LinkageStructure> draws;
        for (std::int32_t s = 0; s < L; ++s)
          draws.push_back(testutil::random_structure(rng, d, 0.5));
        const PosteriorSamples samples(d, draws);
        for (const double beta : {1.0, 2.0}) {
          const FScoreConfig cfg(beta);
          for (std::int32_t k = 1; k <= std::min(na, nb); ++k) {
            const auto sparse = fslink::mc_delta(samples, k, cfg);
            const auto dense = testutil::dense_delta(d, draws, k, cfg);
            for (std::int32_t i = 0; i < na; ++i)
              for (std::int32_t j = 0; j < nb; ++j)
                if (sparse.at(i, j) != dense[i][j])
                  return fail("sparse/dense mismatch at " +
                              std::to_string(na) + "x" + std::to_string(nb) +
                              " L=" + std::to_string(L) +
                              " k=" + std::to_string(k));
          }
        }
      }

  // Timing: the same pipeline on L and 2L draws over every cardinality. The
  // pair space is kept small so the per-draw work dominates the run time.
  const ProblemDims d{60, 40};
  const std::int32_t L1 = 20000;
  fslink::Rng trng(717);
  std::vector<LinkageStructure> draws2;
  for (std::int32_t s = 0; s < 2 * L1; ++s)
    draws2.push_back(testutil::random_structure(trng, d, 0.5));
  const std::vector<LinkageStructure> draws1(draws2.begin(),
                                             draws2.begin() + L1);
  const PosteriorSamples s1(d, draws1);
  const PosteriorSamples s2(d, draws2);
  const FScoreConfig cfg;

  const auto timed = [&](const PosteriorSamples& s) {
    std::vector<double> runs;
    for (int t = 0; t < 5; ++t) {
      const auto t0 = std::chrono::steady_clock::now();
      double sink = 0.0;
      for (std::int32_t k = 1; k <= d.n_b; ++k)
        sink += fslink::mc_delta(s, k, cfg).max_score();
      const double el = seconds_since(t0);
      if (sink < 0.0) std::cerr << "";  // keep the loop observable
      runs.push_back(el);
    }
    std::sort(runs.begin(), runs.end());
    return runs[2];
  };

  double ratio = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const double t1 = timed(s1);
    const double t2 = timed(s2);
    if (t1 <= 0.0) continue;
    ratio = t2 / t1;
    if (ratio <= kC7LinearSlack * 2.0)
      return {true, "exact on all shapes; doubling ratio " + fmt1(ratio)};
  }
  return fail("doubling ratio " + fmt1(ratio) + " above " +
              fmt1(kC7LinearSlack * 2.0));
}

// 8. The simulation command is byte-deterministic: same seed gives identical
//    replicates.csv and summary.json across repeated runs and thread counts.
Outcome criterion8() {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "fslink_acceptance8";
  fs::remove_all(base);
  const auto run = [&](const std::string& name, int threads) -> fs::path {
    const fs::path dir = base / name;
    fs::create_directories(dir);
    std::ostringstream cmd;
    cmd << "FSLINK_THREADS=" << threads << " " << FSLINK_CLI_PATH
        << " simulate --n-a 80 --n-b 12 --replicates 6 --burn-in 300"
           " --samples 600 --seed 99 --error-level moderate --pi 0.8"
           " --out-dir "
        << dir.string() << " >/dev/null 2>&1";
    const int rc = std::system(cmd.str().c_str());
    if (!WIFEXITED(rc) || WEXITSTATUS(rc) != 0) return {};
    return dir;
  };
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
  };

  const fs::path first = run("run1_t1", 1);
  const fs::path second = run("run2_t1", 1);
  const fs::path third = run("run3_t4", 4);
  if (first.empty() || second.empty() || third.empty())
    return fail("a simulate run exited nonzero");
  for (const char* file : {"replicates.csv", "summary.json"}) {
    const std::string a = slurp(first / file);
    if (a.empty()) return fail(std::string(file) + " missing or empty");
    if (a != slurp(second / file))
      return fail(std::string(file) + " differs between identical runs");
    if (a != slurp(third / file))
      return fail(std::string(file) + " differs across thread counts");
  }
  return {true, "outputs byte-identical across runs and thread counts"};
}

Outcome run_criterion(int n) {
  switch (n) {
    case 1: return criterion1();
    case 2: return criterion2();
    case 3: return criterion3();
    case 4: return criterion4();
    case 5: return criterion5();
    case 6: return criterion6();
    case 7: return criterion7();
    case 8: return criterion8();
    default: return fail("no such criterion");
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  if (argc <= 1) {
    for (int n = 1; n <= 8; ++n) which.push_back(n);
  } else {
    for (int a = 1; a < argc; ++a) which.push_back(std::atoi(argv[a]));
  }
  bool all_pass = true;
  for (const int n : which) {
    Outcome out;
    try {
      out = run_criterion(n);
    } catch (const std::exception& e) {
      out = fail(std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << n << ": " << (out.pass ? "PASS" : "FAIL")
              << " (" << out.detail << ")" << std::endl;
    all_pass = all_pass && out.pass;
  }
  return all_pass ? 0 : 1;
}
