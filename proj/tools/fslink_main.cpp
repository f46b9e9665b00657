#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fslink/core.hpp"
#include "fslink/estimators.hpp"
#include "fslink/io.hpp"
#include "fslink/model.hpp"
#include "fslink/parallel.hpp"
#include "fslink/random.hpp"
#include "fslink/simgen.hpp"
#include "fslink/study.hpp"
#include "fslink/weights.hpp"

namespace {

using json = nlohmann::ordered_json;

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int threads_from_env() {
  const char* raw = std::getenv("FSLINK_THREADS");
  if (raw == nullptr || *raw == '\0') return 1;
  try {
    std::size_t pos = 0;
    const int n = std::stoi(raw, &pos);
    if (pos != std::string(raw).size() || n < 1)
      throw std::invalid_argument("range");
    return n;
  } catch (const std::exception&) {
    throw CliError("FSLINK_THREADS must be a positive integer");
  }
}

fslink::BrlLossParams parse_lambda(const std::string& text) {
  const auto parts = fslink::detail::split(text, ',');
  if (parts.size() != 3)
    throw CliError("--lambda expects three comma-separated values");
  double v[3];
  for (int t = 0; t < 3; ++t) {
    try {
      std::size_t pos = 0;
      v[t] = std::stod(parts[t], &pos);
      if (pos != parts[t].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw CliError("--lambda: '" + parts[t] + "' is not a number");
    }
  }
  return fslink::BrlLossParams(v[0], v[1], v[2]);
}

// Schema entries are 'field:kind' separated by ';', with kinds levenshtein
// (optionally 'levenshtein:t1,t2,...,tn'), binary, and numeric-binned.
std::vector<fslink::ComparatorSpec> parse_schema(const std::string& text) {
  std::vector<fslink::ComparatorSpec> schema;
  for (const auto& item : fslink::detail::split(text, ';')) {
    if (item.empty()) continue;
    const auto parts = fslink::detail::split(item, ':');
    if (parts.size() < 2 || parts[0].empty())
      throw CliError("--schema entry '" + item + "' is not field:kind");
    fslink::FieldComparator cmp;
    if (parts[1] == "levenshtein") {
      cmp.kind = fslink::FieldComparator::Kind::levenshtein;
      if (parts.size() == 3) {
        cmp.thresholds.clear();
        for (const auto& t : fslink::detail::split(parts[2], ',')) {
          try {
            std::size_t pos = 0;
            cmp.thresholds.push_back(std::stod(t, &pos));
            if (pos != t.size()) throw std::invalid_argument("trailing");
          } catch (const std::exception&) {
            throw CliError("--schema: threshold '" + t + "' is not a number");
          }
        }
      } else if (parts.size() > 3) {
        throw CliError("--schema entry '" + item + "' is malformed");
      }
    } else if (parts.size() == 2 && parts[1] == "binary") {
      cmp.kind = fslink::FieldComparator::Kind::binary_exact;
    } else if (parts.size() == 2 && parts[1] == "numeric-binned") {
      cmp.kind = fslink::FieldComparator::Kind::numeric_binned;
    } else {
      throw CliError("--schema: unknown comparator '" + parts[1] + "'");
    }
    schema.push_back({parts[0], cmp});
  }
  if (schema.empty()) throw CliError("--schema is empty");
  return schema;
}

struct EstimateArgs {
  std::string posterior, probabilities, records_a, records_b, schema;
  std::string block_key, truth, out_dir = ".", save_posterior;
  std::string estimator = "all", lambda = "1,1,2";
  double beta = 1.0;
  std::int64_t burn_in = 5000, samples = 20000;
  std::uint64_t seed = 0;
};

struct SimulateArgs {
  std::string error_level = "low", lambda = "1,1,2", out_dir = ".";
  double pi = 1.0, beta = 1.0;
  std::int32_t replicates = 100, n_a = 1000, n_b = 50;
  std::int64_t burn_in = 5000, samples = 20000;
  std::uint64_t seed = 0;
};

// One fitted partition of the problem: global row ids on both sides plus the
// posterior for the block's subproblem.
struct BlockFit {
  std::vector<std::int32_t> a_rows, b_rows;
  std::optional<fslink::PosteriorSamples> samples;
};

fslink::RecordTable subset(const fslink::RecordTable& t,
                           const std::vector<std::int32_t>& rows) {
  fslink::RecordTable out;
  out.fields = t.fields;
  for (const std::int32_t r : rows) out.rows.push_back(t.rows[r]);
  return out;
}

std::vector<std::string> requested_estimators(const std::string& name,
                                              bool have_posterior) {
  const std::vector<std::string> known = {"fscore-bayes", "fscore-os", "brl"};
  if (name == "all") {
    if (have_posterior) return known;
    return {"fscore-os"};
  }
  for (const auto& k : known)
    if (name == k) {
      if (!have_posterior && name != "fscore-os")
        throw CliError("estimator '" + name +
                       "' needs posterior draws; the probabilities input "
                       "only supports fscore-os");
      return {name};
    }
  throw CliError("unknown estimator '" + name + "'");
}

json metrics_json(const fslink::EstimatorMetrics& m, bool blocked,
                  const std::string& file) {
  json out;
  out["name"] = m.name;
  out["links"] = m.estimated_overlap;
  out["population"] = m.population;
  if (blocked)
    out["objective"] = nullptr;  // block objectives are not comparable
  else
    out["objective"] = m.report.objective_value;
  out["estimate_file"] = file;
  if (m.has_truth) out["f_score_vs_truth"] = m.f_vs_truth;
  return out;
}

int run_estimate(const EstimateArgs& args, int threads) {
  const int modes = (!args.posterior.empty() ? 1 : 0) +
                    (!args.probabilities.empty() ? 1 : 0) +
                    (!args.records_a.empty() || !args.records_b.empty() ? 1 : 0);
  if (modes != 1)
    throw CliError(
        "pick exactly one input: --posterior, --probabilities, or "
        "--records-a/--records-b");

  const fslink::FScoreConfig fscore(args.beta);
  const fslink::BrlLossParams loss = parse_lambda(args.lambda);
  std::filesystem::create_directories(args.out_dir);
  const auto out_path = [&](const std::string& name) {
    return args.out_dir + "/" + name;
  };

  json report;
  std::vector<fslink::EstimatorMetrics> metrics;
  std::optional<fslink::LinkageStructure> truth;

  // Pairwise-probability input: plug-in scoring only, no posterior summary.
  if (!args.probabilities.empty()) {
    const fslink::PairProbabilities probs =
        fslink::load_probabilities(args.probabilities);
    if (!args.truth.empty()) truth = fslink::load_estimate(args.truth);
    if (truth && !(truth->dims() == probs.dims()))
      throw CliError("--truth dimensions do not match the input");
    const auto names = requested_estimators(args.estimator, false);
    report["n_a"] = probs.dims().n_a;
    report["n_b"] = probs.dims().n_b;
    report["input"] = "probabilities";
    report["blocks"] = 1;
    report["overlap_posterior"] = nullptr;
    report["estimators"] = json::array();
    for (const auto& name : names) {
      auto fit = fslink::fscore_optimal_score(probs, fscore, threads);
      const std::string file = "estimate_" + name + ".csv";
      fslink::save_estimate(out_path(file), fit.estimate);
      const auto m = fslink::make_metrics(name, std::move(fit),
                                          truth ? &*truth : nullptr, fscore);
      report["estimators"].push_back(metrics_json(m, false, file));
    }
    std::ofstream out(out_path("report.json"));
    out << report.dump(2) << "\n";
    if (!out) throw CliError("cannot write report.json");
    return 0;
  }

  // Posterior input, either loaded directly or sampled from records.
  std::vector<BlockFit> blocks;
  fslink::ProblemDims dims{0, 0};
  std::string input_kind;

  if (!args.posterior.empty()) {
    input_kind = "posterior";
    auto samples = fslink::load_posterior(args.posterior);
    dims = samples.dims();
    BlockFit fit;
    fit.a_rows.resize(dims.n_a);
    fit.b_rows.resize(dims.n_b);
    for (std::int32_t i = 0; i < dims.n_a; ++i) fit.a_rows[i] = i;
    for (std::int32_t j = 0; j < dims.n_b; ++j) fit.b_rows[j] = j;
    fit.samples = std::move(samples);
    blocks.push_back(std::move(fit));
  } else {
    input_kind = "records";
    if (args.records_a.empty() || args.records_b.empty())
      throw CliError("records input needs both --records-a and --records-b");
    if (args.schema.empty()) throw CliError("records input needs --schema");
    const fslink::RecordTable table_a = fslink::load_records(args.records_a);
    const fslink::RecordTable table_b = fslink::load_records(args.records_b);
    const auto schema = parse_schema(args.schema);
    dims = {static_cast<std::int32_t>(table_a.rows.size()),
            static_cast<std::int32_t>(table_b.rows.size())};

    if (args.block_key.empty()) {
      BlockFit fit;
      fit.a_rows.resize(dims.n_a);
      fit.b_rows.resize(dims.n_b);
      for (std::int32_t i = 0; i < dims.n_a; ++i) fit.a_rows[i] = i;
      for (std::int32_t j = 0; j < dims.n_b; ++j) fit.b_rows[j] = j;
      blocks.push_back(std::move(fit));
    } else {
      // Partition both files on the key; keys are processed in sorted order
      // so block indexing (and with it seeding) is reproducible.
      const std::int32_t col_a =
          fslink::detail::field_index(table_a, args.block_key);
      const std::int32_t col_b =
          fslink::detail::field_index(table_b, args.block_key);
      std::map<std::string, BlockFit> by_key;
      for (std::int32_t i = 0; i < dims.n_a; ++i)
        by_key[table_a.rows[i][col_a]].a_rows.push_back(i);
      for (std::int32_t j = 0; j < dims.n_b; ++j)
        by_key[table_b.rows[j][col_b]].b_rows.push_back(j);
      for (auto& [key, fit] : by_key)
        if (!fit.b_rows.empty()) blocks.push_back(std::move(fit));
    }

    if (!args.save_posterior.empty() && blocks.size() != 1)
      throw CliError("--save-posterior only works without blocking");

    fslink::parallel_for(
        blocks.size(), threads < 1 ? 1u : static_cast<unsigned>(threads),
        [&](std::size_t b) {
          BlockFit& fit = blocks[b];
          const auto data = fslink::build_comparisons(
              subset(table_a, fit.a_rows), subset(table_b, fit.b_rows), schema);
          fslink::SamplerConfig scfg;
          scfg.burn_in = args.burn_in;
          scfg.kept = args.samples;
          scfg.seed = blocks.size() == 1
                          ? args.seed
                          : fslink::derive_seed(args.seed, b);
          fit.samples = fslink::gibbs_sample(data, scfg);
        });
    if (!args.save_posterior.empty())
      fslink::save_posterior(args.save_posterior, *blocks[0].samples);
  }

  if (!args.truth.empty()) truth = fslink::load_estimate(args.truth);
  if (truth && !(truth->dims() == dims))
    throw CliError("--truth dimensions do not match the input");

  const bool blocked = blocks.size() > 1;
  const auto names = requested_estimators(args.estimator, true);

  // Draw-wise sums of per-block link counts form draws of the total overlap
  // because the block chains are independent.
  std::vector<std::int32_t> total_counts(blocks[0].samples->num_samples(), 0);
  for (const auto& fit : blocks) {
    const auto& counts = fit.samples->match_counts();
    if (counts.size() != total_counts.size())
      throw CliError("internal: block sample counts differ");
    for (std::size_t s = 0; s < counts.size(); ++s)
      total_counts[s] += counts[s];
  }
  const fslink::OverlapSummary overlap = fslink::overlap_summary(total_counts);

  report["n_a"] = dims.n_a;
  report["n_b"] = dims.n_b;
  report["input"] = input_kind;
  report["blocks"] = blocks.size();
  report["overlap_posterior"] = {{"mean", overlap.mean},
                                 {"ci95_low", overlap.ci_low},
                                 {"ci95_high", overlap.ci_high}};
  report["estimators"] = json::array();

  for (const auto& name : names) {
    std::vector<std::int32_t> z(dims.n_b);
    for (std::int32_t j = 0; j < dims.n_b; ++j) z[j] = dims.n_a + j;
    double objective = 0.0;
    for (const auto& fit : blocks) {
      const auto& samples = *fit.samples;
      fslink::EstimateReport local =
          name == "fscore-bayes"
              ? fslink::fscore_bayes(samples, fscore, threads)
              : name == "fscore-os"
                    ? fslink::fscore_optimal_score(
                          fslink::marginal_match_probs(samples), fscore,
                          threads)
                    : fslink::brl_estimate(samples, loss);
      objective += local.objective_value;
      for (std::size_t jj = 0; jj < fit.b_rows.size(); ++jj) {
        const auto local_j = static_cast<std::int32_t>(jj);
        if (local.estimate.is_linked(local_j))
          z[fit.b_rows[jj]] = fit.a_rows[local.estimate.link_of(local_j)];
      }
    }
    fslink::EstimateReport combined{
        fslink::LinkageStructure(dims, std::move(z)), objective, {}};
    const std::string file = "estimate_" + name + ".csv";
    fslink::save_estimate(out_path(file), combined.estimate);
    const auto m = fslink::make_metrics(name, std::move(combined),
                                        truth ? &*truth : nullptr, fscore);
    report["estimators"].push_back(metrics_json(m, blocked, file));
  }

  std::ofstream out(out_path("report.json"));
  out << report.dump(2) << "\n";
  if (!out) throw CliError("cannot write report.json");
  return 0;
}

int run_simulate(const SimulateArgs& args, int threads) {
  fslink::StudyConfig cfg;
  cfg.sim.dims = {args.n_a, args.n_b};
  cfg.sim.pi = args.pi;
  cfg.sim.mu = fslink::preset_error_level(
      fslink::error_level_from_string(args.error_level));
  cfg.sim.replicates = args.replicates;
  cfg.sim.seed = args.seed;
  cfg.sampler.burn_in = args.burn_in;
  cfg.sampler.kept = args.samples;
  cfg.fscore = fslink::FScoreConfig(args.beta);
  cfg.loss = parse_lambda(args.lambda);
  cfg.threads = threads;

  const fslink::StudySummary summary = fslink::run_study(cfg);

  std::filesystem::create_directories(args.out_dir);
  std::ofstream rows(args.out_dir + "/replicates.csv");
  rows << "replicate,true_overlap,f_bayes,overlap_bayes,f_brl,overlap_brl,"
          "post_mean,ci_low,ci_high,covered\n";
  for (std::size_t r = 0; r < summary.rows.size(); ++r) {
    const auto& row = summary.rows[r];
    rows << (r + 1) << "," << row.true_overlap << "," << fmt(row.f_bayes)
         << "," << row.overlap_bayes << "," << fmt(row.f_brl) << ","
         << row.overlap_brl << "," << fmt(row.overlap.mean) << ","
         << row.overlap.ci_low << "," << row.overlap.ci_high << ","
         << (row.covered ? 1 : 0) << "\n";
  }
  rows.flush();
  if (!rows) throw CliError("cannot write replicates.csv");

  json out;
  out["n_a"] = args.n_a;
  out["n_b"] = args.n_b;
  out["pi"] = args.pi;
  out["error_level"] = args.error_level;
  out["replicates"] = args.replicates;
  out["burn_in"] = args.burn_in;
  out["samples"] = args.samples;
  out["seed"] = args.seed;
  out["beta"] = args.beta;
  out["avg_true_overlap"] = summary.avg_true_overlap;
  out["fscore_bayes"] = {{"avg_f", summary.avg_f_bayes},
                         {"avg_overlap", summary.avg_overlap_bayes}};
  out["brl"] = {{"avg_f", summary.avg_f_brl},
                {"avg_overlap", summary.avg_overlap_brl}};
  out["overlap_ci"] = {{"avg_low", summary.avg_ci_low},
                       {"avg_high", summary.avg_ci_high},
                       {"avg_post_mean", summary.avg_post_mean},
                       {"coverage", summary.ci_coverage}};
  std::ofstream sum(args.out_dir + "/summary.json");
  sum << out.dump(2) << "\n";
  if (!sum) throw CliError("cannot write summary.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  EstimateArgs est_args;
  SimulateArgs sim_args;

  CLI::App app{"bipartite record linkage: posterior sampling and point estimates"};
  app.require_subcommand(1);

  CLI::App* est = app.add_subcommand(
      "estimate", "fit linkage estimates from posterior draws, pairwise "
                  "probabilities, or raw record files");
  est->add_option("--posterior", est_args.posterior, "posterior draws file");
  est->add_option("--probabilities", est_args.probabilities,
                  "pairwise match probabilities file");
  est->add_option("--records-a", est_args.records_a, "records CSV, file A");
  est->add_option("--records-b", est_args.records_b, "records CSV, file B");
  est->add_option("--schema", est_args.schema,
                  "field comparators, e.g. 'name:levenshtein;year:numeric-binned'");
  est->add_option("--block-key", est_args.block_key,
                  "field whose equal values partition the files into blocks");
  est->add_option("--estimator", est_args.estimator,
                  "fscore-bayes | fscore-os | brl | all");
  est->add_option("--beta", est_args.beta, "F-score recall weight");
  est->add_option("--lambda", est_args.lambda,
                  "loss costs 'false-nonlink,false-link,wrong-link'");
  est->add_option("--burn-in", est_args.burn_in, "discarded sweeps");
  est->add_option("--samples", est_args.samples, "kept posterior draws");
  est->add_option("--seed", est_args.seed, "sampler seed");
  est->add_option("--truth", est_args.truth,
                  "known linkage (estimate format) to score against");
  est->add_option("--out-dir", est_args.out_dir, "output directory");
  est->add_option("--save-posterior", est_args.save_posterior,
                  "also write the sampled posterior draws here");

  CLI::App* sim = app.add_subcommand(
      "simulate", "synthetic replicate study with both estimators");
  sim->add_option("--error-level", sim_args.error_level,
                  "low | moderate | moderate-high");
  sim->add_option("--pi", sim_args.pi, "true overlap proportion");
  sim->add_option("--replicates", sim_args.replicates, "replicate count");
  sim->add_option("--n-a", sim_args.n_a, "records in file A");
  sim->add_option("--n-b", sim_args.n_b, "records in file B");
  sim->add_option("--beta", sim_args.beta, "F-score recall weight");
  sim->add_option("--lambda", sim_args.lambda,
                  "loss costs 'false-nonlink,false-link,wrong-link'");
  sim->add_option("--burn-in", sim_args.burn_in, "discarded sweeps");
  sim->add_option("--samples", sim_args.samples, "kept posterior draws");
  sim->add_option("--seed", sim_args.seed, "master seed");
  sim->add_option("--out-dir", sim_args.out_dir, "output directory");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : 2;
    }
    const int threads = threads_from_env();
    if (est->parsed()) return run_estimate(est_args, threads);
    return run_simulate(sim_args, threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
}
