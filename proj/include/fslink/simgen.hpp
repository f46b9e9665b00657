#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fslink/core.hpp"
#include "fslink/model.hpp"
#include "fslink/random.hpp"

namespace fslink {

enum class ErrorLevel { low, moderate, moderate_high };

inline ErrorLevel error_level_from_string(const std::string& name) {
  if (name == "low") return ErrorLevel::low;
  if (name == "moderate") return ErrorLevel::moderate;
  if (name == "moderate-high" || name == "moderate_high")
    return ErrorLevel::moderate_high;
  throw std::invalid_argument("unknown error level '" + name + "'");
}

// Three binary comparison fields; level 1 means agreement. The m column
// gives per-field agreement probabilities for true links, u for non-links.
inline MUParams preset_error_level(ErrorLevel level) {
  switch (level) {
    case ErrorLevel::low:
      return MUParams({{0.93, 0.07}, {0.93, 0.07}, {0.98, 0.02}},
                      {{0.06, 0.94}, {0.06, 0.94}, {0.02, 0.98}});
    case ErrorLevel::moderate:
      return MUParams({{0.83, 0.17}, {0.83, 0.17}, {0.98, 0.02}},
                      {{0.16, 0.84}, {0.16, 0.84}, {0.02, 0.98}});
    case ErrorLevel::moderate_high:
      return MUParams({{0.83, 0.17}, {0.83, 0.17}, {0.88, 0.12}},
                      {{0.16, 0.84}, {0.16, 0.84}, {0.02, 0.98}});
  }
  throw std::invalid_argument("unknown error level");
}

struct SimulationConfig {
  ProblemDims dims{1000, 50};
  double pi = 1.0;
  MUParams mu = preset_error_level(ErrorLevel::low);
  std::int32_t replicates = 1;
  std::uint64_t seed = 0;
};

inline void validate_config(const SimulationConfig& cfg) {
  validate_dims(cfg.dims);
  if (!(cfg.pi >= 0.0 && cfg.pi <= 1.0))
    throw std::invalid_argument("SimulationConfig: pi must be in [0, 1]");
  if (cfg.replicates < 1)
    throw std::invalid_argument("SimulationConfig: need at least one replicate");
}

struct Replicate {
  ComparisonData data;
  LinkageStructure truth;
};

// One synthetic replicate: each B record is a true match with probability
// pi, partners are drawn uniformly without replacement from A, and every
// pair's levels come from m (true link) or u (non-link). Replicates are
// independent streams keyed by (seed, r); the draw order (link indicators
// by j, then partners by j, then levels by j, i, f) is part of the
// reproducibility contract.
inline Replicate generate_replicate(const SimulationConfig& cfg,
                                    std::int32_t r) {
  validate_config(cfg);
  if (r < 0) throw std::invalid_argument("generate_replicate: bad index");
  const std::int32_t n_a = cfg.dims.n_a, n_b = cfg.dims.n_b;
  const std::int32_t F = cfg.mu.num_fields();
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));

  std::vector<bool> matched(n_b);
  for (std::int32_t j = 0; j < n_b; ++j) matched[j] = rng.bernoulli(cfg.pi);

  std::vector<std::int32_t> z(n_b), free_rows(n_a);
  for (std::int32_t i = 0; i < n_a; ++i) free_rows[i] = i;
  for (std::int32_t j = 0; j < n_b; ++j) {
    if (!matched[j]) {
      z[j] = n_a + j;
      continue;
    }
    if (free_rows.empty())
      throw std::runtime_error("generate_replicate: more links than A records");
    const std::size_t pick = rng.uniform_below(free_rows.size());
    z[j] = free_rows[pick];
    free_rows[pick] = free_rows.back();
    free_rows.pop_back();
  }
  LinkageStructure truth(cfg.dims, std::move(z));

  std::vector<std::int32_t> levels(F);
  for (std::int32_t f = 0; f < F; ++f) levels[f] = cfg.mu.num_levels(f);
  std::vector<std::uint8_t> gamma;
  gamma.reserve(static_cast<std::size_t>(n_a) * n_b * F);
  for (std::int32_t j = 0; j < n_b; ++j)
    for (std::int32_t i = 0; i < n_a; ++i) {
      const bool linked = truth.is_linked(j) && truth.link_of(j) == i;
      const auto& dist = linked ? cfg.mu.m() : cfg.mu.u();
      for (std::int32_t f = 0; f < F; ++f)
        gamma.push_back(
            static_cast<std::uint8_t>(1 + rng.categorical(dist[f])));
    }
  return {ComparisonData(cfg.dims, std::move(levels), std::move(gamma)),
          std::move(truth)};
}

}  // namespace fslink
