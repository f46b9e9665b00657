#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fslink/core.hpp"
#include "fslink/lsap.hpp"

namespace fslink {

// Posterior draws of the linkage structure. Stored column-wise (one column of
// length n_b per draw) plus a coordinate layout grouping, for every pair that
// is linked in at least one draw, the indexes of the draws linking it. The
// per-draw link counts are cached once at ingestion because the cardinality
// scan reads them for every k.
class PosteriorSamples {
 public:
  // z_flat is column-major: entry for record j in draw s at s * n_b + j.
  PosteriorSamples(const ProblemDims& dims, std::vector<std::int32_t> z_flat,
                   std::int32_t num_samples)
      : dims_(dims), L_(num_samples), z_(std::move(z_flat)) {
    validate_dims(dims_);
    if (L_ < 1)
      throw std::invalid_argument("PosteriorSamples: need at least one sample");
    if (z_.size() != static_cast<std::size_t>(dims_.n_b) * L_)
      throw std::invalid_argument("PosteriorSamples: flat matrix size mismatch");
    build();
  }

  PosteriorSamples(const ProblemDims& dims,
                   const std::vector<LinkageStructure>& draws)
      : dims_(dims), L_(static_cast<std::int32_t>(draws.size())) {
    validate_dims(dims_);
    if (L_ < 1)
      throw std::invalid_argument("PosteriorSamples: need at least one sample");
    z_.reserve(static_cast<std::size_t>(dims_.n_b) * L_);
    for (const auto& s : draws) {
      if (!(s.dims() == dims_))
        throw std::invalid_argument("PosteriorSamples: sample dims mismatch");
      z_.insert(z_.end(), s.z().begin(), s.z().end());
    }
    build();
  }

  const ProblemDims& dims() const { return dims_; }
  std::int32_t num_samples() const { return L_; }
  std::int32_t z(std::int32_t j, std::int32_t s) const {
    return z_[static_cast<std::size_t>(s) * dims_.n_b + j];
  }
  LinkageStructure sample(std::int32_t s) const {
    const auto* base = z_.data() + static_cast<std::size_t>(s) * dims_.n_b;
    return LinkageStructure(dims_,
                            std::vector<std::int32_t>(base, base + dims_.n_b));
  }

  // Number of linked records per draw.
  const std::vector<std::int32_t>& match_counts() const {
    return match_counts_;
  }

  // Coordinate layout over pairs linked at least once, sorted by (j, i).
  std::int32_t num_pairs() const {
    return static_cast<std::int32_t>(pairs_.size());
  }
  std::int32_t pair_i(std::int32_t p) const { return pairs_[p].i; }
  std::int32_t pair_j(std::int32_t p) const { return pairs_[p].j; }
  std::int32_t pair_count(std::int32_t p) const {
    return offsets_[p + 1] - offsets_[p];
  }
  std::span<const std::int32_t> pair_samples(std::int32_t p) const {
    return {sample_ids_.data() + offsets_[p],
            static_cast<std::size_t>(pair_count(p))};
  }

  // Number of draws leaving record j unlinked.
  std::int32_t no_link_count(std::int32_t j) const {
    return no_link_counts_[j];
  }

 private:
  struct PairKey {
    std::int32_t i, j;
  };
  struct Coord {
    std::int32_t j, i, s;
  };

  void build() {
    match_counts_.assign(L_, 0);
    no_link_counts_.assign(dims_.n_b, L_);
    std::vector<Coord> coords;
    for (std::int32_t s = 0; s < L_; ++s) {
      const auto* base = z_.data() + static_cast<std::size_t>(s) * dims_.n_b;
      // Validates the bipartite invariant for this column.
      const LinkageStructure col(
          dims_, std::vector<std::int32_t>(base, base + dims_.n_b));
      for (std::int32_t j = 0; j < dims_.n_b; ++j)
        if (col.is_linked(j)) {
          coords.push_back({j, col.link_of(j), s});
          ++match_counts_[s];
          --no_link_counts_[j];
        }
    }
    std::sort(coords.begin(), coords.end(), [](const Coord& a, const Coord& b) {
      return std::tie(a.j, a.i, a.s) < std::tie(b.j, b.i, b.s);
    });
    offsets_.push_back(0);
    for (std::size_t t = 0; t < coords.size(); ++t) {
      if (t == 0 || coords[t].j != coords[t - 1].j ||
          coords[t].i != coords[t - 1].i) {
        pairs_.push_back({coords[t].i, coords[t].j});
        offsets_.push_back(static_cast<std::int32_t>(t));
      }
      sample_ids_.push_back(coords[t].s);
      offsets_.back() = static_cast<std::int32_t>(t + 1);
    }
  }

  ProblemDims dims_;
  std::int32_t L_;
  std::vector<std::int32_t> z_;
  std::vector<std::int32_t> match_counts_;
  std::vector<std::int32_t> no_link_counts_;
  std::vector<PairKey> pairs_;
  std::vector<std::int32_t> offsets_{};
  std::vector<std::int32_t> sample_ids_;
};

// Sparse per-pair match probabilities with the total mass cached.
class PairProbabilities {
 public:
  struct Entry {
    std::int32_t i, j;
    double p;
  };

  explicit PairProbabilities(const ProblemDims& dims,
                             std::vector<Entry> entries = {})
      : dims_(dims), entries_(std::move(entries)) {
    validate_dims(dims_);
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) {
                return std::tie(a.j, a.i) < std::tie(b.j, b.i);
              });
    column_mass_.assign(dims_.n_b, 0.0);
    for (std::size_t t = 0; t < entries_.size(); ++t) {
      const Entry& e = entries_[t];
      if (e.i < 0 || e.i >= dims_.n_a || e.j < 0 || e.j >= dims_.n_b)
        throw std::invalid_argument("PairProbabilities: index out of range");
      if (!(e.p >= 0.0 && e.p <= 1.0))
        throw std::invalid_argument("PairProbabilities: p outside [0, 1]");
      if (t > 0 && entries_[t - 1].i == e.i && entries_[t - 1].j == e.j)
        throw std::invalid_argument("PairProbabilities: duplicate pair");
      total_mass_ += e.p;
      column_mass_[e.j] += e.p;
    }
  }

  const ProblemDims& dims() const { return dims_; }
  std::span<const Entry> entries() const { return entries_; }
  double total_mass() const { return total_mass_; }
  double column_mass(std::int32_t j) const { return column_mass_[j]; }

 private:
  ProblemDims dims_;
  std::vector<Entry> entries_;
  std::vector<double> column_mass_;
  double total_mass_ = 0.0;
};

// Monte-Carlo per-pair scores at cardinality k: the average over draws of
// (1 + beta^2) * 1{pair linked in draw} / (beta^2 * links_in_draw + k).
// One pass over the linked coordinates, so O(n_b * L) per k. A 0/0 term
// (k = 0 on an all-unlinked draw) cannot reach any stored pair, but the
// per-draw weight is defined as 0 for completeness.
inline ScoreMatrix mc_delta(const PosteriorSamples& samples, std::int32_t k,
                            const FScoreConfig& cfg = FScoreConfig()) {
  if (k < 0) throw std::invalid_argument("mc_delta: k must be nonnegative");
  const double b2 = cfg.beta_sq();
  const std::int32_t L = samples.num_samples();
  std::vector<double> w(L);
  for (std::int32_t s = 0; s < L; ++s) {
    const double denom = b2 * samples.match_counts()[s] + k;
    w[s] = denom > 0.0 ? 1.0 / denom : 0.0;
  }
  const double scale = (1.0 + b2) / L;
  const double bound = (1.0 + b2) / (b2 + k) * (1.0 + 1e-9);
  std::vector<ScoreEntry> entries;
  entries.reserve(samples.num_pairs());
  for (std::int32_t p = 0; p < samples.num_pairs(); ++p) {
    double acc = 0.0;
    for (std::int32_t s : samples.pair_samples(p)) acc += w[s];
    const double score = scale * acc;
    if (score <= 0.0) continue;
    if (!(score <= bound))
      throw std::logic_error("mc_delta: entry exceeds the analytic bound");
    entries.push_back({samples.pair_i(p), samples.pair_j(p), score});
  }
  return ScoreMatrix(samples.dims(), std::move(entries));
}

// Plug-in analogue with probabilities in place of draw indicators:
// (1 + beta^2) * p_ij / (beta^2 * total_mass + k). A zero denominator
// (no mass, k = 0) yields an empty matrix.
inline ScoreMatrix plugin_delta(const PairProbabilities& probs, std::int32_t k,
                                const FScoreConfig& cfg = FScoreConfig()) {
  if (k < 0)
    throw std::invalid_argument("plugin_delta: k must be nonnegative");
  const double b2 = cfg.beta_sq();
  const double denom = b2 * probs.total_mass() + k;
  std::vector<ScoreEntry> entries;
  if (denom > 0.0) {
    entries.reserve(probs.entries().size());
    for (const auto& e : probs.entries())
      if (e.p > 0.0) entries.push_back({e.i, e.j, (1.0 + b2) * e.p / denom});
  }
  return ScoreMatrix(probs.dims(), std::move(entries));
}

// Per-pair posterior link frequencies: count over draws divided by L.
inline PairProbabilities marginal_match_probs(const PosteriorSamples& samples) {
  const auto L = static_cast<double>(samples.num_samples());
  std::vector<PairProbabilities::Entry> entries;
  entries.reserve(samples.num_pairs());
  for (std::int32_t p = 0; p < samples.num_pairs(); ++p)
    entries.push_back(
        {samples.pair_i(p), samples.pair_j(p), samples.pair_count(p) / L});
  return PairProbabilities(samples.dims(), std::move(entries));
}

// Per-record frequency of staying unlinked across draws.
inline std::vector<double> no_link_frequencies(const PosteriorSamples& samples) {
  const auto L = static_cast<double>(samples.num_samples());
  std::vector<double> out(samples.dims().n_b);
  for (std::int32_t j = 0; j < samples.dims().n_b; ++j)
    out[j] = samples.no_link_count(j) / L;
  return out;
}

}  // namespace fslink
