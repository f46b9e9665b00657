#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fslink/core.hpp"
#include "fslink/random.hpp"
#include "fslink/weights.hpp"

namespace fslink {

// Discretized field-comparison levels for every candidate pair. Field f of
// pair (i, j) takes a level in 1..d_f, where level 1 is full agreement and
// higher levels mean rising disagreement. Storage is grouped by B record:
// pair (i, j) lives at ((j * n_a + i) * F).
class ComparisonData {
 public:
  ComparisonData(const ProblemDims& dims, std::vector<std::int32_t> levels,
                 std::vector<std::uint8_t> gamma)
      : dims_(dims), levels_(std::move(levels)), gamma_(std::move(gamma)) {
    validate_dims(dims_);
    if (levels_.empty())
      throw std::invalid_argument("ComparisonData: need at least one field");
    for (const std::int32_t d : levels_)
      if (d < 2 || d > 255)
        throw std::invalid_argument(
            "ComparisonData: fields need between 2 and 255 levels");
    const std::size_t expected = static_cast<std::size_t>(dims_.n_a) *
                                 dims_.n_b * levels_.size();
    if (gamma_.size() != expected)
      throw std::invalid_argument("ComparisonData: level matrix size mismatch");
    for (std::size_t t = 0; t < gamma_.size(); ++t) {
      const std::int32_t d = levels_[t % levels_.size()];
      if (gamma_[t] < 1 || gamma_[t] > d)
        throw std::invalid_argument(
            "ComparisonData: level outside the field's range");
    }
  }

  const ProblemDims& dims() const { return dims_; }
  std::int32_t num_fields() const {
    return static_cast<std::int32_t>(levels_.size());
  }
  std::span<const std::int32_t> levels() const { return levels_; }

  std::uint8_t level(std::int32_t i, std::int32_t j, std::int32_t f) const {
    return gamma_[pair_offset(i, j) + f];
  }
  std::span<const std::uint8_t> pair_levels(std::int32_t i,
                                            std::int32_t j) const {
    return {gamma_.data() + pair_offset(i, j), levels_.size()};
  }

 private:
  std::size_t pair_offset(std::int32_t i, std::int32_t j) const {
    return (static_cast<std::size_t>(j) * dims_.n_a + i) * levels_.size();
  }

  ProblemDims dims_;
  std::vector<std::int32_t> levels_;
  std::vector<std::uint8_t> gamma_;
};

// Per-field level distributions among true matches (m) and non-matches (u).
class MUParams {
 public:
  MUParams(std::vector<std::vector<double>> m, std::vector<std::vector<double>> u)
      : m_(std::move(m)), u_(std::move(u)) {
    if (m_.empty() || m_.size() != u_.size())
      throw std::invalid_argument("MUParams: field count mismatch");
    for (std::size_t f = 0; f < m_.size(); ++f) {
      check_simplex(m_[f]);
      check_simplex(u_[f]);
      if (m_[f].size() != u_[f].size())
        throw std::invalid_argument("MUParams: level count mismatch");
    }
  }

  std::int32_t num_fields() const { return static_cast<std::int32_t>(m_.size()); }
  std::int32_t num_levels(std::int32_t f) const {
    return static_cast<std::int32_t>(m_[f].size());
  }
  const std::vector<std::vector<double>>& m() const { return m_; }
  const std::vector<std::vector<double>>& u() const { return u_; }

 private:
  static void check_simplex(const std::vector<double>& p) {
    if (p.size() < 2)
      throw std::invalid_argument("MUParams: fields need at least two levels");
    double total = 0.0;
    for (const double x : p) {
      if (!std::isfinite(x) || x < 0.0)
        throw std::invalid_argument("MUParams: probabilities must be in [0, 1]");
      total += x;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("MUParams: probabilities must sum to one");
  }

  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> u_;
};

struct SamplerConfig {
  std::int64_t burn_in = 0;
  std::int64_t kept = 1;
  std::uint64_t seed = 0;
  // Beta prior on the linked proportion; (1, 1) is uniform.
  double z_prior_alpha = 1.0;
  double z_prior_beta = 1.0;
};

inline void validate_config(const SamplerConfig& cfg) {
  if (cfg.burn_in < 0)
    throw std::invalid_argument("SamplerConfig: burn_in must be nonnegative");
  if (cfg.kept < 1)
    throw std::invalid_argument("SamplerConfig: need at least one kept draw");
  if (!(cfg.z_prior_alpha > 0.0) || !std::isfinite(cfg.z_prior_alpha) ||
      !(cfg.z_prior_beta > 0.0) || !std::isfinite(cfg.z_prior_beta))
    throw std::invalid_argument("SamplerConfig: prior parameters must be positive");
}

// Columnar table of raw records; every cell is text and numeric comparators
// parse on demand. Empty cells are treated as missing and rejected.
struct RecordTable {
  std::vector<std::string> fields;
  std::vector<std::vector<std::string>> rows;
};

struct FieldComparator {
  enum class Kind { levenshtein, binary_exact, numeric_binned };

  Kind kind = Kind::levenshtein;
  // Levenshtein cut points: level t+1 iff the normalized distance is at most
  // thresholds[t] (and above thresholds[t-1]). Must start at 0 and end at 1.
  std::vector<double> thresholds = {0.0, 0.25, 0.5, 1.0};
};

struct ComparatorSpec {
  std::string field;
  FieldComparator comparator;
};

inline std::int64_t levenshtein_distance(std::string_view a,
                                         std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::int64_t> row(b.size() + 1);
  for (std::size_t c = 0; c <= b.size(); ++c)
    row[c] = static_cast<std::int64_t>(c);
  for (std::size_t r = 1; r <= a.size(); ++r) {
    std::int64_t diag = row[0];
    row[0] = static_cast<std::int64_t>(r);
    for (std::size_t c = 1; c <= b.size(); ++c) {
      const std::int64_t sub = diag + (a[r - 1] == b[c - 1] ? 0 : 1);
      diag = row[c];
      row[c] = std::min({row[c] + 1, row[c - 1] + 1, sub});
    }
  }
  return row[b.size()];
}

// Edit distance divided by the longer length, in [0, 1].
inline double normalized_levenshtein(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 0.0;
  return static_cast<double>(levenshtein_distance(a, b)) /
         static_cast<double>(longest);
}

namespace detail {

inline void validate_thresholds(const std::vector<double>& t) {
  if (t.size() < 2 || t.size() > 255)
    throw std::invalid_argument("comparator: need 2..255 thresholds");
  if (t.front() != 0.0 || t.back() != 1.0)
    throw std::invalid_argument("comparator: thresholds must span [0, 1]");
  for (std::size_t k = 1; k < t.size(); ++k)
    if (!(t[k] > t[k - 1]))
      throw std::invalid_argument("comparator: thresholds must increase");
}

inline double parse_number(const std::string& cell) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("comparator: non-numeric cell '" + cell + "'");
  }
  if (pos != cell.size())
    throw std::invalid_argument("comparator: non-numeric cell '" + cell + "'");
  return v;
}

inline std::uint8_t compare_cells(const FieldComparator& cmp,
                                  const std::string& a, const std::string& b) {
  switch (cmp.kind) {
    case FieldComparator::Kind::levenshtein: {
      const double d = normalized_levenshtein(a, b);
      for (std::size_t t = 0; t < cmp.thresholds.size(); ++t)
        if (d <= cmp.thresholds[t]) return static_cast<std::uint8_t>(t + 1);
      return static_cast<std::uint8_t>(cmp.thresholds.size());
    }
    case FieldComparator::Kind::binary_exact:
      return a == b ? 1 : 2;
    case FieldComparator::Kind::numeric_binned: {
      const double diff = std::abs(parse_number(a) - parse_number(b));
      if (diff <= 1.0) return 1;
      if (diff <= 5.0) return 2;
      return 3;
    }
  }
  throw std::invalid_argument("comparator: unknown kind");
}

inline std::int32_t field_index(const RecordTable& table,
                                const std::string& name) {
  const auto it = std::find(table.fields.begin(), table.fields.end(), name);
  if (it == table.fields.end())
    throw std::invalid_argument("build_comparisons: unknown field '" + name +
                                "'");
  return static_cast<std::int32_t>(it - table.fields.begin());
}

}  // namespace detail

inline ComparisonData build_comparisons(const RecordTable& file_a,
                                        const RecordTable& file_b,
                                        const std::vector<ComparatorSpec>& schema) {
  if (schema.empty())
    throw std::invalid_argument("build_comparisons: empty schema");
  const ProblemDims dims{static_cast<std::int32_t>(file_a.rows.size()),
                         static_cast<std::int32_t>(file_b.rows.size())};

  std::vector<std::int32_t> col_a, col_b, levels;
  for (const auto& spec : schema) {
    if (spec.comparator.kind == FieldComparator::Kind::levenshtein)
      detail::validate_thresholds(spec.comparator.thresholds);
    col_a.push_back(detail::field_index(file_a, spec.field));
    col_b.push_back(detail::field_index(file_b, spec.field));
    switch (spec.comparator.kind) {
      case FieldComparator::Kind::levenshtein:
        levels.push_back(
            static_cast<std::int32_t>(spec.comparator.thresholds.size()));
        break;
      case FieldComparator::Kind::binary_exact:
        levels.push_back(2);
        break;
      case FieldComparator::Kind::numeric_binned:
        levels.push_back(3);
        break;
    }
  }

  const auto cell = [](const RecordTable& t, std::int32_t row,
                       std::int32_t col, const std::string& field) -> const std::string& {
    if (t.rows[row].size() != t.fields.size())
      throw std::invalid_argument("build_comparisons: ragged record table");
    const std::string& v = t.rows[row][col];
    if (v.empty())
      throw std::invalid_argument("build_comparisons: missing value in field '" +
                                  field + "'");
    return v;
  };

  const std::int32_t F = static_cast<std::int32_t>(schema.size());
  std::vector<std::uint8_t> gamma(static_cast<std::size_t>(dims.n_a) *
                                  dims.n_b * F);
  std::size_t t = 0;
  for (std::int32_t j = 0; j < dims.n_b; ++j)
    for (std::int32_t i = 0; i < dims.n_a; ++i)
      for (std::int32_t f = 0; f < F; ++f)
        gamma[t++] = detail::compare_cells(
            schema[f].comparator, cell(file_a, i, col_a[f], schema[f].field),
            cell(file_b, j, col_b[f], schema[f].field));
  return ComparisonData(dims, std::move(levels), std::move(gamma));
}

namespace detail {

// Product over fields of m/u at the observed levels: the factor by which
// linking a pair multiplies its likelihood relative to leaving it unlinked.
inline double likelihood_ratio(const MUParams& mu,
                               std::span<const std::uint8_t> levels) {
  if (static_cast<std::int32_t>(levels.size()) != mu.num_fields())
    throw std::invalid_argument("likelihood_ratio: field count mismatch");
  double r = 1.0;
  for (std::size_t f = 0; f < levels.size(); ++f) {
    const std::size_t l = levels[f];
    if (l < 1 || l > mu.m()[f].size())
      throw std::invalid_argument("likelihood_ratio: level out of range");
    r *= mu.m()[f][l - 1] / mu.u()[f][l - 1];
  }
  return r;
}

// One Markov chain over (m, u, Z). Each sweep redraws m and u from their
// Dirichlet full conditionals, then rescans Z record by record in index
// order. Candidate A records are grouped by comparison pattern so a scan
// costs O(n_b * (n_b + patterns)) instead of O(n_b * n_a): within a pattern
// class every free candidate has the same full-conditional weight, so the
// class is drawn first and the member uniformly afterwards.
class GibbsChain {
 public:
  GibbsChain(const ComparisonData& data, const SamplerConfig& cfg)
      : data_(&data),
        cfg_(cfg),
        n_a_(data.dims().n_a),
        n_b_(data.dims().n_b),
        F_(data.num_fields()),
        rng_(cfg.seed) {
    validate_config(cfg_);
    build_patterns();
    total_counts_.resize(F_);
    for (std::int32_t f = 0; f < F_; ++f)
      total_counts_[f].assign(data_->levels()[f], 0);
    for (std::int32_t p = 0; p < num_patterns_; ++p) {
      const auto* lv = pattern_levels_.data() + static_cast<std::size_t>(p) * F_;
      for (std::int32_t f = 0; f < F_; ++f)
        total_counts_[f][lv[f] - 1] += pattern_uses_[p];
    }
    z_.assign(n_b_, -1);
    row_link_.assign(n_a_, -1);
    m_.resize(F_);
    u_.resize(F_);
    rho_.assign(num_patterns_, 1.0);
    group_of_pattern_.assign(num_patterns_, -1);
  }

  // Conjugate update: level counts among currently linked pairs plus the
  // all-ones prior give the m posterior; the complement against the totals
  // gives the u posterior. Field-ascending draw order, m before u.
  void draw_mu() {
    std::vector<std::vector<double>> alpha_m(F_), alpha_u(F_);
    for (std::int32_t f = 0; f < F_; ++f) {
      alpha_m[f].assign(data_->levels()[f], 1.0);
      alpha_u[f].resize(data_->levels()[f]);
      for (std::int32_t l = 0; l < data_->levels()[f]; ++l)
        alpha_u[f][l] = 1.0 + static_cast<double>(total_counts_[f][l]);
    }
    for (std::int32_t j = 0; j < n_b_; ++j) {
      if (z_[j] < 0) continue;
      const auto lv = data_->pair_levels(z_[j], j);
      for (std::int32_t f = 0; f < F_; ++f) {
        alpha_m[f][lv[f] - 1] += 1.0;
        alpha_u[f][lv[f] - 1] -= 1.0;
      }
    }
    for (std::int32_t f = 0; f < F_; ++f) m_[f] = rng_.dirichlet(alpha_m[f]);
    for (std::int32_t f = 0; f < F_; ++f) u_[f] = rng_.dirichlet(alpha_u[f]);
    for (std::int32_t p = 0; p < num_patterns_; ++p) {
      const auto* lv = pattern_levels_.data() + static_cast<std::size_t>(p) * F_;
      double r = 1.0;
      for (std::int32_t f = 0; f < F_; ++f) r *= m_[f][lv[f] - 1] / u_[f][lv[f] - 1];
      rho_[p] = r;
    }
  }

  void scan_z() {
    std::vector<double> weights;
    std::vector<std::int32_t> blocked;
    for (std::int32_t j = 0; j < n_b_; ++j) {
      if (z_[j] >= 0) {
        row_link_[z_[j]] = -1;
        z_[j] = -1;
        --n_links_;
      }
      if (n_links_ >= n_a_) continue;

      const auto& groups = groups_[j];
      const double n_minus = static_cast<double>(n_links_);
      const double prior_ratio =
          (cfg_.z_prior_alpha + n_minus) /
          ((cfg_.z_prior_beta + n_b_ - n_minus - 1.0) * (n_a_ - n_minus));

      blocked.assign(groups.size(), 0);
      for (std::size_t g = 0; g < groups.size(); ++g)
        group_of_pattern_[groups[g].pattern] = static_cast<std::int32_t>(g);
      for (std::int32_t jj = 0; jj < n_b_; ++jj)
        if (z_[jj] >= 0) {
          const std::int32_t p =
              pat_[static_cast<std::size_t>(j) * n_a_ + z_[jj]];
          ++blocked[group_of_pattern_[p]];
        }
      for (const auto& g : groups) group_of_pattern_[g.pattern] = -1;

      weights.assign(groups.size() + 1, 1.0);
      for (std::size_t g = 0; g < groups.size(); ++g) {
        const std::int32_t avail =
            static_cast<std::int32_t>(groups[g].members.size()) - blocked[g];
        weights[g + 1] = prior_ratio * rho_[groups[g].pattern] * avail;
      }

      const std::size_t pick = rng_.categorical(weights);
      if (pick == 0) continue;
      const auto& members = groups[pick - 1].members;
      std::int32_t i;
      do {
        i = members[rng_.uniform_below(members.size())];
      } while (row_link_[i] >= 0);
      z_[j] = i;
      row_link_[i] = j;
      ++n_links_;
    }
  }

  void step() {
    draw_mu();
    scan_z();
  }

  // Test hook: pin a link without running the chain.
  void force_link(std::int32_t j, std::int32_t i) {
    if (j < 0 || j >= n_b_ || i < 0 || i >= n_a_ || z_[j] >= 0 ||
        row_link_[i] >= 0)
      throw std::invalid_argument("force_link: slot already taken");
    z_[j] = i;
    row_link_[i] = j;
    ++n_links_;
  }

  std::int32_t z_of(std::int32_t j) const { return z_[j]; }
  std::int32_t num_links() const { return n_links_; }
  const std::vector<std::vector<double>>& m() const { return m_; }
  const std::vector<std::vector<double>>& u() const { return u_; }

  // Cross-checks the link vector against the reverse map before a draw is
  // recorded; a mismatch means the chain state is corrupt.
  void check_consistent() const {
    std::int32_t links = 0;
    for (std::int32_t j = 0; j < n_b_; ++j)
      if (z_[j] >= 0) {
        ++links;
        if (row_link_[z_[j]] != j)
          throw std::logic_error("gibbs_sample: inconsistent chain state");
      }
    for (std::int32_t i = 0; i < n_a_; ++i)
      if (row_link_[i] >= 0 && z_[row_link_[i]] != i)
        throw std::logic_error("gibbs_sample: inconsistent chain state");
    if (links != n_links_)
      throw std::logic_error("gibbs_sample: inconsistent chain state");
  }

  void append_state(std::vector<std::int32_t>& flat) const {
    for (std::int32_t j = 0; j < n_b_; ++j)
      flat.push_back(z_[j] >= 0 ? z_[j] : n_a_ + j);
  }

 private:
  struct Group {
    std::int32_t pattern;
    std::vector<std::int32_t> members;
  };

  void build_patterns() {
    std::map<std::vector<std::uint8_t>, std::int32_t> ids;
    pat_.resize(static_cast<std::size_t>(n_a_) * n_b_);
    std::vector<std::uint8_t> key(F_);
    for (std::int32_t j = 0; j < n_b_; ++j)
      for (std::int32_t i = 0; i < n_a_; ++i) {
        const auto lv = data_->pair_levels(i, j);
        key.assign(lv.begin(), lv.end());
        const auto [it, inserted] =
            ids.emplace(key, static_cast<std::int32_t>(ids.size()));
        if (inserted) {
          pattern_levels_.insert(pattern_levels_.end(), key.begin(), key.end());
          pattern_uses_.push_back(0);
        }
        pat_[static_cast<std::size_t>(j) * n_a_ + i] = it->second;
        ++pattern_uses_[it->second];
      }
    num_patterns_ = static_cast<std::int32_t>(ids.size());

    groups_.resize(n_b_);
    std::vector<std::int32_t> slot(num_patterns_, -1);
    for (std::int32_t j = 0; j < n_b_; ++j) {
      for (std::int32_t i = 0; i < n_a_; ++i) {
        const std::int32_t p = pat_[static_cast<std::size_t>(j) * n_a_ + i];
        if (slot[p] < 0) {
          slot[p] = static_cast<std::int32_t>(groups_[j].size());
          groups_[j].push_back({p, {}});
        }
        groups_[j][slot[p]].members.push_back(i);
      }
      for (const auto& g : groups_[j]) slot[g.pattern] = -1;
    }
  }

  const ComparisonData* data_;
  SamplerConfig cfg_;
  std::int32_t n_a_, n_b_, F_;
  Rng rng_;

  std::int32_t num_patterns_ = 0;
  std::vector<std::int32_t> pat_;
  std::vector<std::uint8_t> pattern_levels_;
  std::vector<std::int64_t> pattern_uses_;
  std::vector<std::vector<Group>> groups_;
  std::vector<std::vector<std::int64_t>> total_counts_;

  std::vector<std::int32_t> z_, row_link_;
  std::int32_t n_links_ = 0;
  std::vector<std::vector<double>> m_, u_;
  std::vector<double> rho_;
  std::vector<std::int32_t> group_of_pattern_;
};

}  // namespace detail

// Posterior simulation for the bipartite linkage model. The prior puts a
// beta-binomial(n_b, alpha, beta) weight on the number of links and is
// uniform across link patterns of equal count; fields are conditionally
// independent given Z with uniform Dirichlet priors on every m and u vector.
// The chain starts from the all-unlinked state, alternates the conjugate
// (m, u) draw with a sequential rescan of Z, drops burn_in sweeps and
// records the next `kept`. Output is bit-reproducible for a fixed seed.
inline PosteriorSamples gibbs_sample(const ComparisonData& data,
                                     const SamplerConfig& cfg) {
  detail::GibbsChain chain(data, cfg);
  for (std::int64_t it = 0; it < cfg.burn_in; ++it) chain.step();
  std::vector<std::int32_t> flat;
  flat.reserve(static_cast<std::size_t>(cfg.kept) * data.dims().n_b);
  for (std::int64_t it = 0; it < cfg.kept; ++it) {
    chain.step();
    chain.check_consistent();
    chain.append_state(flat);
  }
  return PosteriorSamples(data.dims(), std::move(flat),
                          static_cast<std::int32_t>(cfg.kept));
}

}  // namespace fslink
