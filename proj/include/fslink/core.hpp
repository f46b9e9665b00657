#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fslink {

// Sizes of the two files being linked. File A records are indexed 0..n_a-1
// and play the row role; file B records are indexed 0..n_b-1 and carry the
// link vector.
struct ProblemDims {
  std::int32_t n_a = 0;
  std::int32_t n_b = 0;

  friend bool operator==(const ProblemDims&, const ProblemDims&) = default;
};

inline void validate_dims(const ProblemDims& d) {
  if (d.n_a < 0 || d.n_b < 0)
    throw std::invalid_argument("ProblemDims: file sizes must be nonnegative");
}

// One bipartite linkage between the files. Entry j of the link vector is
// either an A index in [0, n_a) or the sentinel n_a + j meaning record j of B
// is unlinked. No two B records may share an A record.
class LinkageStructure {
 public:
  LinkageStructure(ProblemDims dims, std::vector<std::int32_t> z)
      : dims_(dims), z_(std::move(z)) {
    validate_dims(dims_);
    if (static_cast<std::int32_t>(z_.size()) != dims_.n_b)
      throw std::invalid_argument("LinkageStructure: link vector length != n_b");
    num_links_ = 0;
    for (std::int32_t j = 0; j < dims_.n_b; ++j) {
      const std::int32_t zj = z_[j];
      if (zj >= 0 && zj < dims_.n_a) {
        ++num_links_;
      } else if (zj != dims_.n_a + j) {
        throw std::invalid_argument(
            "LinkageStructure: entry must be an A index or its own sentinel");
      }
    }
    std::vector<std::int32_t> linked;
    linked.reserve(num_links_);
    for (std::int32_t zj : z_)
      if (zj < dims_.n_a) linked.push_back(zj);
    std::sort(linked.begin(), linked.end());
    if (std::adjacent_find(linked.begin(), linked.end()) != linked.end())
      throw std::invalid_argument("LinkageStructure: duplicate link to an A record");
  }

  static LinkageStructure all_unlinked(ProblemDims dims) {
    validate_dims(dims);
    std::vector<std::int32_t> z(dims.n_b);
    for (std::int32_t j = 0; j < dims.n_b; ++j) z[j] = dims.n_a + j;
    return LinkageStructure(dims, std::move(z));
  }

  // Builds from explicit (i, j) link pairs; unnamed B records stay unlinked.
  static LinkageStructure from_links(
      ProblemDims dims, std::span<const std::pair<std::int32_t, std::int32_t>> links) {
    validate_dims(dims);
    std::vector<std::int32_t> z(dims.n_b);
    for (std::int32_t j = 0; j < dims.n_b; ++j) z[j] = dims.n_a + j;
    for (const auto& [i, j] : links) {
      if (j < 0 || j >= dims.n_b)
        throw std::invalid_argument("from_links: B index out of range");
      if (z[j] != dims.n_a + j)
        throw std::invalid_argument("from_links: duplicate B record");
      z[j] = i;
    }
    return LinkageStructure(dims, std::move(z));
  }

  const ProblemDims& dims() const { return dims_; }
  std::span<const std::int32_t> z() const { return z_; }
  bool is_linked(std::int32_t j) const { return z_[j] < dims_.n_a; }
  std::int32_t link_of(std::int32_t j) const { return z_[j]; }
  std::int32_t num_links() const { return num_links_; }

  // Linked (i, j) pairs in ascending j order.
  std::vector<std::pair<std::int32_t, std::int32_t>> links() const {
    std::vector<std::pair<std::int32_t, std::int32_t>> out;
    out.reserve(num_links_);
    for (std::int32_t j = 0; j < dims_.n_b; ++j)
      if (z_[j] < dims_.n_a) out.emplace_back(z_[j], j);
    return out;
  }

  friend bool operator==(const LinkageStructure&, const LinkageStructure&) = default;

 private:
  ProblemDims dims_;
  std::vector<std::int32_t> z_;
  std::int32_t num_links_ = 0;
};

// Weight beta of the F-score; beta = 1 is the balanced score, beta < 1 leans
// toward precision, beta > 1 toward recall.
class FScoreConfig {
 public:
  FScoreConfig() = default;
  explicit FScoreConfig(double beta) : beta_(beta) {
    if (!(beta > 0.0))
      throw std::invalid_argument("FScoreConfig: beta must be positive");
  }
  double beta() const { return beta_; }
  double beta_sq() const { return beta_ * beta_; }

 private:
  double beta_ = 1.0;
};

namespace detail {

inline void require_same_dims(const LinkageStructure& a, const LinkageStructure& b,
                              const char* who) {
  if (!(a.dims() == b.dims()))
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

inline std::int64_t true_positives(const LinkageStructure& estimate,
                                   const LinkageStructure& truth) {
  std::int64_t tp = 0;
  const auto ez = estimate.z();
  const auto tz = truth.z();
  const std::int32_t n_a = estimate.dims().n_a;
  for (std::size_t j = 0; j < ez.size(); ++j)
    if (ez[j] < n_a && ez[j] == tz[j]) ++tp;
  return tp;
}

}  // namespace detail

// F-score of an estimated linkage against the truth. Both sides empty counts
// as a perfect score.
inline double f_score(const LinkageStructure& estimate, const LinkageStructure& truth,
                      const FScoreConfig& cfg = {}) {
  detail::require_same_dims(estimate, truth, "f_score");
  const double b2 = cfg.beta_sq();
  const double denom = b2 * truth.num_links() + estimate.num_links();
  if (denom == 0.0) return 1.0;
  return (1.0 + b2) * static_cast<double>(detail::true_positives(estimate, truth)) /
         denom;
}

struct PrecisionRecall {
  double precision = 1.0;
  double recall = 1.0;
};

// Precision and recall with the convention that an empty denominator gives 1.
inline PrecisionRecall precision_recall(const LinkageStructure& estimate,
                                        const LinkageStructure& truth) {
  detail::require_same_dims(estimate, truth, "precision_recall");
  const auto tp = static_cast<double>(detail::true_positives(estimate, truth));
  PrecisionRecall out;
  if (estimate.num_links() > 0) out.precision = tp / estimate.num_links();
  if (truth.num_links() > 0) out.recall = tp / truth.num_links();
  return out;
}

// Number of cross-file links in the structure.
inline std::int32_t overlap_size(const LinkageStructure& s) { return s.num_links(); }

// Number of distinct entities implied: n_a + n_b minus the overlap.
inline std::int64_t population_size(const LinkageStructure& s) {
  return static_cast<std::int64_t>(s.dims().n_a) + s.dims().n_b - s.num_links();
}

}  // namespace fslink
