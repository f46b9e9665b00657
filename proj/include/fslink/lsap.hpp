#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fslink/core.hpp"

namespace fslink {

// Sparse nonnegative pair scores over an n_a x n_b grid; absent pairs score 0.
// Entries are kept sorted by (i, j) and duplicates are rejected.
struct ScoreEntry {
  std::int32_t i = 0;
  std::int32_t j = 0;
  double score = 0.0;
};

class ScoreMatrix {
 public:
  explicit ScoreMatrix(ProblemDims dims, std::vector<ScoreEntry> entries = {})
      : dims_(dims), entries_(std::move(entries)) {
    validate_dims(dims_);
    for (const auto& e : entries_) {
      if (e.i < 0 || e.i >= dims_.n_a || e.j < 0 || e.j >= dims_.n_b)
        throw std::invalid_argument("ScoreMatrix: entry index out of range");
      if (!(e.score >= 0.0) || !std::isfinite(e.score))
        throw std::invalid_argument("ScoreMatrix: scores must be finite and >= 0");
    }
    std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    for (std::size_t t = 1; t < entries_.size(); ++t)
      if (entries_[t - 1].i == entries_[t].i && entries_[t - 1].j == entries_[t].j)
        throw std::invalid_argument("ScoreMatrix: duplicate (i, j) entry");
    for (const auto& e : entries_) max_score_ = std::max(max_score_, e.score);
  }

  const ProblemDims& dims() const { return dims_; }
  std::span<const ScoreEntry> entries() const { return entries_; }
  double max_score() const { return max_score_; }

  // Score of a pair; 0 when the pair is absent.
  double at(std::int32_t i, std::int32_t j) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{i, j},
                               [](const ScoreEntry& e, const std::pair<int, int>& key) {
                                 return e.i != key.first ? e.i < key.first
                                                         : e.j < key.second;
                               });
    if (it != entries_.end() && it->i == i && it->j == j) return it->score;
    return 0.0;
  }

 private:
  ProblemDims dims_;
  std::vector<ScoreEntry> entries_;
  double max_score_ = 0.0;
};

// Sum of the scores selected by a structure's links, added in ascending j
// order so totals are reproducible bit for bit.
inline double total_score(const ScoreMatrix& scores, const LinkageStructure& s) {
  if (!(scores.dims() == s.dims()))
    throw std::invalid_argument("total_score: dimension mismatch");
  double total = 0.0;
  for (std::int32_t j = 0; j < s.dims().n_b; ++j)
    if (s.is_linked(j)) total += scores.at(s.link_of(j), j);
  return total;
}

// A score matrix extended with n_b - k interchangeable dummy rows of value
// m_value. Solving the extended full assignment yields exactly k real links
// once m_value clears k times the largest score.
class AugmentedScoreMatrix {
 public:
  AugmentedScoreMatrix(ScoreMatrix base, std::int32_t k, double m_value)
      : base_(std::move(base)), k_(k), m_value_(m_value) {
    const auto& d = base_.dims();
    if (k_ < 1 || k_ > std::min(d.n_a, d.n_b))
      throw std::invalid_argument("AugmentedScoreMatrix: k outside 1..min(n_a, n_b)");
    if (!std::isfinite(m_value_) || !(m_value_ >= k_ * base_.max_score()))
      throw std::invalid_argument(
          "AugmentedScoreMatrix: dummy value below k * max score");
  }

  const ScoreMatrix& base() const { return base_; }
  std::int32_t k() const { return k_; }
  double m_value() const { return m_value_; }

 private:
  ScoreMatrix base_;
  std::int32_t k_;
  double m_value_;
};

enum class Objective { minimize, maximize };

struct AssignmentResult {
  std::vector<std::int32_t> row_of_col;  // assigned row per column
  double total = 0.0;                    // summed in column order
};

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LsapState {
  std::vector<std::int32_t> row_of_col;
  std::vector<std::int32_t> col_of_row;
  std::vector<double> u;  // column potentials
  std::vector<double> v;  // row potentials
};

// Dense min-cost assignment of k columns to distinct rows among n >= k,
// shortest augmenting path with dual potentials (Jonker-Volgenant style).
// T is the transposed cost block: T[c * n + r]. Non-finite entries are
// forbidden. Throws when some column cannot be assigned at finite cost.
inline LsapState lsap_min(const std::vector<double>& T, std::int32_t k,
                          std::int32_t n) {
  LsapState st;
  st.row_of_col.assign(k, -1);
  st.col_of_row.assign(n, -1);
  st.u.assign(k, 0.0);
  st.v.assign(n, 0.0);
  if (k == 0) return st;

  std::vector<double> shortest(n);
  std::vector<std::int32_t> pred(n);
  std::vector<char> done(n);
  std::vector<std::int32_t> visited_cols;

  for (std::int32_t cur = 0; cur < k; ++cur) {
    std::fill(shortest.begin(), shortest.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    visited_cols.clear();
    visited_cols.push_back(cur);

    double min_val = 0.0;
    std::int32_t c = cur;
    std::int32_t sink = -1;
    while (sink == -1) {
      const double* row = T.data() + static_cast<std::size_t>(c) * n;
      double lowest = kInf;
      std::int32_t low_r = -1;
      for (std::int32_t r = 0; r < n; ++r) {
        if (done[r]) continue;
        const double cost = row[r];
        if (std::isfinite(cost)) {
          const double red = min_val + cost - st.u[c] - st.v[r];
          if (red < shortest[r]) {
            shortest[r] = red;
            pred[r] = c;
          }
        }
        if (shortest[r] < lowest ||
            (shortest[r] == lowest && low_r != -1 && st.col_of_row[r] == -1 &&
             st.col_of_row[low_r] != -1)) {
          lowest = shortest[r];
          low_r = r;
        }
      }
      if (low_r == -1 || !std::isfinite(lowest))
        throw std::runtime_error("solve_assignment: no feasible full assignment");
      done[low_r] = 1;
      min_val = lowest;
      const std::int32_t owner = st.col_of_row[low_r];
      if (owner == -1) {
        sink = low_r;
      } else {
        c = owner;
        visited_cols.push_back(c);
      }
    }

    st.u[cur] += min_val;
    for (std::int32_t cv : visited_cols)
      if (cv != cur) st.u[cv] += min_val - shortest[st.row_of_col[cv]];
    for (std::int32_t r = 0; r < n; ++r)
      if (done[r]) st.v[r] -= min_val - shortest[r];

    std::int32_t r = sink;
    for (;;) {
      const std::int32_t c2 = pred[r];
      st.col_of_row[r] = c2;
      std::swap(st.row_of_col[c2], r);
      if (c2 == cur) break;
    }
  }
  return st;
}

}  // namespace detail

namespace detail {

// Tie refinement toward the lexicographically smallest link set. Works on
// the reduced augmented problem: columns 0..C-1 (ascending j), targets 0..S-1
// (real rows, ascending i) followed by S..S+D-1 (dummy rows). With the
// solver's optimal duals, complementary slackness characterizes the optima
// exactly: they are the column-perfect matchings that use only tight edges
// and keep every negatively priced target covered. Each column in turn is
// fixed to its most preferred such target (smaller real rows first, dummies
// last) for which the remaining columns can still finish a valid matching;
// every completion check is a small 0/1-cost assignment solve. Gives up when
// the tie structure or the work budget is exceeded; callers verify that the
// refined total matches the solver total exactly and otherwise keep the
// solver's assignment.
class TieRefiner {
 public:
  static constexpr std::size_t kMaxTightEdges = 8192;
  static constexpr std::size_t kStepBudget = 1u << 22;

  // T is the transposed (C x (S + D)) cost block used by lsap_min.
  TieRefiner(const std::vector<double>& T, std::int32_t C, std::int32_t S,
             std::int32_t D, const LsapState& st)
      : C_(C), n_(S + D) {
    double scale = 1.0;
    for (double x : T)
      if (std::isfinite(x)) scale = std::max(scale, std::fabs(x));
    const double tol = 1e-9 * scale;

    edges_.assign(C_, {});
    std::size_t total_edges = 0;
    for (std::int32_t c = 0; c < C_; ++c) {
      const double* row = T.data() + static_cast<std::size_t>(c) * n_;
      for (std::int32_t r = 0; r < n_; ++r)
        if (std::isfinite(row[r]) && row[r] - st.u[c] - st.v[r] <= tol) {
          edges_[c].push_back(r);
          ++total_edges;
        }
    }
    required_.assign(n_, 0);
    for (std::int32_t r = 0; r < n_; ++r)
      if (st.v[r] < -tol) required_[r] = 1;

    usable_ = total_edges <= kMaxTightEdges;
    if (!usable_) return;

    // Seed with the solver's own assignment; complementary slackness puts it
    // in the tight graph with everything mandatory covered. Bail out if
    // floating-point noise broke that.
    match_ = st.row_of_col;
    owner_.assign(n_, -1);
    for (std::int32_t c = 0; c < C_; ++c) {
      if (std::find(edges_[c].begin(), edges_[c].end(), match_[c]) ==
          edges_[c].end()) {
        usable_ = false;
        return;
      }
      owner_[match_[c]] = c;
    }
    for (std::int32_t r = 0; r < n_; ++r)
      if (required_[r] && owner_[r] == -1) usable_ = false;
  }

  // Returns the refined assignment (target per column) or false when
  // refinement was abandoned.
  bool refine(std::vector<std::int32_t>& out) {
    if (!usable_) return false;
    for (std::int32_t c = 0; c < C_; ++c) {
      for (std::int32_t cand : edges_[c]) {
        if (cand >= match_[c]) break;
        const std::int32_t o = owner_[cand];
        if (o != -1 && o < c) continue;  // taken by an already fixed column
        if (!charge(c)) return false;
        if (try_fix(c, cand)) break;
      }
    }
    out = match_;
    return true;
  }

 private:
  // One completion check costs roughly (columns after c) x targets.
  bool charge(std::int32_t c) {
    const std::size_t cost =
        static_cast<std::size_t>(C_ - c) * static_cast<std::size_t>(n_) + 1;
    if (budget_ < cost) return false;
    budget_ -= cost;
    return true;
  }

  // Can column c sit on cand while the columns after it still finish a
  // matching that covers every required target? If so, commit c -> cand and
  // adopt the completion found.
  bool try_fix(std::int32_t c, std::int32_t cand) {
    // Targets the suffix may use: not taken by columns before c, not cand.
    avail_.clear();
    slot_of_.assign(n_, -1);
    std::int32_t mandatory = 0;
    for (std::int32_t r = 0; r < n_; ++r) {
      if (r == cand) continue;
      if (owner_[r] != -1 && owner_[r] < c) continue;
      slot_of_[r] = static_cast<std::int32_t>(avail_.size());
      avail_.push_back(r);
      if (required_[r]) ++mandatory;
    }
    const std::int32_t rem = C_ - c - 1;
    if (mandatory > rem) return false;

    // 0/1 cost block: mandatory targets cost 0, the rest 1, non-tight cells
    // forbidden. All mandatory targets are covered exactly when the minimum
    // equals rem - mandatory.
    const auto A = static_cast<std::int32_t>(avail_.size());
    feas_.assign(static_cast<std::size_t>(rem) * A, kInf);
    for (std::int32_t cc = 0; cc < rem; ++cc)
      for (std::int32_t r : edges_[c + 1 + cc]) {
        const std::int32_t s = slot_of_[r];
        if (s >= 0)
          feas_[static_cast<std::size_t>(cc) * A + s] = required_[r] ? 0.0 : 1.0;
      }
    LsapState sol;
    try {
      sol = lsap_min(feas_, rem, A);
    } catch (const std::runtime_error&) {
      return false;
    }
    double total = 0.0;
    for (std::int32_t cc = 0; cc < rem; ++cc)
      total += feas_[static_cast<std::size_t>(cc) * A + sol.row_of_col[cc]];
    if (total != static_cast<double>(rem - mandatory)) return false;

    match_[c] = cand;
    for (std::int32_t cc = 0; cc < rem; ++cc)
      match_[c + 1 + cc] = avail_[sol.row_of_col[cc]];
    std::fill(owner_.begin(), owner_.end(), -1);
    for (std::int32_t col = 0; col < C_; ++col) owner_[match_[col]] = col;
    return true;
  }

  std::int32_t C_, n_;
  std::vector<std::vector<std::int32_t>> edges_;
  std::vector<char> required_;
  std::vector<std::int32_t> match_;
  std::vector<std::int32_t> owner_;
  std::vector<std::int32_t> avail_;
  std::vector<std::int32_t> slot_of_;
  std::vector<double> feas_;
  std::size_t budget_ = kStepBudget;
  bool usable_ = false;
};

}  // namespace detail

// Assigns every column of a dense rows x cols matrix (row-major) to a
// distinct row. Requires rows >= cols. Non-finite cells are forbidden pairs.
inline AssignmentResult solve_assignment(const std::vector<double>& costs,
                                         std::int32_t rows, std::int32_t cols,
                                         Objective objective = Objective::minimize) {
  if (rows < 0 || cols < 0 || rows < cols)
    throw std::invalid_argument("solve_assignment: need rows >= cols >= 0");
  if (costs.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw std::invalid_argument("solve_assignment: matrix size mismatch");

  std::vector<double> T(static_cast<std::size_t>(cols) * rows);
  for (std::int32_t c = 0; c < cols; ++c)
    for (std::int32_t r = 0; r < rows; ++r) {
      const double x = costs[static_cast<std::size_t>(r) * cols + c];
      double y = detail::kInf;
      if (std::isfinite(x)) y = objective == Objective::minimize ? x : -x;
      T[static_cast<std::size_t>(c) * rows + r] = y;
    }
  const auto st = detail::lsap_min(T, cols, rows);

  AssignmentResult out;
  out.row_of_col = st.row_of_col;
  detail::TieRefiner refiner(T, cols, rows, 0, st);
  std::vector<std::int32_t> refined;
  if (refiner.refine(refined)) {
    double before = 0.0, after = 0.0;
    for (std::int32_t c = 0; c < cols; ++c) {
      before += T[static_cast<std::size_t>(c) * rows + st.row_of_col[c]];
      after += T[static_cast<std::size_t>(c) * rows + refined[c]];
    }
    if (after == before) out.row_of_col = std::move(refined);
  }
  for (std::int32_t c = 0; c < cols; ++c)
    out.total += costs[static_cast<std::size_t>(out.row_of_col[c]) * cols + c];
  return out;
}

// Highest-total structure with exactly k links. The instance is reduced to
// rows and columns that carry entries (padded with the smallest unused
// indices when fewer than k), extended with n_b' - k dummy rows, and solved
// as a full assignment; ties go to the lexicographically smallest link set
// when the tie structure is small enough, otherwise to the solver's
// deterministic order.
inline LinkageStructure solve_k_cardinality(const AugmentedScoreMatrix& aug) {
  const ScoreMatrix& scores = aug.base();
  const ProblemDims& dims = scores.dims();
  const std::int32_t k = aug.k();
  const double m = aug.m_value();

  // Reduced row/column index sets, ascending. Zero entries carry no support:
  // they are indistinguishable from absent pairs.
  std::vector<std::int32_t> rows, cols;
  for (const auto& e : scores.entries())
    if (e.score > 0.0) {
      rows.push_back(e.i);
      cols.push_back(e.j);
    }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  auto pad = [](std::vector<std::int32_t>& idx, std::int32_t want, std::int32_t bound) {
    std::vector<char> used(static_cast<std::size_t>(bound), 0);
    for (std::int32_t x : idx) used[x] = 1;
    for (std::int32_t x = 0; x < bound && static_cast<std::int32_t>(idx.size()) < want;
         ++x)
      if (!used[x]) idx.push_back(x);
    std::sort(idx.begin(), idx.end());
  };
  pad(rows, k, dims.n_a);
  pad(cols, k, dims.n_b);

  const auto S = static_cast<std::int32_t>(rows.size());
  const auto C = static_cast<std::int32_t>(cols.size());
  const std::int32_t D = C - k;
  const std::int32_t n = S + D;

  // Transposed cost block on negated scores; dummy targets cost -m.
  std::vector<double> T(static_cast<std::size_t>(C) * n, 0.0);
  for (std::int32_t c = 0; c < C; ++c)
    for (std::int32_t r = S; r < n; ++r) T[static_cast<std::size_t>(c) * n + r] = -m;
  for (const auto& e : scores.entries()) {
    if (e.score <= 0.0) continue;
    const auto r = static_cast<std::int32_t>(
        std::lower_bound(rows.begin(), rows.end(), e.i) - rows.begin());
    const auto c = static_cast<std::int32_t>(
        std::lower_bound(cols.begin(), cols.end(), e.j) - cols.begin());
    T[static_cast<std::size_t>(c) * n + r] = -e.score;
  }

  const auto st = detail::lsap_min(T, C, n);

  std::vector<std::int32_t> chosen = st.row_of_col;

  detail::TieRefiner refiner(T, C, S, D, st);
  std::vector<std::int32_t> refined;
  if (refiner.refine(refined)) {
    double before = 0.0, after = 0.0;
    for (std::int32_t c = 0; c < C; ++c) {
      before += T[static_cast<std::size_t>(c) * n + chosen[c]];
      after += T[static_cast<std::size_t>(c) * n + refined[c]];
    }
    if (after == before) chosen = std::move(refined);
  }

  // With m tied to k * max score, equal-value swaps between a real link and a
  // dummy slot can leave extra links; push the largest-j ones back out.
  std::int32_t real_links = 0;
  for (std::int32_t c = 0; c < C; ++c)
    if (chosen[c] < S) ++real_links;
  for (std::int32_t c = C - 1; c >= 0 && real_links > k; --c) {
    if (chosen[c] >= S) continue;
    if (T[static_cast<std::size_t>(c) * n + chosen[c]] == -m) {
      chosen[c] = n;
      --real_links;
    }
  }
  if (real_links != k)
    throw std::logic_error("solve_k_cardinality: dummy augmentation failed");

  std::vector<std::int32_t> z(dims.n_b);
  for (std::int32_t j = 0; j < dims.n_b; ++j) z[j] = dims.n_a + j;
  for (std::int32_t c = 0; c < C; ++c)
    if (chosen[c] < S) z[cols[c]] = rows[chosen[c]];
  return LinkageStructure(dims, std::move(z));
}

// Convenience overload; uses the smallest safe dummy value k * max + 1.
inline LinkageStructure solve_k_cardinality(const ScoreMatrix& scores,
                                            std::int32_t k) {
  const auto& d = scores.dims();
  if (k < 0 || k > std::min(d.n_a, d.n_b))
    throw std::invalid_argument("solve_k_cardinality: k outside 0..min(n_a, n_b)");
  if (k == 0) return LinkageStructure::all_unlinked(d);
  return solve_k_cardinality(
      AugmentedScoreMatrix(scores, k, k * scores.max_score() + 1.0));
}

}  // namespace fslink
