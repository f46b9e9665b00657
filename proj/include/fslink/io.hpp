#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fslink/core.hpp"
#include "fslink/model.hpp"
#include "fslink/weights.hpp"

// Delimited text formats, all with a `# fslink <kind> key=value...` metadata
// line followed by a column-header row. Indices are one-based on disk; an
// estimate row uses i = 0 for "unlinked". Loaders validate every structural
// invariant and point at the offending line.

namespace fslink {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::int64_t line, const std::string& msg)
      : std::runtime_error(line > 0
                               ? file + ":" + std::to_string(line) + ": " + msg
                               : file + ": " + msg) {}
};

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::int64_t parse_int(const std::string& token, const std::string& file,
                              std::int64_t line) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(token, &pos);
    if (pos != token.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError(file, line, "expected an integer, got '" + token + "'");
  }
}

inline double parse_double(const std::string& token, const std::string& file,
                           std::int64_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(token, &pos);
    if (pos != token.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError(file, line, "expected a number, got '" + token + "'");
  }
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Reads all lines; strips a trailing carriage return so CRLF files load.
inline std::vector<std::string> read_lines(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ParseError(file, 0, "cannot open for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

struct Meta {
  std::unordered_map<std::string, std::string> kv;
  std::int64_t value(const std::string& key, const std::string& file) const {
    const auto it = kv.find(key);
    if (it == kv.end())
      throw ParseError(file, 1, "metadata is missing '" + key + "'");
    return parse_int(it->second, file, 1);
  }
};

inline Meta parse_meta(const std::vector<std::string>& lines,
                       const std::string& kind, const std::string& file) {
  if (lines.empty()) throw ParseError(file, 1, "empty file");
  const auto tokens = split(lines[0], ' ');
  if (tokens.size() < 3 || tokens[0] != "#" || tokens[1] != "fslink" ||
      tokens[2] != kind)
    throw ParseError(file, 1, "expected '# fslink " + kind + " ...'");
  Meta meta;
  for (std::size_t t = 3; t < tokens.size(); ++t) {
    const std::size_t eq = tokens[t].find('=');
    if (eq == std::string::npos)
      throw ParseError(file, 1, "malformed metadata token '" + tokens[t] + "'");
    meta.kv[tokens[t].substr(0, eq)] = tokens[t].substr(eq + 1);
  }
  return meta;
}

inline void expect_header(const std::vector<std::string>& lines,
                          const std::string& expected, const std::string& file) {
  if (lines.size() < 2 || lines[1] != expected)
    throw ParseError(file, 2, "expected header '" + expected + "'");
}

class Writer {
 public:
  explicit Writer(const std::string& file) : file_(file), out_(file) {
    if (!out_) throw ParseError(file, 0, "cannot open for writing");
  }
  template <typename T>
  Writer& operator<<(const T& v) {
    out_ << v;
    return *this;
  }
  void finish() {
    out_.flush();
    if (!out_) throw ParseError(file_, 0, "write failed");
  }

 private:
  std::string file_;
  std::ofstream out_;
};

}  // namespace detail

inline void save_posterior(const std::string& file,
                           const PosteriorSamples& samples) {
  detail::Writer out(file);
  const auto& d = samples.dims();
  out << "# fslink posterior n_a=" << d.n_a << " n_b=" << d.n_b
      << " L=" << samples.num_samples() << "\n";
  out << "sample,j,i\n";
  for (std::int32_t s = 0; s < samples.num_samples(); ++s)
    for (std::int32_t j = 0; j < d.n_b; ++j) {
      const std::int32_t z = samples.z(j, s);
      if (z < d.n_a)
        out << (s + 1) << "," << (j + 1) << "," << (z + 1) << "\n";
    }
  out.finish();
}

inline PosteriorSamples load_posterior(const std::string& file) {
  const auto lines = detail::read_lines(file);
  const auto meta = detail::parse_meta(lines, "posterior", file);
  detail::expect_header(lines, "sample,j,i", file);
  const std::int64_t n_a = meta.value("n_a", file);
  const std::int64_t n_b = meta.value("n_b", file);
  const std::int64_t L = meta.value("L", file);
  if (n_a < 0 || n_b < 0 || L < 1)
    throw ParseError(file, 1, "invalid dimensions in metadata");

  const ProblemDims dims{static_cast<std::int32_t>(n_a),
                         static_cast<std::int32_t>(n_b)};
  std::vector<std::int32_t> flat(static_cast<std::size_t>(n_b) * L);
  for (std::int64_t s = 0; s < L; ++s)
    for (std::int64_t j = 0; j < n_b; ++j)
      flat[s * n_b + j] = static_cast<std::int32_t>(n_a + j);

  std::unordered_set<std::int64_t> linked_rows;
  for (std::size_t t = 2; t < lines.size(); ++t) {
    const std::int64_t line = static_cast<std::int64_t>(t) + 1;
    if (lines[t].empty()) continue;
    const auto cols = detail::split(lines[t], ',');
    if (cols.size() != 3)
      throw ParseError(file, line, "expected 3 columns");
    const std::int64_t s = detail::parse_int(cols[0], file, line);
    const std::int64_t j = detail::parse_int(cols[1], file, line);
    const std::int64_t i = detail::parse_int(cols[2], file, line);
    if (s < 1 || s > L) throw ParseError(file, line, "sample out of range");
    if (j < 1 || j > n_b) throw ParseError(file, line, "j out of range");
    if (i < 1 || i > n_a) throw ParseError(file, line, "i out of range");
    auto& slot = flat[(s - 1) * n_b + (j - 1)];
    if (slot < n_a)
      throw ParseError(file, line, "record j listed twice in one sample");
    if (!linked_rows.insert((s - 1) * n_a + (i - 1)).second)
      throw ParseError(file, line,
                       "two records share an A record in one sample");
    slot = static_cast<std::int32_t>(i - 1);
  }
  try {
    return PosteriorSamples(dims, std::move(flat), static_cast<std::int32_t>(L));
  } catch (const std::invalid_argument& e) {
    throw ParseError(file, 0, e.what());
  }
}

inline void save_probabilities(const std::string& file,
                               const PairProbabilities& probs) {
  detail::Writer out(file);
  const auto& d = probs.dims();
  out << "# fslink probabilities n_a=" << d.n_a << " n_b=" << d.n_b << "\n";
  out << "i,j,p\n";
  for (const auto& e : probs.entries())
    out << (e.i + 1) << "," << (e.j + 1) << ","
        << detail::format_double(e.p) << "\n";
  out.finish();
}

inline PairProbabilities load_probabilities(const std::string& file) {
  const auto lines = detail::read_lines(file);
  const auto meta = detail::parse_meta(lines, "probabilities", file);
  detail::expect_header(lines, "i,j,p", file);
  const std::int64_t n_a = meta.value("n_a", file);
  const std::int64_t n_b = meta.value("n_b", file);
  if (n_a < 0 || n_b < 0)
    throw ParseError(file, 1, "invalid dimensions in metadata");

  std::vector<PairProbabilities::Entry> entries;
  std::unordered_set<std::int64_t> seen;
  for (std::size_t t = 2; t < lines.size(); ++t) {
    const std::int64_t line = static_cast<std::int64_t>(t) + 1;
    if (lines[t].empty()) continue;
    const auto cols = detail::split(lines[t], ',');
    if (cols.size() != 3)
      throw ParseError(file, line, "expected 3 columns");
    const std::int64_t i = detail::parse_int(cols[0], file, line);
    const std::int64_t j = detail::parse_int(cols[1], file, line);
    const double p = detail::parse_double(cols[2], file, line);
    if (i < 1 || i > n_a) throw ParseError(file, line, "i out of range");
    if (j < 1 || j > n_b) throw ParseError(file, line, "j out of range");
    if (!(p >= 0.0 && p <= 1.0))
      throw ParseError(file, line, "probability outside [0, 1]");
    if (!seen.insert((j - 1) * n_a + (i - 1)).second)
      throw ParseError(file, line, "duplicate pair");
    entries.push_back({static_cast<std::int32_t>(i - 1),
                       static_cast<std::int32_t>(j - 1), p});
  }
  return PairProbabilities(ProblemDims{static_cast<std::int32_t>(n_a),
                                       static_cast<std::int32_t>(n_b)},
                           std::move(entries));
}

inline void save_comparisons(const std::string& file,
                             const ComparisonData& data) {
  detail::Writer out(file);
  const auto& d = data.dims();
  out << "# fslink comparisons n_a=" << d.n_a << " n_b=" << d.n_b
      << " levels=";
  for (std::int32_t f = 0; f < data.num_fields(); ++f)
    out << (f ? "," : "") << data.levels()[f];
  out << "\n";
  out << "i,j";
  for (std::int32_t f = 0; f < data.num_fields(); ++f)
    out << ",gamma_" << (f + 1);
  out << "\n";
  for (std::int32_t j = 0; j < d.n_b; ++j)
    for (std::int32_t i = 0; i < d.n_a; ++i) {
      out << (i + 1) << "," << (j + 1);
      for (std::int32_t f = 0; f < data.num_fields(); ++f)
        out << "," << static_cast<int>(data.level(i, j, f));
      out << "\n";
    }
  out.finish();
}

inline ComparisonData load_comparisons(const std::string& file) {
  const auto lines = detail::read_lines(file);
  const auto meta = detail::parse_meta(lines, "comparisons", file);
  const std::int64_t n_a = meta.value("n_a", file);
  const std::int64_t n_b = meta.value("n_b", file);
  if (n_a < 0 || n_b < 0)
    throw ParseError(file, 1, "invalid dimensions in metadata");
  const auto it = meta.kv.find("levels");
  if (it == meta.kv.end())
    throw ParseError(file, 1, "metadata is missing 'levels'");
  std::vector<std::int32_t> levels;
  for (const auto& token : detail::split(it->second, ','))
    levels.push_back(
        static_cast<std::int32_t>(detail::parse_int(token, file, 1)));
  const std::int64_t F = static_cast<std::int64_t>(levels.size());

  std::string header = "i,j";
  for (std::int64_t f = 0; f < F; ++f)
    header += ",gamma_" + std::to_string(f + 1);
  detail::expect_header(lines, header, file);

  std::vector<std::uint8_t> gamma(static_cast<std::size_t>(n_a) * n_b * F, 0);
  std::vector<bool> seen(static_cast<std::size_t>(n_a) * n_b, false);
  for (std::size_t t = 2; t < lines.size(); ++t) {
    const std::int64_t line = static_cast<std::int64_t>(t) + 1;
    if (lines[t].empty()) continue;
    const auto cols = detail::split(lines[t], ',');
    if (cols.size() != static_cast<std::size_t>(2 + F))
      throw ParseError(file, line, "wrong column count");
    const std::int64_t i = detail::parse_int(cols[0], file, line);
    const std::int64_t j = detail::parse_int(cols[1], file, line);
    if (i < 1 || i > n_a) throw ParseError(file, line, "i out of range");
    if (j < 1 || j > n_b) throw ParseError(file, line, "j out of range");
    const std::size_t pair = static_cast<std::size_t>(j - 1) * n_a + (i - 1);
    if (seen[pair]) throw ParseError(file, line, "duplicate pair");
    seen[pair] = true;
    for (std::int64_t f = 0; f < F; ++f) {
      const std::int64_t level = detail::parse_int(cols[2 + f], file, line);
      if (level < 1 || level > levels[f])
        throw ParseError(file, line, "level outside the field's range");
      gamma[pair * F + f] = static_cast<std::uint8_t>(level);
    }
  }
  for (std::size_t pair = 0; pair < seen.size(); ++pair)
    if (!seen[pair]) throw ParseError(file, 0, "missing pair rows");
  try {
    return ComparisonData(ProblemDims{static_cast<std::int32_t>(n_a),
                                      static_cast<std::int32_t>(n_b)},
                          std::move(levels), std::move(gamma));
  } catch (const std::invalid_argument& e) {
    throw ParseError(file, 0, e.what());
  }
}

inline void save_estimate(const std::string& file,
                          const LinkageStructure& est) {
  detail::Writer out(file);
  const auto& d = est.dims();
  out << "# fslink estimate n_a=" << d.n_a << " n_b=" << d.n_b << "\n";
  out << "j,i\n";
  for (std::int32_t j = 0; j < d.n_b; ++j)
    out << (j + 1) << "," << (est.is_linked(j) ? est.link_of(j) + 1 : 0)
        << "\n";
  out.finish();
}

inline LinkageStructure load_estimate(const std::string& file) {
  const auto lines = detail::read_lines(file);
  const auto meta = detail::parse_meta(lines, "estimate", file);
  detail::expect_header(lines, "j,i", file);
  const std::int64_t n_a = meta.value("n_a", file);
  const std::int64_t n_b = meta.value("n_b", file);
  if (n_a < 0 || n_b < 0)
    throw ParseError(file, 1, "invalid dimensions in metadata");

  std::vector<std::int32_t> z(n_b, -1);
  std::unordered_set<std::int64_t> used;
  for (std::size_t t = 2; t < lines.size(); ++t) {
    const std::int64_t line = static_cast<std::int64_t>(t) + 1;
    if (lines[t].empty()) continue;
    const auto cols = detail::split(lines[t], ',');
    if (cols.size() != 2) throw ParseError(file, line, "expected 2 columns");
    const std::int64_t j = detail::parse_int(cols[0], file, line);
    const std::int64_t i = detail::parse_int(cols[1], file, line);
    if (j < 1 || j > n_b) throw ParseError(file, line, "j out of range");
    if (i < 0 || i > n_a) throw ParseError(file, line, "i out of range");
    if (z[j - 1] != -1) throw ParseError(file, line, "record j listed twice");
    if (i > 0 && !used.insert(i).second)
      throw ParseError(file, line, "two records share an A record");
    z[j - 1] = static_cast<std::int32_t>(
        i == 0 ? n_a + (j - 1) : i - 1);
  }
  for (std::int64_t j = 0; j < n_b; ++j)
    if (z[j] == -1) throw ParseError(file, 0, "missing row for some j");
  return LinkageStructure(ProblemDims{static_cast<std::int32_t>(n_a),
                                      static_cast<std::int32_t>(n_b)},
                          std::move(z));
}

// Plain CSV with a header row of field names; all cells kept as text.
// Quoting is not supported: cells must not contain commas or newlines.
inline RecordTable load_records(const std::string& file) {
  const auto lines = detail::read_lines(file);
  if (lines.empty() || lines[0].empty())
    throw ParseError(file, 1, "missing header row");
  RecordTable table;
  table.fields = detail::split(lines[0], ',');
  for (std::size_t t = 1; t < lines.size(); ++t) {
    if (lines[t].empty()) continue;
    auto cells = detail::split(lines[t], ',');
    if (cells.size() != table.fields.size())
      throw ParseError(file, static_cast<std::int64_t>(t) + 1,
                       "wrong column count");
    table.rows.push_back(std::move(cells));
  }
  return table;
}

}  // namespace fslink
