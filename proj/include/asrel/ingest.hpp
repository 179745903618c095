#pragma once

// Path snapshot ingestion: parsing, prepending/AS-set cleanup, persistency,
// stable path extraction and the degree-valley audit.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "asrel/detail/random.hpp"
#include "asrel/types.hpp"

namespace asrel {

struct Snapshot {
  std::string label;
  std::set<AsPath> paths;
  std::size_t skipped = 0;  // comment, blank, AS-set, looped or short lines
};

struct StablePathSet {
  std::set<AsPath> paths;
  std::size_t source_count = 0;
};

/// True when the path is at least two hops long with no repeated ASN.
inline bool is_valid_path(const AsPath& p) {
  if (p.size() < 2) return false;
  std::vector<Asn> sorted(p);
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

/// Collapses runs of equal consecutive ASNs (prepending).
inline AsPath collapse_prepending(AsPath p) {
  p.erase(std::unique(p.begin(), p.end()), p.end());
  return p;
}

namespace detail {

inline Asn parse_asn(std::string_view tok, std::size_t line_no) {
  std::uint64_t v = 0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (tok.empty() || ec != std::errc{} || ptr != last || tok.front() == '+' || tok.front() == '-')
    throw ParseError("invalid AS number '" + std::string(tok) + "'", line_no);
  if (v == 0 || v > 0xFFFFFFFFull)
    throw ParseError("AS number out of range '" + std::string(tok) + "'", line_no);
  return static_cast<Asn>(v);
}

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

}  // namespace detail

/// Parses one path line. Returns nullopt for lines that are skipped: comments,
/// blanks, paths containing an AS-set, and paths that loop or are shorter than
/// two hops after prepending is collapsed. Throws ParseError on a bad token.
inline std::optional<AsPath> parse_path_line(std::string_view line, std::size_t line_no = 0) {
  std::size_t i = 0;
  while (i < line.size() && detail::is_space(line[i])) ++i;
  if (i == line.size() || line[i] == '#') return std::nullopt;

  AsPath hops;
  bool has_as_set = false;
  while (i < line.size()) {
    if (detail::is_space(line[i])) {
      ++i;
      continue;
    }
    if (line[i] == '{') {
      auto close = line.find('}', i);
      if (close == std::string_view::npos) throw ParseError("unterminated AS-set", line_no);
      has_as_set = true;
      i = close + 1;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && !detail::is_space(line[j]) && line[j] != '{') ++j;
    hops.push_back(detail::parse_asn(line.substr(i, j - i), line_no));
    i = j;
  }
  if (has_as_set) return std::nullopt;
  hops = collapse_prepending(std::move(hops));
  if (!is_valid_path(hops)) return std::nullopt;
  return hops;
}

inline Snapshot read_snapshot(std::istream& in, std::string label) {
  Snapshot snap;
  snap.label = std::move(label);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto p = parse_path_line(line, line_no))
      snap.paths.insert(std::move(*p));
    else
      ++snap.skipped;
  }
  return snap;
}

/// Loads a path file; the label is the file name.
inline Snapshot load_snapshot(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open path file " + file.string());
  try {
    return read_snapshot(in, file.filename().string());
  } catch (const ParseError& e) {
    throw ParseError(file.string() + ": " + e.what(), e.line());
  }
}

inline void write_paths(std::ostream& out, const std::set<AsPath>& paths) {
  for (const auto& p : paths) {
    for (std::size_t k = 0; k < p.size(); ++k) out << (k ? " " : "") << p[k];
    out << '\n';
  }
}

/// Number of snapshots containing each path of the union.
inline std::map<AsPath, std::size_t> persistency(const std::vector<Snapshot>& snapshots) {
  std::map<AsPath, std::size_t> count;
  for (const auto& s : snapshots)
    for (const auto& p : s.paths) ++count[p];
  return count;
}

/// (persistency, number of paths with that persistency), ascending.
inline std::vector<std::pair<std::size_t, std::size_t>> persistency_distribution(
    const std::map<AsPath, std::size_t>& counts) {
  std::map<std::size_t, std::size_t> hist;
  for (const auto& [p, c] : counts) ++hist[c];
  return {hist.begin(), hist.end()};
}

/// Paths present in at least `min_persistency` snapshots; 0 means all of them.
inline StablePathSet stable_paths(const std::vector<Snapshot>& snapshots, std::size_t min_persistency = 0) {
  if (snapshots.empty()) throw std::invalid_argument("stable_paths: no snapshots");
  const std::size_t need = min_persistency == 0 ? snapshots.size() : std::min(min_persistency, snapshots.size());
  StablePathSet out;
  out.source_count = snapshots.size();
  for (const auto& [p, c] : persistency(snapshots))
    if (c >= need) out.paths.insert(p);
  return out;
}

/// Paths of the union that miss the stable cut.
inline std::set<AsPath> unstable_paths(const std::vector<Snapshot>& snapshots, std::size_t min_persistency = 0) {
  if (snapshots.empty()) throw std::invalid_argument("unstable_paths: no snapshots");
  const std::size_t need = min_persistency == 0 ? snapshots.size() : std::min(min_persistency, snapshots.size());
  std::set<AsPath> out;
  for (const auto& [p, c] : persistency(snapshots))
    if (c < need) out.insert(p);
  return out;
}

struct ValleyCounts {
  double unique = 0.0;  // distinct A-B-C triples
  double total = 0.0;   // all occurrences
};

namespace detail {

using Valley = std::tuple<Asn, Asn, Asn>;

template <class PathRange>
ValleyCounts count_valleys(const PathRange& paths, const DegreeMap& degrees, std::size_t w) {
  std::set<Valley> unique;
  std::size_t total = 0;
  for (const AsPath& p : paths) {
    for (std::size_t k = 1; k + 1 < p.size(); ++k) {
      const auto da = degrees.at(p[k - 1]);
      const auto db = degrees.at(p[k]);
      const auto dc = degrees.at(p[k + 1]);
      if (da > db + w && dc > db + w) {
        ++total;
        // A-B-C and C-B-A are the same valley
        unique.emplace(std::min(p[k - 1], p[k + 1]), p[k], std::max(p[k - 1], p[k + 1]));
      }
    }
  }
  return {static_cast<double>(unique.size()), static_cast<double>(total)};
}

}  // namespace detail

/// Average degree-valley counts over `trials` random samples of `sample_size`
/// paths. A valley is a consecutive triple A-B-C with d_A, d_C > d_B + w.
/// When sample_size covers the whole set, all paths are counted once.
inline ValleyCounts degree_valley_count(const std::set<AsPath>& paths, const DegreeMap& degrees, std::size_t w,
                                        std::size_t sample_size, std::size_t trials, std::uint64_t seed,
                                        unsigned threads = 1) {
  std::vector<const AsPath*> all;
  all.reserve(paths.size());
  for (const auto& p : paths) all.push_back(&p);

  auto count_ptrs = [&](const std::vector<const AsPath*>& ptrs) {
    std::vector<std::reference_wrapper<const AsPath>> refs;
    refs.reserve(ptrs.size());
    for (auto* p : ptrs) refs.emplace_back(*p);
    return detail::count_valleys(refs, degrees, w);
  };

  if (sample_size >= all.size() || trials == 0) return count_ptrs(all);

  std::vector<ValleyCounts> per_trial(trials);
  detail::parallel_for(trials, threads, [&](std::size_t t) {
    detail::Rng rng(detail::derive_seed(seed, t));
    std::vector<const AsPath*> sample;
    sample.reserve(sample_size);
    std::sample(all.begin(), all.end(), std::back_inserter(sample), sample_size, rng);
    per_trial[t] = count_ptrs(sample);
  });
  ValleyCounts avg;
  for (const auto& c : per_trial) {
    avg.unique += c.unique;
    avg.total += c.total;
  }
  avg.unique /= static_cast<double>(trials);
  avg.total /= static_cast<double>(trials);
  return avg;
}

}  // namespace asrel
