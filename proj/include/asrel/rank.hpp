#pragma once

// Reachability hierarchy, alpha selection and customer cones.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asrel/c2p.hpp"
#include "asrel/topology.hpp"
#include "asrel/types.hpp"

namespace asrel {

/// Provider -> customers adjacency over a vertex set.
struct P2cGraph {
  std::set<Asn> vertices;
  std::map<Asn, std::vector<Asn>> customers;
};

inline P2cGraph make_p2c_graph(const Orientation& o, const std::set<Asn>& extra_vertices = {}) {
  P2cGraph g;
  g.vertices = extra_vertices;
  for (const auto& [e, provider] : o) {
    g.vertices.insert(e.lo);
    g.vertices.insert(e.hi);
    g.customers[provider].push_back(e.other(provider));
  }
  for (auto& [p, cs] : g.customers) std::sort(cs.begin(), cs.end());
  return g;
}

/// Number of ASes reachable from `asn` along provider -> customer links,
/// excluding `asn` itself. Cycles are tolerated.
inline std::size_t reachability(const P2cGraph& g, Asn asn) {
  if (!g.vertices.count(asn)) throw std::out_of_range("reachability: unknown AS " + std::to_string(asn));
  std::set<Asn> seen{asn};
  std::vector<Asn> stack{asn};
  while (!stack.empty()) {
    Asn v = stack.back();
    stack.pop_back();
    auto it = g.customers.find(v);
    if (it == g.customers.end()) continue;
    for (Asn c : it->second)
      if (seen.insert(c).second) stack.push_back(c);
  }
  return seen.size() - 1;
}

inline std::size_t reachability(const Orientation& o, Asn asn) { return reachability(make_p2c_graph(o), asn); }

struct HierarchyReport {
  std::map<Asn, std::size_t> reach;
  std::map<Asn, std::size_t> level;  // 0 = largest reachability
  std::map<Asn, std::size_t> depth;
  std::map<Asn, std::size_t> width;
  double invalid_fraction = 0.0;

  /// ASes with depth below `window`, by depth then ASN.
  std::vector<Asn> top(std::size_t window) const {
    std::vector<Asn> out;
    for (const auto& [a, d] : depth)
      if (d < window) out.push_back(a);
    std::stable_sort(out.begin(), out.end(), [&](Asn x, Asn y) { return depth.at(x) < depth.at(y); });
    return out;
  }
};

/// Groups ASes into levels of equal reachability, sorted descending.
inline HierarchyReport hierarchy(const P2cGraph& g, double invalid_fraction = 0.0) {
  HierarchyReport r;
  r.invalid_fraction = invalid_fraction;
  std::map<std::size_t, std::size_t, std::greater<>> per_level;
  for (Asn v : g.vertices) {
    const auto n = reachability(g, v);
    r.reach[v] = n;
    ++per_level[n];
  }
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> level_of;  // reach -> (level, depth)
  std::size_t level = 0, above = 0;
  for (const auto& [reach, count] : per_level) {
    level_of[reach] = {level++, above};
    above += count;
  }
  for (const auto& [v, n] : r.reach) {
    r.level[v] = level_of[n].first;
    r.depth[v] = level_of[n].second;
    r.width[v] = per_level[n];
  }
  return r;
}

inline HierarchyReport hierarchy(const Orientation& o, const std::set<Asn>& vertices, double invalid_fraction) {
  return hierarchy(make_p2c_graph(o, vertices), invalid_fraction);
}

struct AlphaChoice {
  double alpha = 0.0;
  bool degraded = false;  // no sweep entry had only expected ASes on top
};

/// Smallest invalid fraction among entries whose top window holds only
/// expected ASes; ties go to the smaller alpha. Without a qualifying entry,
/// the one with the largest top overlap wins, then the smallest invalid
/// fraction.
inline AlphaChoice select_alpha(const std::vector<std::pair<double, HierarchyReport>>& sweep,
                                const std::set<Asn>& expected_top, std::size_t top_window = 5) {
  if (sweep.empty()) throw std::invalid_argument("select_alpha: empty sweep");
  if (expected_top.empty()) throw std::invalid_argument("select_alpha: empty expected top set");
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto top = sweep[i].second.top(top_window);
    const bool ok = std::all_of(top.begin(), top.end(), [&](Asn a) { return expected_top.count(a) > 0; });
    if (!ok) continue;
    const auto& [a, r] = sweep[i];
    if (!best || r.invalid_fraction < sweep[*best].second.invalid_fraction ||
        (r.invalid_fraction == sweep[*best].second.invalid_fraction && a < sweep[*best].first))
      best = i;
  }
  if (best) return {sweep[*best].first, false};

  auto overlap = [&](const HierarchyReport& r) {
    std::size_t n = 0;
    for (Asn a : r.top(top_window)) n += expected_top.count(a);
    return n;
  };
  std::size_t pick = 0;
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    const auto oi = overlap(sweep[i].second), op = overlap(sweep[pick].second);
    const double fi = sweep[i].second.invalid_fraction, fp = sweep[pick].second.invalid_fraction;
    if (oi > op || (oi == op && (fi < fp || (fi == fp && sweep[i].first < sweep[pick].first)))) pick = i;
  }
  return {sweep[pick].first, true};
}

// ---------------------------------------------------------------------------
// Customer cones

/// The AS plus everything reachable over p2c links (downward) and s2s links.
inline std::set<Asn> customer_cone(const AnnotatedTopology& t, Asn asn) {
  if (!t.graph.vertices.count(asn)) throw std::out_of_range("customer_cone: unknown AS " + std::to_string(asn));
  std::set<Asn> cone{asn};
  std::vector<Asn> stack{asn};
  while (!stack.empty()) {
    Asn v = stack.back();
    stack.pop_back();
    auto it = t.graph.neighbors.find(v);
    if (it == t.graph.neighbors.end()) continue;
    for (Asn u : it->second) {
      const auto& l = t.labels.at(EdgeKey(v, u));
      const bool free = l.kind == RelKind::S2S || (l.kind == RelKind::C2P && l.provider == v);
      if (free && cone.insert(u).second) stack.push_back(u);
    }
  }
  return cone;
}

struct Ipv4Prefix {
  std::uint32_t base = 0;
  std::uint8_t length = 0;

  friend auto operator<=>(const Ipv4Prefix&, const Ipv4Prefix&) = default;
};

/// Parses a.b.c.d/len; the base must be aligned to the mask.
inline Ipv4Prefix parse_prefix(std::string_view text) {
  auto fail = [&](const char* why) { return ParseError(std::string(why) + " '" + std::string(text) + "'"); };
  auto slash = text.find('/');
  if (slash == std::string_view::npos) throw fail("missing prefix length");
  std::uint32_t base = 0;
  std::string_view addr = text.substr(0, slash);
  for (int octet = 0; octet < 4; ++octet) {
    auto dot = octet < 3 ? addr.find('.') : addr.size();
    if (dot == std::string_view::npos) throw fail("malformed address");
    unsigned v = 0;
    auto tok = addr.substr(0, dot);
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || p != tok.data() + tok.size() || v > 255) throw fail("malformed address");
    base = base << 8 | v;
    addr = octet < 3 ? addr.substr(dot + 1) : std::string_view{};
  }
  unsigned len = 0;
  auto lt = text.substr(slash + 1);
  auto [p, ec] = std::from_chars(lt.data(), lt.data() + lt.size(), len);
  if (lt.empty() || ec != std::errc{} || p != lt.data() + lt.size() || len > 32) throw fail("bad prefix length");
  const std::uint32_t mask = len == 0 ? 0u : ~std::uint32_t{0} << (32 - len);
  if ((base & ~mask) != 0) throw fail("prefix base not aligned to its length");
  return {base, static_cast<std::uint8_t>(len)};
}

inline std::string to_string(const Ipv4Prefix& p) {
  return std::to_string(p.base >> 24) + "." + std::to_string(p.base >> 16 & 255) + "." +
         std::to_string(p.base >> 8 & 255) + "." + std::to_string(p.base & 255) + "/" + std::to_string(p.length);
}

struct PrefixMap {
  std::map<Asn, std::set<Ipv4Prefix>> prefixes;
};

/// Reads `ASN|a.b.c.d/len` lines.
inline PrefixMap read_prefix_map(std::istream& in) {
  PrefixMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto bar = line.find('|');
    if (bar == std::string::npos) throw ParseError("expected ASN|prefix", line_no);
    auto last = line.find_last_not_of(" \t\r");
    try {
      Asn asn = detail::parse_asn(std::string_view(line).substr(first, bar - first), line_no);
      out.prefixes[asn].insert(parse_prefix(std::string_view(line).substr(bar + 1, last - bar)));
    } catch (const ParseError& e) {
      if (e.line()) throw;
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

inline PrefixMap load_prefix_map(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open prefix file " + file.string());
  return read_prefix_map(in);
}

struct ConeMetrics {
  std::size_t as_count = 0;
  std::size_t prefix_count = 0;
  std::uint64_t slash24_count = 0;

  friend bool operator==(const ConeMetrics&, const ConeMetrics&) = default;
};

/// /24 blocks touched by a set of prefixes, counted over their union.
inline std::uint64_t count_slash24(const std::set<Ipv4Prefix>& prefixes) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> blocks;  // inclusive /24 index range
  for (const auto& p : prefixes) {
    const std::uint64_t first = p.base >> 8;
    const std::uint64_t span = p.length <= 24 ? std::uint64_t{1} << (24 - p.length) : 1;
    blocks.emplace_back(first, first + span - 1);
  }
  std::sort(blocks.begin(), blocks.end());
  std::uint64_t total = 0;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> cur;
  for (const auto& b : blocks) {
    if (cur && b.first <= cur->second + 1) {
      cur->second = std::max(cur->second, b.second);
    } else {
      if (cur) total += cur->second - cur->first + 1;
      cur = b;
    }
  }
  if (cur) total += cur->second - cur->first + 1;
  return total;
}

inline ConeMetrics cone_metrics(const std::set<Asn>& cone, const PrefixMap& pfx) {
  std::set<Ipv4Prefix> all;
  for (Asn a : cone) {
    auto it = pfx.prefixes.find(a);
    if (it != pfx.prefixes.end()) all.insert(it->second.begin(), it->second.end());
  }
  return {cone.size(), all.size(), count_slash24(all)};
}

}  // namespace asrel
