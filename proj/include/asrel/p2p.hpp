#pragma once

// p2p identification: candidates adjacent to the top-degree AS of each path,
// degree-similarity weight g, threshold, and a maximum weight independent set
// over the path co-occurrence conflict graph.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "asrel/c2p.hpp"
#include "asrel/detail/random.hpp"
#include "asrel/types.hpp"

namespace asrel {

/// Links adjacent to a maximum-degree AS of some path and never seen away
/// from the top of any other path.
inline std::set<EdgeKey> candidate_p2p(const ProcessedPaths& pp, const DegreeMap& degrees) {
  std::set<EdgeKey> top, non_p2p;
  for (const auto& p : pp.paths) {
    std::size_t max_deg = 0;
    for (Asn a : p) max_deg = std::max(max_deg, degrees.at(a));
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
      const bool adjacent_to_top = degrees.at(p[k]) == max_deg || degrees.at(p[k + 1]) == max_deg;
      (adjacent_to_top ? top : non_p2p).emplace(p[k], p[k + 1]);
    }
  }
  std::set<EdgeKey> out;
  std::set_difference(top.begin(), top.end(), non_p2p.begin(), non_p2p.end(), std::inserter(out, out.end()));
  return out;
}

/// 1 / max f over the given links, or 0 when every link has f = 0 (g == 1).
inline double normalization_c3(const std::set<EdgeKey>& edges, const DegreeMap& degrees) {
  double max_f = 0.0;
  for (const auto& e : edges) max_f = std::max(max_f, weight_f_unordered(degrees.at(e.lo), degrees.at(e.hi)));
  return max_f > 0.0 ? 1.0 / max_f : 0.0;
}

/// Degree-similarity weight 1 - c3 * f, clamped to [0, 1].
inline double weight_g(std::size_t d_a, std::size_t d_b, double c3) {
  return std::clamp(1.0 - c3 * weight_f_unordered(d_a, d_b), 0.0, 1.0);
}

inline double weight_g(const EdgeKey& e, const DegreeMap& degrees, double c3) {
  return weight_g(degrees.at(e.lo), degrees.at(e.hi), c3);
}

struct CandidateSet {
  std::map<EdgeKey, double> g;
  double c3 = 0.0;
};

inline CandidateSet make_candidate_set(const std::set<EdgeKey>& r, const DegreeMap& degrees, double c3) {
  CandidateSet out;
  out.c3 = c3;
  for (const auto& e : r) out.g.emplace(e, weight_g(e, degrees, c3));
  return out;
}

/// Keeps candidates with g >= w_e; w_e is clamped to [0, 1].
inline CandidateSet threshold_filter(const CandidateSet& r, double w_e) {
  w_e = std::clamp(w_e, 0.0, 1.0);
  CandidateSet out;
  out.c3 = r.c3;
  for (const auto& [e, g] : r.g)
    if (g >= w_e) out.g.emplace(e, g);
  return out;
}

/// Candidates as weighted nodes; an arc joins two candidates sharing a path.
struct ConflictGraph {
  std::vector<EdgeKey> nodes;  // sorted
  std::vector<double> weight;
  std::vector<std::vector<std::uint32_t>> adj;  // sorted, no duplicates

  std::size_t size() const { return nodes.size(); }
  std::size_t arc_count() const {
    std::size_t n = 0;
    for (const auto& a : adj) n += a.size();
    return n / 2;
  }
  bool adjacent(std::uint32_t u, std::uint32_t v) const { return std::binary_search(adj[u].begin(), adj[u].end(), v); }
};

/// Builds a graph from explicit nodes and arcs (indices into `nodes`).
inline ConflictGraph make_conflict_graph(std::vector<EdgeKey> nodes, std::vector<double> weight,
                                         const std::vector<std::pair<std::uint32_t, std::uint32_t>>& arcs) {
  if (!std::is_sorted(nodes.begin(), nodes.end())) throw std::invalid_argument("conflict graph nodes must be sorted");
  if (weight.size() != nodes.size()) throw std::invalid_argument("conflict graph weight count mismatch");
  ConflictGraph g;
  g.nodes = std::move(nodes);
  g.weight = std::move(weight);
  g.adj.resize(g.nodes.size());
  for (auto [u, v] : arcs) {
    if (u == v || u >= g.size() || v >= g.size()) throw std::invalid_argument("bad conflict arc");
    g.adj[u].push_back(v);
    g.adj[v].push_back(u);
  }
  for (auto& a : g.adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return g;
}

inline ConflictGraph build_conflict_graph(const ProcessedPaths& pp, const CandidateSet& r) {
  std::vector<EdgeKey> nodes;
  std::vector<double> weight;
  std::map<EdgeKey, std::uint32_t> index;
  for (const auto& [e, g] : r.g) {
    index.emplace(e, static_cast<std::uint32_t>(nodes.size()));
    nodes.push_back(e);
    weight.push_back(g);
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> arcs;
  std::vector<std::uint32_t> on_path;
  for (const auto& p : pp.paths) {
    on_path.clear();
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
      auto it = index.find(EdgeKey(p[k], p[k + 1]));
      if (it != index.end()) on_path.push_back(it->second);
    }
    for (std::size_t i = 0; i < on_path.size(); ++i)
      for (std::size_t j = i + 1; j < on_path.size(); ++j) arcs.emplace_back(on_path[i], on_path[j]);
  }
  return make_conflict_graph(std::move(nodes), std::move(weight), arcs);
}

inline bool is_independent(const ConflictGraph& g, const std::vector<std::uint32_t>& set) {
  std::vector<bool> in(g.size(), false);
  for (auto v : set) in.at(v) = true;
  for (auto v : set)
    for (auto u : g.adj[v])
      if (in[u]) return false;
  return true;
}

inline double set_weight(const ConflictGraph& g, const std::vector<std::uint32_t>& set) {
  double w = 0.0;
  for (auto v : set) w += g.weight[v];
  return w;
}

struct MwisOptions {
  std::uint64_t seed = 1;
  std::size_t restarts = 16;
  unsigned threads = 1;
};

namespace detail {

class MwisLocalSearch {
 public:
  explicit MwisLocalSearch(const ConflictGraph& g) : g_(g), in_(g.size(), false), tight_(g.size(), 0) {}

  void add(std::uint32_t v) {
    in_[v] = true;
    for (auto u : g_.adj[v]) ++tight_[u];
  }
  void remove(std::uint32_t v) {
    in_[v] = false;
    for (auto u : g_.adj[v]) --tight_[u];
  }

  /// Greedy insertion in the given order.
  void greedy(const std::vector<std::uint32_t>& order) {
    for (auto v : order)
      if (!in_[v] && tight_[v] == 0) add(v);
  }

  /// Free insertions, (1,1)-swaps and (2,1)-swaps until none improves.
  void improve() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::uint32_t v = 0; v < g_.size(); ++v) {
        if (!in_[v] && tight_[v] == 0) {
          add(v);
          changed = true;
        }
      }
      for (std::uint32_t v = 0; v < g_.size(); ++v) {
        if (in_[v] || tight_[v] != 1) continue;
        const auto u = only_selected_neighbor(v);
        if (g_.weight[v] > g_.weight[u] + kEps) {
          remove(u);
          add(v);
          changed = true;
        }
      }
      for (std::uint32_t u = 0; u < g_.size(); ++u) {
        if (!in_[u]) continue;
        std::vector<std::uint32_t> free;
        for (auto v : g_.adj[u])
          if (!in_[v] && tight_[v] == 1) free.push_back(v);
        double best = g_.weight[u] + kEps;
        std::pair<std::uint32_t, std::uint32_t> swap{0, 0};
        bool found = false;
        for (std::size_t i = 0; i < free.size(); ++i)
          for (std::size_t j = i + 1; j < free.size(); ++j) {
            const double w = g_.weight[free[i]] + g_.weight[free[j]];
            if (w > best && !g_.adjacent(free[i], free[j])) {
              best = w;
              swap = {free[i], free[j]};
              found = true;
            }
          }
        if (found) {
          remove(u);
          add(swap.first);
          add(swap.second);
          changed = true;
        }
      }
    }
  }

  std::vector<std::uint32_t> selected() const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t v = 0; v < g_.size(); ++v)
      if (in_[v]) out.push_back(v);
    return out;
  }

 private:
  static constexpr double kEps = 1e-12;

  std::uint32_t only_selected_neighbor(std::uint32_t v) const {
    for (auto u : g_.adj[v])
      if (in_[u]) return u;
    throw std::logic_error("MWIS: tight count out of sync");
  }

  const ConflictGraph& g_;
  std::vector<bool> in_;
  std::vector<std::uint32_t> tight_;
};

}  // namespace detail

/// Heuristic MWIS as node indices: greedy by weight / (1 + degree), then
/// swap-based local search. Restart 0 is the plain greedy order, later
/// restarts perturb the priorities. Ties go to the lowest index.
inline std::vector<std::uint32_t> solve_mwis_indices(const ConflictGraph& g, const MwisOptions& opt = {}) {
  const std::size_t restarts = std::max<std::size_t>(1, opt.restarts);
  std::vector<std::vector<std::uint32_t>> results(restarts);
  detail::parallel_for(restarts, opt.threads, [&](std::size_t r) {
    detail::Rng rng(detail::derive_seed(opt.seed, r));
    std::vector<double> key(g.size());
    for (std::uint32_t v = 0; v < g.size(); ++v) {
      key[v] = g.weight[v] / (1.0 + static_cast<double>(g.adj[v].size()));
      if (r > 0) key[v] *= 0.5 + detail::uniform01(rng);
    }
    std::vector<std::uint32_t> order(g.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return key[a] > key[b]; });
    detail::MwisLocalSearch ls(g);
    ls.greedy(order);
    ls.improve();
    results[r] = ls.selected();
  });
  std::size_t win = 0;
  for (std::size_t r = 1; r < restarts; ++r)
    if (set_weight(g, results[r]) > set_weight(g, results[win]) + 1e-12) win = r;
  return results[win];
}

inline std::set<EdgeKey> to_edges(const ConflictGraph& g, const std::vector<std::uint32_t>& set) {
  std::set<EdgeKey> out;
  for (auto v : set) out.insert(g.nodes.at(v));
  return out;
}

inline std::set<EdgeKey> solve_mwis(const ConflictGraph& g, const MwisOptions& opt = {}) {
  return to_edges(g, solve_mwis_indices(g, opt));
}

inline constexpr std::size_t kMaxExactMwisNodes = 20;

/// Exact MWIS by include-first branch and bound; among equal-weight optima
/// the first found in index order wins.
inline std::vector<std::uint32_t> solve_mwis_exact_indices(const ConflictGraph& g) {
  const std::size_t n = g.size();
  if (n > kMaxExactMwisNodes)
    throw LimitError("exact MWIS limited to " + std::to_string(kMaxExactMwisNodes) + " nodes, got " +
                     std::to_string(n));
  std::vector<std::uint32_t> nbr(n, 0);
  for (std::uint32_t v = 0; v < n; ++v)
    for (auto u : g.adj[v]) nbr[v] |= 1u << u;
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + g.weight[i];

  std::uint32_t best_mask = 0;
  double best_w = 0.0;
  bool have = false;
  auto dfs = [&](auto&& self, std::size_t i, std::uint32_t mask, std::uint32_t blocked, double w) -> void {
    if (have && w + suffix[i] <= best_w + 1e-12) return;
    if (i == n) {
      best_mask = mask;
      best_w = w;
      have = true;
      return;
    }
    if (!(blocked >> i & 1u)) self(self, i + 1, mask | 1u << i, blocked | nbr[i], w + g.weight[i]);
    self(self, i + 1, mask, blocked, w);
  };
  dfs(dfs, 0, 0u, 0u, 0.0);

  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < n; ++v)
    if (best_mask >> v & 1u) out.push_back(v);
  return out;
}

inline std::set<EdgeKey> solve_mwis_exact(const ConflictGraph& g) { return to_edges(g, solve_mwis_exact_indices(g)); }

}  // namespace asrel
