#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "asrel/types.hpp"

namespace asrel {

/// Undirected AS graph induced by the adjacent pairs of a path set.
struct AsGraph {
  std::set<Asn> vertices;
  std::set<EdgeKey> edges;
  DegreeMap degree;
  std::map<Asn, std::vector<Asn>> neighbors;  // sorted

  bool has_edge(Asn a, Asn b) const { return a != b && edges.count(EdgeKey(a, b)) > 0; }
};

template <class PathRange>
AsGraph build_graph(const PathRange& paths) {
  AsGraph g;
  for (const AsPath& p : paths) {
    for (Asn a : p) g.vertices.insert(a);
    for (std::size_t k = 0; k + 1 < p.size(); ++k)
      if (p[k] != p[k + 1]) g.edges.emplace(p[k], p[k + 1]);
  }
  for (Asn v : g.vertices) g.degree[v] = 0;
  for (const auto& e : g.edges) {
    ++g.degree[e.lo];
    ++g.degree[e.hi];
    g.neighbors[e.lo].push_back(e.hi);
    g.neighbors[e.hi].push_back(e.lo);
  }
  for (auto& [v, ns] : g.neighbors) std::sort(ns.begin(), ns.end());
  return g;
}

enum class RelKind { C2P, P2P, S2S };

inline const char* to_string(RelKind k) {
  switch (k) {
    case RelKind::C2P: return "c2p";
    case RelKind::P2P: return "p2p";
    case RelKind::S2S: return "s2s";
  }
  return "?";
}

struct RelationshipLabel {
  RelKind kind = RelKind::C2P;
  Asn provider = 0;  // meaningful for C2P only

  static RelationshipLabel c2p(Asn provider) { return {RelKind::C2P, provider}; }
  static RelationshipLabel p2p() { return {RelKind::P2P, 0}; }
  static RelationshipLabel s2s() { return {RelKind::S2S, 0}; }

  friend bool operator==(const RelationshipLabel&, const RelationshipLabel&) = default;
};

using LabelMap = std::map<EdgeKey, RelationshipLabel>;

/// Graph plus one relationship label per edge.
struct AnnotatedTopology {
  AsGraph graph;
  LabelMap labels;

  void check() const {
    if (labels.size() != graph.edges.size())
      throw std::logic_error("AnnotatedTopology: labels not total over edges");
    for (const auto& [e, l] : labels) {
      if (!graph.edges.count(e)) throw std::logic_error("AnnotatedTopology: label on unknown edge " + to_string(e));
      if (l.kind == RelKind::C2P && !e.has(l.provider))
        throw std::logic_error("AnnotatedTopology: provider not an endpoint of " + to_string(e));
    }
  }

  std::size_t count(RelKind k) const {
    std::size_t n = 0;
    for (const auto& [e, l] : labels) n += l.kind == k;
    return n;
  }
};

/// Direction of one traversed link, read in path order.
enum class Step { Up, Down, Peer, Sibling };

/// Step taken when traversing a link toward `to`.
inline Step step_of(Asn to, const RelationshipLabel& l) {
  switch (l.kind) {
    case RelKind::S2S: return Step::Sibling;
    case RelKind::P2P: return Step::Peer;
    case RelKind::C2P: return l.provider == to ? Step::Up : Step::Down;
  }
  return Step::Sibling;
}

/// Matches (up|sibling)* peer? (down|sibling)*.
inline bool is_valley_free(std::span<const Step> steps) {
  bool descending = false;
  for (Step s : steps) {
    switch (s) {
      case Step::Sibling: break;
      case Step::Up:
        if (descending) return false;
        break;
      case Step::Peer:
        if (descending) return false;
        descending = true;
        break;
      case Step::Down: descending = true; break;
    }
  }
  return true;
}

inline std::vector<Step> steps_of(const AsPath& path, const LabelMap& labels) {
  std::vector<Step> steps;
  steps.reserve(path.size());
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    auto it = labels.find(EdgeKey(path[k], path[k + 1]));
    if (it == labels.end())
      throw std::invalid_argument("is_valley_free: unlabeled edge " + to_string(EdgeKey(path[k], path[k + 1])));
    steps.push_back(step_of(path[k + 1], it->second));
  }
  return steps;
}

inline bool is_valley_free(const AsPath& path, const LabelMap& labels) {
  auto steps = steps_of(path, labels);
  return is_valley_free(std::span<const Step>(steps));
}

}  // namespace asrel
