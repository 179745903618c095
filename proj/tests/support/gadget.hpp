#pragma once

// A degree-11 AS (5056) between two large ASes (701, 1239) on one path,
// plus a single-homed customer that reaches both large ASes through it.
// Degrees are fixed to the values the inference would see on the full
// Internet graph rather than derived from these few paths.

#include <set>

#include "asrel/pipeline.hpp"

namespace gadget {

using namespace asrel;

inline constexpr Asn kLargeA = 701, kSmall = 5056, kLargeB = 1239, kStub = 64500;

inline std::set<AsPath> paths() {
  return {{kLargeA, kSmall, kLargeB}, {kStub, kSmall, kLargeA}, {kStub, kSmall, kLargeB}};
}

inline DegreeMap degrees() { return {{kLargeA, 2334}, {kSmall, 11}, {kLargeB, 1703}, {kStub, 1}}; }

inline PreparedPaths prepared() {
  PreparedPaths p;
  const auto ps = paths();
  p.graph = build_graph(ps);
  p.graph.degree = degrees();
  p.processed = contract_siblings(ps, p.siblings);
  p.degrees = degrees();
  p.vars = make_variables(contracted_edges(p.graph, p.siblings, p.processed), p.degrees);
  p.o1 = build_o1_clauses(p.processed, p.vars);
  p.o2 = build_o2_clauses(p.vars, p.degrees);
  return p;
}

/// True when the small AS is the provider of at least one large AS.
inline bool small_over_large(const Orientation& o) {
  return o.at(EdgeKey(kLargeA, kSmall)) == kSmall || o.at(EdgeKey(kLargeB, kSmall)) == kSmall;
}

/// True when both links point up toward the large ASes.
inline bool both_toward_large(const Orientation& o) {
  return o.at(EdgeKey(kLargeA, kSmall)) == kLargeA && o.at(EdgeKey(kLargeB, kSmall)) == kLargeB;
}

}  // namespace gadget
