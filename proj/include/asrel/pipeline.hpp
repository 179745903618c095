#pragma once

// End-to-end inference: s2s from registrations, c2p orientation of the
// remaining links, p2p selection, plus the as-rel file format.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "asrel/c2p.hpp"
#include "asrel/ingest.hpp"
#include "asrel/p2p.hpp"
#include "asrel/sibling.hpp"
#include "asrel/topology.hpp"
#include "asrel/types.hpp"

namespace asrel {

/// Alpha-independent inputs of the inference steps.
struct PreparedPaths {
  AsGraph graph;
  std::set<EdgeKey> siblings;
  ProcessedPaths processed;
  DegreeMap degrees;  // contracted node -> degree
  EdgeVariables vars;
  std::vector<Clause> o1;
  std::vector<Clause> o2;

  /// Vertices of the contracted graph.
  std::set<Asn> nodes() const {
    std::set<Asn> out;
    for (const auto& [v, d] : degrees) out.insert(v);
    return out;
  }
};

template <class PathRange>
PreparedPaths prepare(const PathRange& paths, const OrgRecords& orgs, const SynonymDict& dict) {
  PreparedPaths p;
  p.graph = build_graph(paths);
  p.siblings = infer_s2s(p.graph, orgs, dict);
  p.processed = contract_siblings(paths, p.siblings);
  p.degrees = contracted_degrees(p.graph, p.processed);
  p.vars = make_variables(contracted_edges(p.graph, p.siblings, p.processed), p.degrees);
  p.o1 = build_o1_clauses(p.processed, p.vars);
  p.o2 = build_o2_clauses(p.vars, p.degrees);
  return p;
}

struct C2pResult {
  Orientation contracted;  // over contracted links
  Orientation lifted;      // over every non-sibling link of the full graph
  double invalid_fraction = 0.0;
  SolveStats stats;
};

inline C2pResult infer_c2p(const PreparedPaths& p, double alpha, const SolverOptions& opt, bool exact = false) {
  auto inst = assemble_instance(p.vars, p.o1, p.o2, alpha);
  C2pResult r;
  Assignment x;
  if (exact) {
    auto [best, w] = solve_max2sat_exact(inst.problem);
    x = std::move(best);
    r.stats.achieved_weight = w;
    r.stats.exact = true;
  } else {
    std::tie(x, r.stats) = solve_max2sat(inst, opt);
  }
  r.contracted = orient_edges(x, inst);
  r.lifted = lift_orientation(r.contracted, p.graph, p.siblings, p.processed);
  r.invalid_fraction = invalid_fraction(p.processed, r.contracted);
  return r;
}

struct P2pResult {
  std::set<EdgeKey> peers;  // contracted links selected as p2p
  double c3 = 0.0;
  double w_e = 0.0;
  std::size_t candidates = 0;
  std::size_t retained = 0;
  std::size_t arcs = 0;
};

/// Threshold used when none is given: g of a (3, 545) degree pair.
inline double default_threshold(double c3) { return weight_g(3, 545, c3); }

inline P2pResult infer_p2p(const PreparedPaths& p, std::optional<double> w_e, const MwisOptions& opt) {
  P2pResult r;
  r.c3 = normalization_c3(p.graph.edges, p.graph.degree);
  r.w_e = std::clamp(w_e.value_or(default_threshold(r.c3)), 0.0, 1.0);
  auto cands = make_candidate_set(candidate_p2p(p.processed, p.degrees), p.degrees, r.c3);
  r.candidates = cands.g.size();
  auto kept = threshold_filter(cands, r.w_e);
  r.retained = kept.g.size();
  auto conflicts = build_conflict_graph(p.processed, kept);
  r.arcs = conflicts.arc_count();
  r.peers = solve_mwis(conflicts, opt);
  return r;
}

/// S links are s2s, links over a selected p2p contracted link are p2p, the
/// rest keep their c2p orientation.
inline AnnotatedTopology annotate(const PreparedPaths& p, const C2pResult& c2p, const P2pResult& p2p) {
  AnnotatedTopology t;
  t.graph = p.graph;
  for (const auto& e : p.graph.edges) {
    if (p.siblings.count(e)) {
      t.labels.emplace(e, RelationshipLabel::s2s());
      continue;
    }
    const Asn a = p.processed.rep_of(e.lo), b = p.processed.rep_of(e.hi);
    if (a != b && p2p.peers.count(EdgeKey(a, b)))
      t.labels.emplace(e, RelationshipLabel::p2p());
    else
      t.labels.emplace(e, RelationshipLabel::c2p(c2p.lifted.at(e)));
  }
  return t;
}

struct InferenceOptions {
  double alpha = 0.01;
  std::optional<double> w_e;
  SolverOptions solver;
  MwisOptions mwis;
  bool exact = false;
};

struct InferenceResult {
  PreparedPaths prepared;
  C2pResult c2p;
  P2pResult p2p;
  AnnotatedTopology topology;
};

template <class PathRange>
InferenceResult infer_relationships(const PathRange& paths, const OrgRecords& orgs, const SynonymDict& dict,
                                    const InferenceOptions& opt = {}) {
  InferenceResult r;
  r.prepared = prepare(paths, orgs, dict);
  r.c2p = infer_c2p(r.prepared, opt.alpha, opt.solver, opt.exact);
  r.p2p = infer_p2p(r.prepared, opt.w_e, opt.mwis);
  r.topology = annotate(r.prepared, r.c2p, r.p2p);
  return r;
}

// ---------------------------------------------------------------------------
// as-rel files: `P|C|-1` provider first, `A|B|0` peers and `A|B|2` siblings
// with A < B. Lines sorted by link.

inline void write_as_rel(std::ostream& out, const AnnotatedTopology& t, const std::vector<std::string>& header = {}) {
  out << "# as-rel: P|C|-1 provider-customer, A|B|0 peers, A|B|2 siblings\n";
  for (const auto& h : header) out << "# " << h << '\n';
  for (const auto& [e, l] : t.labels) {
    switch (l.kind) {
      case RelKind::C2P: out << l.provider << '|' << e.other(l.provider) << "|-1\n"; break;
      case RelKind::P2P: out << e.lo << '|' << e.hi << "|0\n"; break;
      case RelKind::S2S: out << e.lo << '|' << e.hi << "|2\n"; break;
    }
  }
}

inline AnnotatedTopology read_as_rel(std::istream& in) {
  AnnotatedTopology t;
  std::string line;
  std::size_t line_no = 0;
  std::vector<AsPath> links;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t\r");
    std::string_view body = std::string_view(line).substr(first, last - first + 1);
    auto b1 = body.find('|');
    auto b2 = b1 == std::string_view::npos ? b1 : body.find('|', b1 + 1);
    if (b2 == std::string_view::npos) throw ParseError("expected A|B|rel", line_no);
    const Asn a = detail::parse_asn(body.substr(0, b1), line_no);
    const Asn b = detail::parse_asn(body.substr(b1 + 1, b2 - b1 - 1), line_no);
    if (a == b) throw ParseError("self link", line_no);
    const auto rel = body.substr(b2 + 1);
    RelationshipLabel l;
    if (rel == "-1")
      l = RelationshipLabel::c2p(a);
    else if (rel == "0")
      l = RelationshipLabel::p2p();
    else if (rel == "2")
      l = RelationshipLabel::s2s();
    else
      throw ParseError("unknown relationship '" + std::string(rel) + "'", line_no);
    if (!t.labels.emplace(EdgeKey(a, b), l).second) throw ParseError("duplicate link", line_no);
    links.push_back({a, b});
  }
  t.graph = build_graph(links);
  return t;
}

inline AnnotatedTopology load_as_rel(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open as-rel file " + file.string());
  return read_as_rel(in);
}

struct RelationshipSummary {
  std::size_t total = 0, c2p = 0, p2p = 0, s2s = 0;
};

inline RelationshipSummary summarize(const AnnotatedTopology& t) {
  return {t.labels.size(), t.count(RelKind::C2P), t.count(RelKind::P2P), t.count(RelKind::S2S)};
}

inline std::string format_summary(const RelationshipSummary& s) {
  auto pct = [&](std::size_t n) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(2) << (s.total ? 100.0 * static_cast<double>(n) / static_cast<double>(s.total) : 0.0);
    return o.str();
  };
  std::ostringstream o;
  o << "links=" << s.total << " c2p=" << s.c2p << " (" << pct(s.c2p) << "%) p2p=" << s.p2p << " (" << pct(s.p2p)
    << "%) s2s=" << s.s2s << " (" << pct(s.s2s) << "%)";
  return o.str();
}

}  // namespace asrel
