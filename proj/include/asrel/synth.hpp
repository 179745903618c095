#pragma once

// Synthetic ground truth: tiered topologies with known relationships, policy
// route propagation that emits valley-free paths, path noise, and scoring of
// inferred relationships against the truth.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "asrel/detail/random.hpp"
#include "asrel/ingest.hpp"
#include "asrel/pipeline.hpp"
#include "asrel/sibling.hpp"
#include "asrel/topology.hpp"
#include "asrel/types.hpp"

namespace asrel {

struct SynthParams {
  std::vector<std::size_t> tier_sizes{5, 15, 60, 320};
  std::size_t providers_min = 1;
  std::size_t providers_max = 2;
  double p2p_prob = 0.05;  // per same-tier pair of transit ASes
  std::size_t s2s_groups = 5;
  std::size_t vantage_points = 20;
};

struct GroundTruth {
  AnnotatedTopology topology;
  std::map<Asn, std::size_t> tier;  // 0 = top
  std::set<Asn> vantage_points;
  OrgRecords orgs;
  std::vector<std::set<std::string>> synonyms;
};

namespace detail {

inline void add_link(AnnotatedTopology& t, Asn a, Asn b, RelationshipLabel l) {
  EdgeKey e(a, b);
  if (!t.graph.edges.insert(e).second) throw std::logic_error("duplicate synthetic link " + to_string(e));
  t.labels.emplace(e, l);
  ++t.graph.degree[a];
  ++t.graph.degree[b];
  t.graph.neighbors[a].push_back(b);
  t.graph.neighbors[b].push_back(a);
}

/// Draws up to k distinct items with probability proportional to weight.
inline std::vector<std::size_t> weighted_sample(std::vector<double> w, std::size_t k, Rng& rng) {
  std::vector<std::size_t> out;
  for (std::size_t pick = 0; pick < k; ++pick) {
    double total = 0.0;
    for (double x : w) total += x;
    if (total <= 0.0) break;
    double u = uniform01(rng) * total;
    std::size_t i = 0;
    for (; i + 1 < w.size(); ++i) {
      if (u < w[i]) break;
      u -= w[i];
    }
    while (w[i] <= 0.0) --i;  // rounding can walk past the last positive slot
    out.push_back(i);
    w[i] = 0.0;
  }
  return out;
}

}  // namespace detail

/// Tiered topology: the top tier is a p2p clique, every lower AS buys transit
/// from 1..providers_max ASes of higher tiers chosen by preferential
/// attachment, transit ASes of one tier peer with probability p2p_prob, and
/// s2s_groups disjoint c2p links are relabeled as siblings.
inline GroundTruth generate_topology(const SynthParams& prm, std::uint64_t seed) {
  if (prm.tier_sizes.size() < 2) throw std::invalid_argument("generate_topology: need at least two tiers");
  if (std::any_of(prm.tier_sizes.begin(), prm.tier_sizes.end(), [](auto n) { return n == 0; }))
    throw std::invalid_argument("generate_topology: empty tier");
  if (prm.providers_min < 1 || prm.providers_min > prm.providers_max)
    throw std::invalid_argument("generate_topology: bad providers_per_as range");
  if (prm.p2p_prob < 0.0 || prm.p2p_prob > 1.0) throw std::invalid_argument("generate_topology: p2p_prob outside [0,1]");

  detail::Rng rng(seed);
  std::size_t n = 0;
  for (auto s : prm.tier_sizes) n += s;
  if (n > 60000) throw std::invalid_argument("generate_topology: too many ASes");
  if (prm.vantage_points > n) throw std::invalid_argument("generate_topology: more vantage points than ASes");

  // Distinct ASNs in random order so that ASN order carries no tier signal.
  std::set<Asn> drawn;
  std::vector<Asn> asns;
  while (asns.size() < n) {
    Asn a = static_cast<Asn>(1 + detail::uniform_index(rng, 64511));
    if (drawn.insert(a).second) asns.push_back(a);
  }

  GroundTruth truth;
  auto& topo = truth.topology;
  std::vector<std::vector<Asn>> tiers;
  std::size_t next = 0;
  for (std::size_t t = 0; t < prm.tier_sizes.size(); ++t) {
    tiers.emplace_back(asns.begin() + next, asns.begin() + next + prm.tier_sizes[t]);
    next += prm.tier_sizes[t];
    for (Asn a : tiers.back()) {
      truth.tier[a] = t;
      topo.graph.vertices.insert(a);
      topo.graph.degree[a] = 0;
    }
  }

  for (std::size_t i = 0; i < tiers[0].size(); ++i)
    for (std::size_t j = i + 1; j < tiers[0].size(); ++j)
      detail::add_link(topo, tiers[0][i], tiers[0][j], RelationshipLabel::p2p());

  std::vector<Asn> upper(tiers[0]);
  for (std::size_t t = 1; t < tiers.size(); ++t) {
    for (Asn a : tiers[t]) {
      const auto k = prm.providers_min + detail::uniform_index(rng, prm.providers_max - prm.providers_min + 1);
      std::vector<double> w;
      for (Asn u : upper) w.push_back(static_cast<double>(topo.graph.degree[u] + 1));
      for (auto idx : detail::weighted_sample(std::move(w), k, rng))
        detail::add_link(topo, a, upper[idx], RelationshipLabel::c2p(upper[idx]));
    }
    upper.insert(upper.end(), tiers[t].begin(), tiers[t].end());
  }

  // Stubs (bottom tier) do not peer.
  for (std::size_t t = 1; t + 1 < tiers.size(); ++t)
    for (std::size_t i = 0; i < tiers[t].size(); ++i)
      for (std::size_t j = i + 1; j < tiers[t].size(); ++j)
        if (detail::uniform01(rng) < prm.p2p_prob && !topo.graph.has_edge(tiers[t][i], tiers[t][j]))
          detail::add_link(topo, tiers[t][i], tiers[t][j], RelationshipLabel::p2p());

  std::vector<EdgeKey> c2p_links;
  for (const auto& [e, l] : topo.labels)
    if (l.kind == RelKind::C2P) c2p_links.push_back(e);
  std::shuffle(c2p_links.begin(), c2p_links.end(), rng);
  std::set<Asn> paired;
  std::vector<EdgeKey> sibling_pairs;
  for (const auto& e : c2p_links) {
    if (sibling_pairs.size() == prm.s2s_groups) break;
    if (paired.count(e.lo) || paired.count(e.hi)) continue;
    paired.insert(e.lo);
    paired.insert(e.hi);
    sibling_pairs.push_back(e);
    topo.labels[e] = RelationshipLabel::s2s();
  }
  if (sibling_pairs.size() < prm.s2s_groups) throw std::invalid_argument("generate_topology: not enough links for s2s groups");

  for (auto& [v, ns] : topo.graph.neighbors) std::sort(ns.begin(), ns.end());

  for (Asn a : topo.graph.vertices) truth.orgs.owner[a] = "Org " + std::to_string(a) + " Networks";
  for (std::size_t i = 0; i < sibling_pairs.size(); ++i) {
    const auto& e = sibling_pairs[i];
    const std::string name = "Org " + std::to_string(e.lo) + " Networks";
    if (i % 2 == 0) {
      truth.orgs.owner[e.hi] = name;
    } else {
      // registered under a different spelling, joined by a synonym entry
      const std::string alias = "ORG " + std::to_string(e.lo) + " Holdings, Inc.";
      truth.orgs.owner[e.hi] = alias;
      truth.synonyms.push_back({name, alias});
    }
  }

  // Route collectors peer mostly with transit networks: vantage points are
  // drawn with probability proportional to degree.
  std::vector<Asn> all(topo.graph.vertices.begin(), topo.graph.vertices.end());
  std::vector<double> w;
  for (Asn a : all) w.push_back(static_cast<double>(topo.graph.degree[a]));
  for (auto idx : detail::weighted_sample(std::move(w), prm.vantage_points, rng)) truth.vantage_points.insert(all[idx]);

  topo.check();
  return truth;
}

// ---------------------------------------------------------------------------
// Route propagation

namespace detail {

struct PolicyGraph {
  std::vector<Asn> asn;  // sorted; index order == ASN order
  std::map<Asn, std::uint32_t> index;
  std::vector<std::vector<std::uint32_t>> providers, customers, peers, siblings;

  explicit PolicyGraph(const AnnotatedTopology& t) : asn(t.graph.vertices.begin(), t.graph.vertices.end()) {
    for (std::uint32_t i = 0; i < asn.size(); ++i) index.emplace(asn[i], i);
    const auto n = asn.size();
    providers.resize(n);
    customers.resize(n);
    peers.resize(n);
    siblings.resize(n);
    for (const auto& [e, l] : t.labels) {
      const auto a = index.at(e.lo), b = index.at(e.hi);
      switch (l.kind) {
        case RelKind::P2P:
          peers[a].push_back(b);
          peers[b].push_back(a);
          break;
        case RelKind::S2S:
          siblings[a].push_back(b);
          siblings[b].push_back(a);
          break;
        case RelKind::C2P: {
          const auto p = index.at(l.provider), c = p == a ? b : a;
          providers[c].push_back(p);
          customers[p].push_back(c);
          break;
        }
      }
    }
  }
};

enum class Learned : std::uint8_t { None, Customer, Peer, Provider };

/// Best next hop of every AS toward `dest`: customer routes beat peer routes
/// beat provider routes, then shorter paths, then the lower next-hop ASN.
/// Siblings pass routes on unchanged in class.
inline std::vector<std::uint32_t> best_next_hops(const PolicyGraph& g, std::uint32_t dest) {
  constexpr auto kNone = std::numeric_limits<std::uint32_t>::max();
  const auto n = g.asn.size();
  std::vector<std::uint32_t> nh(n, kNone), len(n, 0);
  std::vector<Learned> learned(n, Learned::None);
  learned[dest] = Learned::Customer;

  using Entry = std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>;  // len, next hop, node
  auto wave = [&](Learned cls, std::priority_queue<Entry, std::vector<Entry>, std::greater<>>& heap,
                  auto&& exports_to) {
    while (!heap.empty()) {
      auto [l, hop, v] = heap.top();
      heap.pop();
      if (learned[v] != Learned::None) continue;
      learned[v] = cls;
      len[v] = l;
      nh[v] = hop;
      exports_to(v, [&](std::uint32_t w) {
        if (learned[w] == Learned::None) heap.emplace(l + 1, v, w);
      });
    }
  };

  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  auto up = [&](std::uint32_t v, auto&& push) {
    for (auto w : g.providers[v]) push(w);
    for (auto w : g.siblings[v]) push(w);
  };
  up(dest, [&](std::uint32_t w) { heap.emplace(1, dest, w); });
  wave(Learned::Customer, heap, up);

  for (std::uint32_t x = 0; x < n; ++x)
    if (learned[x] == Learned::Customer)
      for (auto w : g.peers[x])
        if (learned[w] == Learned::None) heap.emplace(len[x] + 1, x, w);
  wave(Learned::Peer, heap, [&](std::uint32_t v, auto&& push) {
    for (auto w : g.siblings[v]) push(w);
  });

  for (std::uint32_t x = 0; x < n; ++x)
    if (learned[x] != Learned::None)
      for (auto w : g.customers[x])
        if (learned[w] == Learned::None) heap.emplace(len[x] + 1, x, w);
  wave(Learned::Provider, heap, [&](std::uint32_t v, auto&& push) {
    for (auto w : g.customers[v]) push(w);
    for (auto w : g.siblings[v]) push(w);
  });
  return nh;
}

}  // namespace detail

/// One snapshot per vantage point holding its best path to every other AS.
inline std::vector<Snapshot> propagate_routes(const GroundTruth& truth, unsigned threads = 1) {
  detail::PolicyGraph g(truth.topology);
  const auto n = g.asn.size();
  std::vector<std::vector<std::uint32_t>> next_hops(n);
  detail::parallel_for(n, threads, [&](std::size_t d) { next_hops[d] = detail::best_next_hops(g, static_cast<std::uint32_t>(d)); });

  std::vector<Snapshot> out;
  for (Asn vp : truth.vantage_points) {
    Snapshot s;
    s.label = "vp" + std::to_string(vp);
    const auto v = g.index.at(vp);
    for (std::uint32_t d = 0; d < n; ++d) {
      if (d == v || next_hops[d][v] == std::numeric_limits<std::uint32_t>::max()) continue;
      AsPath p{vp};
      for (auto x = v; x != d;) {
        x = next_hops[d][x];
        p.push_back(g.asn[x]);
      }
      s.paths.insert(std::move(p));
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Union of per-vantage snapshots, as a route collector table dump.
inline Snapshot merge_snapshots(const std::vector<Snapshot>& parts, std::string label = "table") {
  Snapshot s;
  s.label = std::move(label);
  for (const auto& p : parts) s.paths.insert(p.paths.begin(), p.paths.end());
  return s;
}

/// Corrupts each path with probability noise_rate: either two adjacent hops
/// are swapped or a random ASN of the snapshot is inserted. Every snapshot
/// draws from its own stream, so corruptions do not repeat across snapshots.
inline std::vector<Snapshot> perturb(const std::vector<Snapshot>& snapshots, double noise_rate, std::uint64_t seed) {
  if (noise_rate < 0.0 || noise_rate > 1.0) throw std::invalid_argument("perturb: noise_rate outside [0,1]");
  std::vector<Snapshot> out;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    detail::Rng rng(detail::derive_seed(seed, i));
    const auto& in = snapshots[i];
    std::set<Asn> universe_set;
    for (const auto& p : in.paths) universe_set.insert(p.begin(), p.end());
    const std::vector<Asn> universe(universe_set.begin(), universe_set.end());

    Snapshot s;
    s.label = in.label;
    s.skipped = in.skipped;
    for (const auto& p : in.paths) {
      if (noise_rate == 0.0 || detail::uniform01(rng) >= noise_rate) {
        s.paths.insert(p);
        continue;
      }
      AsPath q = p;
      const bool can_insert = universe.size() > p.size();
      if (can_insert && detail::uniform01(rng) < 0.5) {
        Asn extra;
        do extra = universe[detail::uniform_index(rng, universe.size())];
        while (std::find(p.begin(), p.end(), extra) != p.end());
        q.insert(q.begin() + static_cast<std::ptrdiff_t>(detail::uniform_index(rng, p.size() + 1)), extra);
      } else {
        const auto k = detail::uniform_index(rng, p.size() - 1);
        std::swap(q[k], q[k + 1]);
      }
      s.paths.insert(std::move(q));
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// `count` collector tables of the truth, each with independent noise.
inline std::vector<Snapshot> emit_snapshots(const GroundTruth& truth, std::size_t count, double noise_rate,
                                            std::uint64_t seed, unsigned threads = 1) {
  const Snapshot table = merge_snapshots(propagate_routes(truth, threads));
  std::vector<Snapshot> copies;
  for (std::size_t i = 0; i < count; ++i) {
    copies.push_back(table);
    copies.back().label = "table" + std::to_string(i);
  }
  return perturb(copies, noise_rate, seed);
}

// ---------------------------------------------------------------------------
// Scoring

struct KindScore {
  std::size_t total = 0;
  std::size_t correct = 0;

  double percent() const { return total ? 100.0 * static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

struct AccuracyReport {
  std::array<KindScore, 3> by_kind{};                       // indexed by inferred RelKind
  std::array<std::array<std::size_t, 3>, 3> confusion{};    // [inferred][true]
  KindScore overall;
  std::size_t c2p_reversed = 0;  // c2p on both sides, provider mismatched
  std::size_t scored = 0;        // links present in both topologies
  std::size_t truth_links = 0;
  std::size_t inferred_links = 0;

  const KindScore& kind(RelKind k) const { return by_kind[static_cast<std::size_t>(k)]; }
  double coverage() const { return truth_links ? static_cast<double>(scored) / static_cast<double>(truth_links) : 0.0; }
};

/// Scores inferred labels on the links shared with the truth. A c2p label is
/// correct only when the provider endpoint matches.
inline AccuracyReport score(const AnnotatedTopology& inferred, const AnnotatedTopology& truth) {
  AccuracyReport r;
  r.truth_links = truth.labels.size();
  r.inferred_links = inferred.labels.size();
  for (const auto& [e, l] : inferred.labels) {
    auto it = truth.labels.find(e);
    if (it == truth.labels.end()) continue;
    ++r.scored;
    const auto ik = static_cast<std::size_t>(l.kind), tk = static_cast<std::size_t>(it->second.kind);
    ++r.confusion[ik][tk];
    bool ok = l.kind == it->second.kind;
    if (ok && l.kind == RelKind::C2P && l.provider != it->second.provider) {
      ok = false;
      ++r.c2p_reversed;
    }
    ++r.by_kind[ik].total;
    r.by_kind[ik].correct += ok;
    ++r.overall.total;
    r.overall.correct += ok;
  }
  return r;
}

/// Fraction of true links of each kind missing from an observed graph.
inline std::array<double, 3> missing_fraction_by_kind(const AnnotatedTopology& truth, const AsGraph& observed) {
  std::array<std::size_t, 3> total{}, missing{};
  for (const auto& [e, l] : truth.labels) {
    const auto k = static_cast<std::size_t>(l.kind);
    ++total[k];
    missing[k] += observed.edges.count(e) == 0;
  }
  std::array<double, 3> out{};
  for (std::size_t k = 0; k < 3; ++k)
    out[k] = total[k] ? static_cast<double>(missing[k]) / static_cast<double>(total[k]) : 0.0;
  return out;
}

/// Labeled inputs for threshold calibration: prepared paths, their c2p
/// orientation and the true relationships.
struct CalibrationCase {
  const PreparedPaths* prepared;
  const C2pResult* c2p;
  const AnnotatedTopology* truth;
};

struct Calibration {
  double w_e = 0.0;
  std::vector<std::pair<double, std::size_t>> errors;  // threshold -> mislabeled links over all cases
};

/// Picks the p2p threshold with the fewest mislabeled links summed over the
/// cases; ties go to the smaller threshold.
inline Calibration calibrate_threshold(const std::vector<CalibrationCase>& cases, const std::vector<double>& grid,
                                       const MwisOptions& opt = {}) {
  if (cases.empty() || grid.empty()) throw std::invalid_argument("calibrate_threshold: nothing to calibrate");
  Calibration c;
  std::optional<std::size_t> best;
  for (double w : grid) {
    std::size_t wrong = 0;
    for (const auto& k : cases) {
      const auto r = score(annotate(*k.prepared, *k.c2p, infer_p2p(*k.prepared, w, opt)), *k.truth);
      wrong += r.overall.total - r.overall.correct;
    }
    c.errors.emplace_back(w, wrong);
    if (!best || wrong < *best || (wrong == *best && w < c.w_e)) {
      best = wrong;
      c.w_e = w;
    }
  }
  return c;
}

}  // namespace asrel
