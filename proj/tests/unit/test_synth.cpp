#include <gtest/gtest.h>

#include "asrel/synth.hpp"

using namespace asrel;

namespace {

SynthParams small() {
  SynthParams p;
  p.tier_sizes = {3, 8, 30};
  p.s2s_groups = 2;
  p.vantage_points = 6;
  p.p2p_prob = 0.2;
  return p;
}

AnnotatedTopology hand(std::initializer_list<std::pair<EdgeKey, RelationshipLabel>> links) {
  AnnotatedTopology t;
  std::vector<AsPath> pairs;
  for (const auto& [e, l] : links) {
    t.labels.emplace(e, l);
    pairs.push_back({e.lo, e.hi});
  }
  t.graph = build_graph(pairs);
  return t;
}

}  // namespace

TEST(GenerateTopology, TreePlusClique) {
  SynthParams p;
  p.tier_sizes = {2, 3};
  p.providers_max = 1;
  p.p2p_prob = 0.0;
  p.s2s_groups = 0;
  p.vantage_points = 2;
  auto t = generate_topology(p, 1);
  EXPECT_EQ(t.topology.graph.vertices.size(), 5u);
  EXPECT_EQ(t.topology.count(RelKind::P2P), 1u);
  EXPECT_EQ(t.topology.count(RelKind::C2P), 3u);
}

TEST(GenerateTopology, StructureAndDeterminism) {
  auto a = generate_topology(small(), 42), b = generate_topology(small(), 42);
  EXPECT_EQ(a.topology.labels, b.topology.labels);
  EXPECT_EQ(a.vantage_points, b.vantage_points);
  EXPECT_EQ(a.orgs.owner, b.orgs.owner);
  EXPECT_NE(a.topology.labels, generate_topology(small(), 43).topology.labels);

  a.topology.check();
  EXPECT_EQ(a.topology.count(RelKind::S2S), 2u);
  EXPECT_EQ(a.vantage_points.size(), 6u);
  // top tier clique
  std::vector<Asn> top;
  for (auto [asn, tier] : a.tier)
    if (tier == 0) top.push_back(asn);
  for (std::size_t i = 0; i < top.size(); ++i)
    for (std::size_t j = i + 1; j < top.size(); ++j)
      EXPECT_EQ(a.topology.labels.at(EdgeKey(top[i], top[j])).kind, RelKind::P2P);
  // providers sit in a strictly higher tier, so there is no c2p cycle
  for (const auto& [e, l] : a.topology.labels)
    if (l.kind == RelKind::C2P) EXPECT_LT(a.tier.at(l.provider), a.tier.at(e.other(l.provider)));
  // every non-top AS has at least one provider or sibling link upward
  for (auto [asn, tier] : a.tier)
    if (tier > 0) EXPECT_GE(a.topology.graph.degree.at(asn), 1u);
}

TEST(GenerateTopology, PureHierarchyWithoutPeersOrSiblings) {
  auto p = small();
  p.p2p_prob = 0.0;
  p.s2s_groups = 0;
  auto t = generate_topology(p, 5);
  EXPECT_EQ(t.topology.count(RelKind::P2P), 3u);  // only the top clique
  EXPECT_EQ(t.topology.count(RelKind::S2S), 0u);
}

TEST(GenerateTopology, RejectsInfeasibleParameters) {
  auto p = small();
  p.tier_sizes = {4};
  EXPECT_THROW(generate_topology(p, 1), std::invalid_argument);
  p.tier_sizes = {2, 0, 3};
  EXPECT_THROW(generate_topology(p, 1), std::invalid_argument);
  p = small();
  p.providers_min = 3;
  p.providers_max = 2;
  EXPECT_THROW(generate_topology(p, 1), std::invalid_argument);
  p = small();
  p.vantage_points = 1000;
  EXPECT_THROW(generate_topology(p, 1), std::invalid_argument);
}

TEST(GenerateTopology, SiblingsShareAnOrganization) {
  auto t = generate_topology(small(), 9);
  SynonymDict dict(t.synonyms);
  auto s = infer_s2s(t.topology.graph, t.orgs, dict);
  std::set<EdgeKey> truth;
  for (const auto& [e, l] : t.topology.labels)
    if (l.kind == RelKind::S2S) truth.insert(e);
  EXPECT_EQ(s, truth);
}

TEST(PropagateRoutes, DirectCustomerRoute) {
  GroundTruth g;
  g.topology = hand({{EdgeKey(1, 2), RelationshipLabel::c2p(2)}});
  g.vantage_points = {1};
  auto snaps = propagate_routes(g);
  ASSERT_EQ(snaps.size(), 1u);
  EXPECT_EQ(snaps[0].paths, (std::set<AsPath>{{1, 2}}));
}

TEST(PropagateRoutes, PeersExportCustomersOnly) {
  GroundTruth g;
  // 10 and 20 peer; 11 is 10's customer, 21 is 20's customer, 30 is 20's provider
  g.topology = hand({{EdgeKey(10, 20), RelationshipLabel::p2p()},
                     {EdgeKey(10, 11), RelationshipLabel::c2p(10)},
                     {EdgeKey(20, 21), RelationshipLabel::c2p(20)},
                     {EdgeKey(20, 30), RelationshipLabel::c2p(30)}});
  g.vantage_points = {10};
  auto paths = propagate_routes(g)[0].paths;
  EXPECT_TRUE(paths.count({10, 20, 21}));
  EXPECT_FALSE(paths.count({10, 20, 30}));  // a peer does not export its provider
}

TEST(PropagateRoutes, PrefersCustomerRoutesAndShortPaths) {
  GroundTruth g;
  // 1 reaches 4 through customer 2 (two hops) rather than via peer 3 (also two hops)
  g.topology = hand({{EdgeKey(1, 2), RelationshipLabel::c2p(1)},
                     {EdgeKey(2, 4), RelationshipLabel::c2p(2)},
                     {EdgeKey(1, 3), RelationshipLabel::p2p()},
                     {EdgeKey(3, 4), RelationshipLabel::c2p(3)}});
  g.vantage_points = {1};
  auto paths = propagate_routes(g)[0].paths;
  EXPECT_TRUE(paths.count({1, 2, 4}));
  EXPECT_FALSE(paths.count({1, 3, 4}));
}

TEST(PropagateRoutes, EveryPathValleyFreeAndDeterministic) {
  auto t = generate_topology(small(), 3);
  auto a = propagate_routes(t, 1), b = propagate_routes(t, 4);
  ASSERT_EQ(a.size(), t.vantage_points.size());
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].paths, b[i].paths);
    for (const auto& p : a[i].paths) {
      EXPECT_TRUE(is_valid_path(p));
      EXPECT_TRUE(is_valley_free(p, t.topology.labels));
      int peers = 0;
      for (std::size_t k = 0; k + 1 < p.size(); ++k) peers += t.topology.labels.at(EdgeKey(p[k], p[k + 1])).kind == RelKind::P2P;
      EXPECT_LE(peers, 1);
      ++n;
    }
  }
  EXPECT_GT(n, 0u);
}

TEST(Perturb, RateZeroIsIdentityRateOneCorruptsEveryPath) {
  Snapshot s;
  s.paths = {{1, 2, 3}, {4, 5, 6, 7}, {2, 5}};
  EXPECT_EQ(perturb({s}, 0.0, 1)[0].paths, s.paths);
  auto noisy = perturb({s}, 1.0, 1)[0];
  for (const auto& p : noisy.paths) {
    EXPECT_FALSE(s.paths.count(p));
    EXPECT_TRUE(is_valid_path(p));
  }
  EXPECT_THROW(perturb({s}, 1.5, 1), std::invalid_argument);
}

TEST(Perturb, SingleCorruptionPerPath) {
  Snapshot s;
  s.paths = {{1, 2, 3}};
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto q = *perturb({s}, 1.0, seed)[0].paths.begin();
    if (q.size() == 3) {
      int moved = 0;
      for (int i = 0; i < 3; ++i) moved += q[i] != AsPath{1, 2, 3}[i];
      EXPECT_EQ(moved, 2);
    } else {
      ASSERT_EQ(q.size(), 4u);
      AsPath rest;
      for (Asn a : q)
        if (a == 1 || a == 2 || a == 3) rest.push_back(a);
      EXPECT_EQ(rest, (AsPath{1, 2, 3}));
    }
  }
}

TEST(Perturb, CorruptedPathsAreLessPersistent) {
  auto t = generate_topology(small(), 11);
  auto snaps = emit_snapshots(t, 8, 0.05, 4);
  auto clean = merge_snapshots(propagate_routes(t));
  auto counts = persistency(snaps);
  double clean_sum = 0, noisy_sum = 0;
  std::size_t nc = 0, nn = 0;
  for (const auto& [p, c] : counts) {
    if (clean.paths.count(p)) {
      clean_sum += static_cast<double>(c);
      ++nc;
    } else {
      noisy_sum += static_cast<double>(c);
      ++nn;
    }
  }
  ASSERT_GT(nn, 0u);
  EXPECT_LT(noisy_sum / static_cast<double>(nn), clean_sum / static_cast<double>(nc));
  EXPECT_EQ(emit_snapshots(t, 3, 0.05, 4)[2].paths, emit_snapshots(t, 3, 0.05, 4, 4)[2].paths);
}

TEST(Score, IdentityAndReversal) {
  auto t = generate_topology(small(), 2);
  auto r = score(t.topology, t.topology);
  for (auto k : {RelKind::C2P, RelKind::P2P, RelKind::S2S})
    if (r.kind(k).total) EXPECT_EQ(r.kind(k).percent(), 100.0);
  EXPECT_EQ(r.overall.percent(), 100.0);
  EXPECT_EQ(r.coverage(), 1.0);

  auto truth = hand({{EdgeKey(1, 2), RelationshipLabel::c2p(2)}});
  auto flipped = hand({{EdgeKey(1, 2), RelationshipLabel::c2p(1)}});
  auto f = score(flipped, truth);
  EXPECT_EQ(f.kind(RelKind::C2P).percent(), 0.0);
  EXPECT_EQ(f.c2p_reversed, 1u);
  EXPECT_EQ(f.confusion[0][0], 1u);
}

TEST(Score, OnlySharedLinksCount) {
  auto truth = hand({{EdgeKey(1, 2), RelationshipLabel::c2p(2)}, {EdgeKey(2, 3), RelationshipLabel::p2p()}});
  auto inferred = hand({{EdgeKey(1, 2), RelationshipLabel::p2p()}, {EdgeKey(5, 6), RelationshipLabel::p2p()}});
  auto r = score(inferred, truth);
  EXPECT_EQ(r.scored, 1u);
  EXPECT_EQ(r.kind(RelKind::P2P).total, 1u);
  EXPECT_EQ(r.kind(RelKind::P2P).correct, 0u);
  EXPECT_EQ(r.confusion[1][0], 1u);
  EXPECT_DOUBLE_EQ(r.coverage(), 0.5);
  auto missing = missing_fraction_by_kind(truth, inferred.graph);
  EXPECT_EQ(missing[0], 0.0);
  EXPECT_EQ(missing[1], 1.0);
}
