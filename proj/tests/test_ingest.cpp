#include <gtest/gtest.h>

#include <sstream>

#include "support/errors.hpp"
#include "support/fixtures.hpp"

using namespace polcut;
using namespace polcut::ingest;
using polcut::testing::code_of;

namespace {

std::multiset<std::tuple<std::string, std::string, std::string>> edge_set(const LabeledDigraph& g) {
  std::multiset<std::tuple<std::string, std::string, std::string>> out;
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    auto s = g.spec(EdgeId{i});
    out.emplace(s.src, s.dst, s.label);
  }
  return out;
}

std::vector<IxpMember> members(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  return parse_members_csv(in);
}

}  // namespace

TEST(ParseAsRel, Records) {
  auto set = parse_as_rel_string("# header\n1|2|-1\n3|4|0|bgp\n");
  ASSERT_EQ(set.records.size(), 2u);
  EXPECT_EQ(set.records[0], (AsRelationship{1, 2, Relationship::ProviderToCustomer}));
  EXPECT_EQ(set.records[1], (AsRelationship{3, 4, Relationship::PeerToPeer}));
}

TEST(ParseAsRel, ConflictsAndDuplicates) {
  EXPECT_EQ(code_of([] { parse_as_rel_string("1|2|-1\n2|1|-1\n"); }), Errc::ConflictingRelationship);
  EXPECT_EQ(code_of([] { parse_as_rel_string("1|2|-1\n1|2|0\n"); }), Errc::ConflictingRelationship);
  EXPECT_EQ(parse_as_rel_string("1|2|-1\n1|2|-1\n3|4|0\n4|3|0\n").records.size(), 2u);
}

TEST(ParseAsRel, MalformedLinesCarryLineNumbers) {
  for (const char* bad : {"1|2\n", "1|x|0\n", "1|2|5\n", "0|2|0\n", "7|7|0\n"}) {
    try {
      parse_as_rel_string(std::string("# c\n") + bad);
      ADD_FAILURE() << bad;
    } catch (const PositionedError& e) {
      EXPECT_EQ(e.code(), Errc::ParseError) << bad;
      EXPECT_EQ(e.position(), 2u) << bad;
    }
  }
}

TEST(ToLabeledGraph, EdgesPerRecord) {
  auto p2c = to_labeled_graph(parse_as_rel_string("1|2|-1\n"));
  EXPECT_EQ(edge_set(p2c), (std::multiset<std::tuple<std::string, std::string, std::string>>{
                               {"1", "2", "p2c"}, {"2", "1", "c2p"}}));
  auto p2p = to_labeled_graph(parse_as_rel_string("3|4|0\n"));
  EXPECT_EQ(edge_set(p2p), (std::multiset<std::tuple<std::string, std::string, std::string>>{
                               {"3", "4", "p2p"}, {"4", "3", "p2p"}}));
}

TEST(ToLabeledGraph, TriangleFromRelationships) {
  // 2 is the provider of 1 and 3; 1 and 3 peer. Same shape as the A/B/C fixture.
  auto g = to_labeled_graph(parse_as_rel_string("2|1|-1\n2|3|-1\n1|3|0\n"));
  auto rename = [](std::string s) { return s == "1" ? "A" : s == "2" ? "B" : "C"; };
  std::multiset<std::tuple<std::string, std::string, std::string>> got;
  for (const auto& [s, d, l] : edge_set(g)) got.emplace(rename(s), rename(d), l);
  EXPECT_EQ(got, edge_set(polcut::testing::vf_triangle()));
  auto r = min_cut_bounds(g, preset("valley-free").nfa, "1", "3");
  EXPECT_EQ(r.upper, 2);
}

TEST(ToLabeledGraph, TwoEdgesPerRecordAndReversePairs) {
  auto set = parse_as_rel_string("1|2|-1\n2|3|-1\n1|4|0\n4|5|-1\n3|5|0\n");
  auto g = to_labeled_graph(set);
  EXPECT_EQ(g.edge_count(), 2 * set.records.size());
  auto edges = edge_set(g);
  for (const auto& [s, d, l] : edges) {
    if (l == "p2c") {
      EXPECT_TRUE(edges.count({d, s, "c2p"}));
    }
    if (l == "c2p") {
      EXPECT_TRUE(edges.count({d, s, "p2c"}));
    }
  }
}

TEST(AugmentPeering, OpenMembersFormClique) {
  auto g = to_labeled_graph(parse_as_rel_string("10|11|-1\n"));
  auto out = augment_peering(g, members("asn,policy\n1,open\n2,open\n3,Open\n4,selective\n"), PeeringPolicy::Open);
  EXPECT_EQ(out.edge_count(), g.edge_count() + 6);
}

TEST(AugmentPeering, ExistingRelationshipWins) {
  auto g = to_labeled_graph(parse_as_rel_string("1|2|-1\n"));
  auto out = augment_peering(g, members("1,open\n2,open\n"), PeeringPolicy::Open);
  EXPECT_EQ(edge_set(out), edge_set(g));
}

TEST(AugmentPeering, EmptyClassAndIdempotence) {
  auto g = to_labeled_graph(parse_as_rel_string("1|2|-1\n3|4|0\n"));
  auto m = members("1,open\n3,open\n5,selective\n2,open\n");
  EXPECT_EQ(edge_set(augment_peering(g, m, PeeringPolicy::Restrictive)), edge_set(g));
  auto once = augment_peering(g, m, PeeringPolicy::Open);
  auto twice = augment_peering(once, m, PeeringPolicy::Open);
  EXPECT_EQ(edge_set(once), edge_set(twice));
}

TEST(MembersCsv, Errors) {
  EXPECT_EQ(code_of([] { members("1,open\n2,sometimes\n"); }), Errc::ParseError);
  EXPECT_EQ(code_of([] { members("1;open\n"); }), Errc::ParseError);
}

TEST(Depeer, RemovesBothDirectionsOnly) {
  auto g = to_labeled_graph(parse_as_rel_string("1|2|0\n1|3|-1\n"));
  auto d = depeer(g, "1", "2");
  EXPECT_EQ(d.edge_count(), 2u);
  EXPECT_EQ(edge_set(depeer(g, "1", "3")), edge_set(g));
  EXPECT_EQ(code_of([&] { depeer(g, "1", "9"); }), Errc::UnknownNode);
}

TEST(WeightedSample, Support) {
  EXPECT_EQ(code_of([] { weighted_sample_pairs({{1, 1}, {2, 0}}, 1, 0); }), Errc::InsufficientSupport);
  auto pairs = weighted_sample_pairs({{1, 1}, {2, 1}}, 1000, 42);
  ASSERT_EQ(pairs.size(), 1000u);
  for (const auto& [a, b] : pairs) {
    EXPECT_TRUE((a == 1 && b == 2) || (a == 2 && b == 1));
  }
}

TEST(WeightedSample, Marginals) {
  // First endpoint: P(A) = 3/5. Second endpoint, redrawn until it differs:
  // P(A) = P(B first) * 3/4 + P(C first) * 3/4 = 3/10.
  const Asn a = 1, b = 2, c = 3;
  auto pairs = weighted_sample_pairs({{a, 3}, {b, 1}, {c, 1}}, 100000, 7);
  double first = 0, second = 0;
  for (const auto& [x, y] : pairs) {
    first += x == a;
    second += y == a;
    ASSERT_NE(x, y);
  }
  EXPECT_NEAR(first / 1e5, 0.6, 0.02);
  EXPECT_NEAR(second / 1e5, 0.3, 0.02);
}

TEST(WeightedSample, DeterministicPerSeed) {
  WeightTable w{{1, 5}, {2, 3}, {3, 9}, {4, 1}};
  EXPECT_EQ(weighted_sample_pairs(w, 500, 9), weighted_sample_pairs(w, 500, 9));
  EXPECT_NE(weighted_sample_pairs(w, 500, 9), weighted_sample_pairs(w, 500, 10));
}

TEST(WeightsCsv, ParsesAndSums) {
  std::istringstream in("asn,address_count\n1,256\n2,1024\n1,256\n");
  auto w = parse_weights_csv(in);
  EXPECT_EQ(w.at(1), 512u);
  EXPECT_EQ(w.at(2), 1024u);
  std::istringstream bad("1,12x\n");
  EXPECT_EQ(code_of([&] { parse_weights_csv(bad); }), Errc::ParseError);
}

TEST(CustomerCone, ChainAndExclusion) {
  // T1 -> X -> Y -> Z and T1' -> Y, all p2c.
  auto g = to_labeled_graph(parse_as_rel_string("1|2|-1\n2|3|-1\n3|4|-1\n5|3|-1\n"));
  EXPECT_EQ(exclusive_customer_cone(g, "1", {}, 3), (std::vector<std::string>{"2", "3", "4"}));
  EXPECT_EQ(exclusive_customer_cone(g, "1", {"5"}, 3), (std::vector<std::string>{"2"}));
  EXPECT_TRUE(exclusive_customer_cone(g, "1", {}, 0).empty());
  EXPECT_EQ(exclusive_customer_cone(g, "1", {}, 1), (std::vector<std::string>{"2"}));
  EXPECT_EQ(code_of([&] { exclusive_customer_cone(g, "99", {}, 3); }), Errc::UnknownNode);
}
