#include <gtest/gtest.h>

#include <random>

#include "support/errors.hpp"
#include "support/fixtures.hpp"

using namespace polcut;
using namespace polcut::testing;

namespace {

std::vector<std::vector<std::string>> routes(const LabeledDigraph& g, const CutReport& r) {
  std::vector<std::vector<std::string>> out;
  for (const auto& p : r.paths) {
    std::vector<std::string> nodes{g.node_name(g.edge(p.edges.front()).src)};
    for (EdgeId id : p.edges) nodes.push_back(g.node_name(g.edge(id).dst));
    out.push_back(nodes);
  }
  return out;
}

/// Conservation and capacity bounds of a flow on G'.
void check_flow(const TransformedGraph& tg, const FlowResult& f) {
  std::vector<Rational> net(tg.node_count(), Rational(0));
  for (std::size_t i = 0; i < tg.edges.size(); ++i) {
    Rational x = f.edge_flow(i);
    EXPECT_GE(x, 0);
    auto cap = transformed_capacity(tg.edges[i], f.mode);
    if (!cap.is_unbounded()) {
      EXPECT_LE(x, cap.value());
    }
    net[tg.edges[i].from] -= x;
    net[tg.edges[i].to] += x;
  }
  for (std::size_t v = 0; v < tg.node_count(); ++v) {
    if (v == tg.source) EXPECT_EQ(net[v], -f.value);
    else if (v == tg.sink) EXPECT_EQ(net[v], f.value);
    else EXPECT_EQ(net[v], 0);
  }
}

}  // namespace

TEST(MaxFlow, ChainBounds) {
  auto tg = tensor_transform(chain_graph(), prepare_policy(chain_nfa()), "v1", "v3");
  auto up = max_flow(tg, BoundMode::Upper);
  auto lo = max_flow(tg, BoundMode::Lower);
  EXPECT_EQ(up.value, Rational(1));
  EXPECT_EQ(lo.value, Rational(1, 2));
  check_flow(tg, up);
  check_flow(tg, lo);
}

TEST(MaxFlow, TriangleBothModes) {
  auto tg = tensor_transform(vf_triangle(), prepare_policy(preset("valley-free").nfa), "A", "C");
  EXPECT_EQ(max_flow(tg, BoundMode::Upper).value, Rational(2));
  EXPECT_EQ(max_flow(tg, BoundMode::Lower).value, Rational(2));
}

TEST(MaxFlow, UnboundedOnlyRouteIsRejected) {
  TransformedGraph tg;
  tg.vertex_names = {"v"};
  tg.state_names = {"q0", "q1"};
  tg.nodes = {{0, 0}, {0, 1}};
  tg.edges.push_back(TransformedEdge{});
  tg.edges[0].from = 0;
  tg.edges[0].to = 1;
  tg.source = 0;
  tg.sink = 1;
  EXPECT_EQ(code_of([&] { max_flow(tg, BoundMode::Upper); }), Errc::UnboundedFlow);
  tg.sink = 0;
  EXPECT_EQ(code_of([&] { max_flow(tg, BoundMode::Upper); }), Errc::SourceEqualsSink);
}

TEST(MaxFlow, RationalCapacities) {
  Alphabet a{"a"};
  auto g = build_graph(a, {{"x", "y", "a", Rational(1, 3)}, {"x", "y", "a", Rational(1, 4)}, {"y", "z", "a", 5}});
  auto r = min_cut_bounds(g, compile_policy("a a", a), "x", "z");
  EXPECT_EQ(r.upper, Rational(7, 12));
  EXPECT_EQ(r.lower, Rational(7, 24));
}

TEST(MaxFlow, FlowsAreFeasibleOnRandomInstances) {
  std::mt19937_64 rng(53);
  GraphShape shape;
  shape.max_capacity = 4;
  for (int i = 0; i < 150; ++i) {
    auto g = random_graph(rng, shape);
    auto tg = prune_unreachable(tensor_transform(g, prepare_policy(random_nfa(rng)), g.node_name(0), g.node_name(1)));
    for (auto mode : {BoundMode::Upper, BoundMode::Lower}) check_flow(tg, max_flow(tg, mode));
  }
}

TEST(MinCutBounds, TriangleReport) {
  auto g = vf_triangle();
  auto r = min_cut_bounds(g, preset("valley-free").nfa, "A", "C");
  EXPECT_EQ(r.lower, Rational(2));
  EXPECT_EQ(r.upper, Rational(2));
  auto got = routes(g, r);
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, (std::vector<std::vector<std::string>>{{"A", "B", "C"}, {"A", "C"}}));
  for (const auto& p : r.paths) EXPECT_EQ(p.flow, Rational(1));
}

TEST(MinCutBounds, DisconnectedPair) {
  Alphabet a{"a"};
  auto g = build_graph(a, {{"x", "y", "a", 1}, {"z", "w", "a", 1}});
  auto r = min_cut_bounds(g, compile_policy("a*", a), "x", "w");
  EXPECT_EQ(r.lower, 0);
  EXPECT_EQ(r.upper, 0);
  EXPECT_TRUE(r.paths.empty());
}

TEST(MinCutBounds, ChainReport) {
  auto g = chain_graph();
  auto r = min_cut_bounds(g, chain_nfa(), "v1", "v3");
  EXPECT_EQ(r.lower, Rational(1, 2));
  EXPECT_EQ(r.upper, Rational(1));
  EXPECT_FALSE(r.exact);
  ASSERT_EQ(r.paths.size(), 1u);
  EXPECT_EQ(routes(g, r)[0], (std::vector<std::string>{"v1", "v2", "v3"}));
  EXPECT_TRUE(nfa_accepts(chain_nfa(), path_labels(g, r.paths[0])));
  ASSERT_EQ(r.symbols.size(), 1u);
  EXPECT_EQ(r.symbols[0].n_s, 2u);
}

TEST(MinCutBounds, ParallelMatchesSequential) {
  std::mt19937_64 rng(59);
  for (int i = 0; i < 50; ++i) {
    auto g = random_graph(rng);
    auto nfa = random_nfa(rng);
    CutOptions par;
    par.parallel_bounds = true;
    auto a = min_cut_bounds(g, nfa, g.node_name(0), g.node_name(1));
    auto b = min_cut_bounds(g, nfa, g.node_name(0), g.node_name(1), par);
    EXPECT_EQ(a.lower, b.lower);
    EXPECT_EQ(a.upper, b.upper);
  }
}

TEST(MinCutBounds, ReportInvariantsOnRandomInstances) {
  std::mt19937_64 rng(61);
  GraphShape shape;
  shape.max_capacity = 3;
  for (int i = 0; i < 300; ++i) {
    auto g = random_graph(rng, shape);
    auto nfa = random_nfa(rng);
    auto r = min_cut_bounds(g, nfa, g.node_name(0), g.node_name(1));
    EXPECT_LE(r.lower, r.upper);
    if (r.exact) {
      EXPECT_EQ(r.lower, r.upper);
    }
    Rational total = 0;
    for (const auto& p : r.paths) {
      total += p.flow;
      EXPECT_TRUE(nfa_accepts(nfa, path_labels(g, p)));
      EXPECT_EQ(g.edge(p.edges.front()).src, 0u);
      EXPECT_EQ(g.edge(p.edges.back()).dst, 1u);
    }
    EXPECT_LE(total, r.upper);
  }
}

TEST(MinCutBounds, IntegralUpperWithIntegerCapacities) {
  std::mt19937_64 rng(67);
  GraphShape shape;
  shape.max_capacity = 5;
  for (int i = 0; i < 200; ++i) {
    auto g = random_graph(rng, shape);
    auto r = min_cut_bounds(g, random_nfa(rng), g.node_name(0), g.node_name(1));
    EXPECT_EQ(denominator(r.upper), 1);
  }
}

TEST(MinCutBounds, ScalesWithCapacities) {
  std::mt19937_64 rng(71);
  GraphShape shape;
  shape.max_capacity = 3;
  for (int i = 0; i < 100; ++i) {
    auto g = random_graph(rng, shape);
    auto nfa = random_nfa(rng);
    GraphBuilder b(g.alphabet());
    for (const auto& n : g.node_names()) b.add_node(n);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      auto s = g.spec(EdgeId{e});
      b.add_edge(s.src, s.dst, s.label, s.capacity.scaled_by(3));
    }
    auto scaled = std::move(b).build();
    auto r1 = min_cut_bounds(g, nfa, g.node_name(0), g.node_name(1));
    auto r3 = min_cut_bounds(scaled, nfa, g.node_name(0), g.node_name(1));
    EXPECT_EQ(r3.lower, 3 * r1.lower);
    EXPECT_EQ(r3.upper, 3 * r1.upper);
  }
}

TEST(MinCutBounds, SplitNodeCapsThroughput) {
  // Two parallel edges into and out of m; a node capacity of 1 on m caps the
  // diversity that the edges alone would allow (2).
  Alphabet a{"a"};
  auto g = build_graph(a, {{"s", "m", "a", 1}, {"s", "m", "a", 1}, {"m", "t", "a", 1}, {"m", "t", "a", 1}});
  auto policy = [](const LabeledDigraph& h) {
    Alphabet sigma = h.alphabet();
    return compile_policy(sigma.contains("x") ? "a x a" : "a a", sigma);
  };
  EXPECT_EQ(min_cut_bounds(g, policy(g), "s", "t").upper, 2);
  auto split = split_nodes(g, {{"m", {"x", 1}}});
  auto r = min_cut_bounds(split, policy(split), "s", "t");
  EXPECT_EQ(r.upper, 1);
  EXPECT_EQ(oracle::max_disjoint_packing(oracle::enumerate_compliant_paths(split, policy(split), "s", "t")), 1u);

  // Splitting the query source itself: the route must start on s_in.
  auto at_source = split_nodes(g, {{"s", {"x", 1}}});
  auto r2 = min_cut_bounds(at_source, compile_policy("x a a", at_source.alphabet()), "s_in", "t");
  EXPECT_EQ(r2.upper, 1);
}

TEST(ExtractPaths, ZeroFlowGivesNothing) {
  Alphabet a{"a", "b"};
  auto g = build_graph(a, {{"x", "y", "a", 1}});
  auto tg = tensor_transform(g, prepare_policy(compile_policy("b", a)), "x", "y");
  EXPECT_TRUE(extract_paths(tg, max_flow(tg, BoundMode::Upper)).empty());
}

TEST(ExtractPaths, CyclesAreDiscarded) {
  // Hand-made flow: one unit s -> t plus one unit circulating on x <-> y.
  TransformedGraph tg;
  tg.vertex_names = {"s", "t", "x", "y"};
  tg.state_names = {"q"};
  tg.alphabet = Alphabet{"a"};
  tg.nodes = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  auto mapped = [](std::size_t from, std::size_t to, std::size_t source) {
    TransformedEdge e;
    e.from = from;
    e.to = to;
    e.kind = TransformedEdge::Kind::Mapped;
    e.source = EdgeId{source};
    e.symbol = 0;
    e.upper = Capacity(1);
    return e;
  };
  tg.edges = {mapped(0, 2, 0), mapped(2, 3, 1), mapped(3, 2, 2), mapped(2, 1, 3)};
  tg.source = 0;
  tg.sink = 1;
  FlowResult flow;
  flow.value = 1;
  flow.scaled_flows = {1, 1, 1, 1};
  auto paths = extract_paths(tg, flow);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].edges, (std::vector<EdgeId>{EdgeId{0}, EdgeId{3}}));
  EXPECT_EQ(paths[0].flow, Rational(1));
}

TEST(ExtractPaths, PathFlowsSumToValue) {
  std::mt19937_64 rng(73);
  for (int i = 0; i < 200; ++i) {
    auto g = random_graph(rng);
    auto tg = prune_unreachable(tensor_transform(g, prepare_policy(random_nfa(rng)), g.node_name(0), g.node_name(1)));
    auto flow = max_flow(tg, BoundMode::Upper);
    auto paths = extract_paths(tg, flow);
    Rational total = 0;
    for (const auto& p : paths) total += p.flow;
    EXPECT_EQ(total, flow.value);
  }
}
