#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "polcut/capacity.hpp"
#include "polcut/decomposition.hpp"
#include "polcut/graph.hpp"
#include "polcut/policy.hpp"

namespace polcut {

/// Block k of Delta_s after aggregation: a single transition from `from` to
/// `to`, where either end is an aggregator state when that side of the
/// original block has more than one state.
struct AggregatedBlock {
  Symbol symbol = 0;
  std::size_t index = 0;
  Block original;
  State from = 0;
  State to = 0;
};

/// The normalized policy automaton plus aggregator states and the epsilon
/// transitions that feed and drain them.
struct AugmentedNfa {
  PolicyNfa base;
  std::vector<std::string> state_names;  // base states first, then aggregators
  std::vector<State> aggregator_states;
  std::vector<StatePair> epsilon_pairs;      // original epsilon transitions plus additions
  std::vector<StatePair> epsilon_additions;  // added for aggregators only
  std::vector<TransitionDecomposition> decompositions;  // indexed by symbol
  std::vector<std::vector<AggregatedBlock>> aggregated;  // indexed by symbol

  std::size_t state_count() const noexcept { return state_names.size(); }
  State start() const noexcept { return base.start(); }
  State terminal() const { return base.accepting().front(); }
  std::size_t n_s(Symbol s) const { return decompositions.at(s).n_s(); }
  bool exact() const { return all_exact(decompositions); }
  std::size_t max_n_s() const {
    std::size_t m = 1;
    for (const auto& d : decompositions) m = std::max(m, d.n_s());
    return m;
  }
};

inline AugmentedNfa augment_aggregators(const PolicyNfa& nfa, const std::vector<TransitionDecomposition>& decomps) {
  if (nfa.accepting().size() != 1) {
    throw Error(Errc::MultipleTerminals, "augment_aggregators needs exactly one terminal state; normalize first");
  }
  if (decomps.size() != nfa.alphabet().size()) {
    throw Error(Errc::AlphabetMismatch, "expected one decomposition per policy symbol");
  }
  AugmentedNfa aug;
  aug.base = nfa;
  for (State q = 0; q < nfa.state_count(); ++q) aug.state_names.push_back(nfa.state_name(q));
  for (const auto& t : nfa.transitions()) {
    if (t.symbol == kEpsilon) aug.epsilon_pairs.emplace_back(t.from, t.to);
  }
  aug.decompositions = decomps;
  aug.aggregated.resize(decomps.size());

  auto new_state = [&](std::string name) {
    auto q = static_cast<State>(aug.state_names.size());
    aug.state_names.push_back(std::move(name));
    aug.aggregator_states.push_back(q);
    return q;
  };
  auto add_eps = [&](State a, State b) {
    aug.epsilon_pairs.emplace_back(a, b);
    aug.epsilon_additions.emplace_back(a, b);
  };

  for (Symbol s = 0; s < decomps.size(); ++s) {
    const std::string& label = nfa.alphabet().name(s);
    for (std::size_t k = 0; k < decomps[s].blocks.size(); ++k) {
      const Block& b = decomps[s].blocks[k];
      AggregatedBlock agg{s, k, b, b.from.front(), b.to.front()};
      if (b.from.size() > 1) {
        agg.from = new_state("q'[" + label + "#" + std::to_string(k) + "]");
        for (State q : b.from) add_eps(q, agg.from);
      }
      if (b.to.size() > 1) {
        agg.to = new_state("q''[" + label + "#" + std::to_string(k) + "]");
        for (State q : b.to) add_eps(agg.to, q);
      }
      aug.aggregated[s].push_back(std::move(agg));
    }
  }
  return aug;
}

/// Normalize, decompose every symbol, and add aggregators.
inline AugmentedNfa prepare_policy(const PolicyNfa& nfa) {
  PolicyNfa normalized = normalize_terminals(nfa);
  return augment_aggregators(normalized, decompose_all(normalized));
}

struct ProductNode {
  NodeIndex vertex = 0;
  State state = 0;
  friend bool operator==(const ProductNode&, const ProductNode&) = default;
};

struct TransformedEdge {
  enum class Kind : std::uint8_t { Mapped, Epsilon };

  std::size_t from = 0;
  std::size_t to = 0;
  Kind kind = Kind::Epsilon;
  EdgeId source{};           // mapped only
  Symbol symbol = kEpsilon;  // mapped only
  std::size_t block = 0;     // mapped only
  Capacity upper = Capacity::unbounded();
  std::uint32_t divisor = 1;  // n_s of `symbol`

  bool mapped() const noexcept { return kind == Kind::Mapped; }
  Capacity lower() const { return upper.divided_by(divisor); }
};

/// G' = (V', E') with provenance and both capacity functions.
struct TransformedGraph {
  std::vector<std::string> vertex_names;
  std::vector<std::string> state_names;
  Alphabet alphabet;
  std::vector<ProductNode> nodes;
  std::vector<TransformedEdge> edges;
  std::size_t source = 0;
  std::size_t sink = 0;
  std::size_t max_divisor = 1;

  std::size_t node_count() const noexcept { return nodes.size(); }
  std::size_t edge_count() const noexcept { return edges.size(); }
  std::string node_name(std::size_t i) const {
    return vertex_names.at(nodes.at(i).vertex) + "@" + state_names.at(nodes.at(i).state);
  }
  const Capacity& cap_upper(std::size_t e) const { return edges.at(e).upper; }
  Capacity cap_lower(std::size_t e) const { return edges.at(e).lower(); }
  std::size_t mapped_count() const {
    return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [](const auto& e) { return e.mapped(); }));
  }
};

/// Tensor product of every label subgraph with its aggregated relation, plus
/// the epsilon edges at every graph node. V' = V x Q_aug with index v*|Q|+q.
inline TransformedGraph tensor_transform(const LabeledDigraph& g, const AugmentedNfa& aug, std::string_view source,
                                         std::string_view sink) {
  NodeIndex v1 = g.node(source);
  NodeIndex vn = g.node(sink);
  if (v1 == vn) throw Error(Errc::SourceEqualsSink, "source and sink are both '" + std::string(source) + "'");
  const Alphabet& policy_sigma = aug.base.alphabet();
  std::vector<Symbol> to_policy(g.alphabet().size());
  for (Symbol s = 0; s < g.alphabet().size(); ++s) {
    to_policy[s] = policy_sigma.id(g.alphabet().name(s), Errc::UnknownLabel);
  }

  const std::size_t q_count = aug.state_count();
  TransformedGraph tg;
  tg.vertex_names = g.node_names();
  tg.state_names = aug.state_names;
  tg.alphabet = policy_sigma;
  tg.max_divisor = aug.max_n_s();
  tg.nodes.reserve(g.node_count() * q_count);
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    for (State q = 0; q < q_count; ++q) tg.nodes.push_back({v, q});
  }
  auto at = [q_count](NodeIndex v, State q) { return v * q_count + q; };
  tg.source = at(v1, aug.start());
  tg.sink = at(vn, aug.terminal());

  std::vector<std::vector<EdgeId>> by_label(g.alphabet().size());
  for (std::size_t i = 0; i < g.edge_count(); ++i) by_label[g.edges()[i].label].push_back(EdgeId{i});

  for (Symbol gs = 0; gs < g.alphabet().size(); ++gs) {
    Symbol s = to_policy[gs];
    const auto& blocks = aug.aggregated[s];
    auto divisor = static_cast<std::uint32_t>(aug.n_s(s));
    for (EdgeId id : by_label[gs]) {
      const GraphEdge& e = g.edge(id);
      for (const auto& b : blocks) {
        TransformedEdge te;
        te.from = at(e.src, b.from);
        te.to = at(e.dst, b.to);
        te.kind = TransformedEdge::Kind::Mapped;
        te.source = id;
        te.symbol = s;
        te.block = b.index;
        te.upper = e.capacity;
        te.divisor = divisor;
        tg.edges.push_back(std::move(te));
      }
    }
  }
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    for (const auto& [a, b] : aug.epsilon_pairs) {
      TransformedEdge te;
      te.from = at(v, a);
      te.to = at(v, b);
      tg.edges.push_back(std::move(te));
    }
  }
  return tg;
}

/// Keeps only nodes on some source -> sink route (source and sink always stay).
inline TransformedGraph prune_unreachable(const TransformedGraph& tg) {
  const std::size_t n = tg.node_count();
  std::vector<std::vector<std::size_t>> out(n), in(n);
  for (std::size_t i = 0; i < tg.edges.size(); ++i) {
    out[tg.edges[i].from].push_back(i);
    in[tg.edges[i].to].push_back(i);
  }
  auto sweep = [&](std::size_t start, bool forward) {
    std::vector<char> seen(n, 0);
    std::deque<std::size_t> queue{start};
    seen[start] = 1;
    while (!queue.empty()) {
      std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t e : forward ? out[u] : in[u]) {
        std::size_t w = forward ? tg.edges[e].to : tg.edges[e].from;
        if (!seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
      }
    }
    return seen;
  };
  auto fwd = sweep(tg.source, true);
  auto bwd = sweep(tg.sink, false);

  TransformedGraph pruned;
  pruned.vertex_names = tg.vertex_names;
  pruned.state_names = tg.state_names;
  pruned.alphabet = tg.alphabet;
  pruned.max_divisor = tg.max_divisor;
  constexpr std::size_t kDropped = static_cast<std::size_t>(-1);
  std::vector<std::size_t> remap(n, kDropped);
  for (std::size_t u = 0; u < n; ++u) {
    if ((fwd[u] && bwd[u]) || u == tg.source || u == tg.sink) {
      remap[u] = pruned.nodes.size();
      pruned.nodes.push_back(tg.nodes[u]);
    }
  }
  pruned.source = remap[tg.source];
  pruned.sink = remap[tg.sink];
  for (const auto& e : tg.edges) {
    if (remap[e.from] == kDropped || remap[e.to] == kDropped) continue;
    if (!(fwd[e.from] && bwd[e.to])) continue;
    TransformedEdge copy = e;
    copy.from = remap[e.from];
    copy.to = remap[e.to];
    pruned.edges.push_back(std::move(copy));
  }
  return pruned;
}

/// Transformed graph in the plain graph text format, nodes named `v@q`.
/// Capacities are the upper-bound ones; epsilon edges use the `eps` label.
inline void write_transformed(std::ostream& out, const TransformedGraph& tg) {
  for (const auto& e : tg.edges) {
    out << tg.node_name(e.from) << '|' << tg.node_name(e.to) << '|'
        << (e.mapped() ? tg.alphabet.name(e.symbol) : std::string(kEpsilonToken)) << '|' << e.upper.to_string()
        << '\n';
  }
}

/// One line per transformed edge, same order as write_transformed:
/// `index|mapped|source_edge|symbol|block|cap_upper|cap_lower` or `index|epsilon`.
inline void write_provenance(std::ostream& out, const TransformedGraph& tg) {
  for (std::size_t i = 0; i < tg.edges.size(); ++i) {
    const auto& e = tg.edges[i];
    if (e.mapped()) {
      out << i << "|mapped|" << e.source.index << '|' << tg.alphabet.name(e.symbol) << '|' << e.block << '|'
          << e.upper.to_string() << '|' << e.lower().to_string() << '\n';
    } else {
      out << i << "|epsilon\n";
    }
  }
}

}  // namespace polcut
