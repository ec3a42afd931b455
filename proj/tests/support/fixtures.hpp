#pragma once

// Shared fixtures, generators and independent reference checkers for the
// test suites. Nothing here calls into the transform or flow code.

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "polcut/polcut.hpp"

namespace polcut::testing {

/// A --c2p--> B is a customer-to-provider hop, etc. B is the provider of A and
/// C; A and C peer.
inline LabeledDigraph vf_triangle(long long ac_capacity = 1) {
  return build_graph(relationship_alphabet(), {
                                                  {"A", "B", "c2p", 1},
                                                  {"B", "A", "p2c", 1},
                                                  {"B", "C", "p2c", 1},
                                                  {"C", "B", "c2p", 1},
                                                  {"A", "C", "p2p", ac_capacity},
                                                  {"C", "A", "p2p", 1},
                                              });
}

/// q0 -a-> q1 -a-> q2 with q2 accepting: Delta_a = {(q0,q1),(q1,q2)}.
inline PolicyNfa chain_nfa() {
  PolicyNfa nfa(Alphabet{"a"});
  State q0 = nfa.add_state("q0");
  State q1 = nfa.add_state("q1");
  State q2 = nfa.add_state("q2");
  nfa.add_transition(q0, 0, q1);
  nfa.add_transition(q1, 0, q2);
  nfa.set_start(q0);
  nfa.add_accepting(q2);
  return nfa;
}

inline LabeledDigraph chain_graph() {
  return build_graph(Alphabet{"a"}, {{"v1", "v2", "a", 1}, {"v2", "v3", "a", 1}});
}

/// Hand-built automaton from `from symbol to` triples; start `s`, accept `f`.
inline PolicyNfa nfa_from(const Alphabet& sigma, const std::vector<std::tuple<std::string, std::string, std::string>>& rows,
                          const std::string& start = "s", const std::vector<std::string>& accept = {"f"}) {
  PolicyNfa nfa(sigma);
  std::map<std::string, State> ids;
  auto id = [&](const std::string& n) {
    if (auto it = ids.find(n); it != ids.end()) return it->second;
    State q = nfa.add_state(n);
    ids.emplace(n, q);
    return q;
  };
  nfa.set_start(id(start));
  for (const auto& [from, sym, to] : rows) {
    nfa.add_transition(id(from), is_epsilon_token(sym) ? kEpsilon : sigma.id(sym), id(to));
  }
  for (const auto& a : accept) nfa.add_accepting(id(a));
  return nfa;
}

/// A graph plus a policy and endpoints, with the value a brute-force count gives.
struct Scenario {
  LabeledDigraph graph;
  PolicyNfa nfa;
  std::string source;
  std::string sink;
};

/// One-to-many: Delta_a = {(s,p),(s,r)}. Both compliant routes share the
/// single a edge, so the diversity is 1.
inline Scenario one_to_many_fixture() {
  Alphabet sigma{"a", "b", "c"};
  return {build_graph(sigma, {{"v1", "v2", "a", 1}, {"v2", "v3", "b", 1}, {"v2", "v3", "c", 1}}),
          nfa_from(sigma, {{"s", "a", "p"}, {"s", "a", "r"}, {"p", "b", "f"}, {"r", "c", "f"}}), "v1", "v3"};
}

/// Many-to-one: Delta_a = {(p,f),(r,f)}.
inline Scenario many_to_one_fixture() {
  Alphabet sigma{"a", "b", "c"};
  return {build_graph(sigma, {{"v1", "v2", "b", 1}, {"v1", "v2", "c", 1}, {"v2", "v3", "a", 1}}),
          nfa_from(sigma, {{"s", "b", "p"}, {"s", "c", "r"}, {"p", "a", "f"}, {"r", "a", "f"}}), "v1", "v3"};
}

/// Complete many-to-many: Delta_a = {p1,p2} x {r1,r2}.
inline Scenario many_to_many_fixture() {
  Alphabet sigma{"a", "b", "c", "x", "y"};
  return {build_graph(sigma, {{"v1", "v2", "x", 1},
                              {"v1", "v2", "y", 1},
                              {"v2", "v3", "a", 1},
                              {"v3", "v4", "b", 1},
                              {"v3", "v4", "c", 1}}),
          nfa_from(sigma, {{"s", "x", "p1"},
                           {"s", "y", "p2"},
                           {"p1", "a", "r1"},
                           {"p1", "a", "r2"},
                           {"p2", "a", "r1"},
                           {"p2", "a", "r2"},
                           {"r1", "b", "f"},
                           {"r2", "c", "f"}}),
          "v1", "v4"};
}

// ---------------------------------------------------------------------------
// Reference regex matcher: backtracking over the expression tree.
// ---------------------------------------------------------------------------

inline std::set<std::size_t> match_ends(const PolicyExpr& e, const std::vector<std::string>& w, std::size_t from) {
  using K = PolicyExpr::Kind;
  std::set<std::size_t> out;
  switch (e.kind) {
    case K::Symbol:
      if (from < w.size() && w[from] == e.symbol) out.insert(from + 1);
      return out;
    case K::Concat: {
      std::set<std::size_t> cur{from};
      for (const auto& c : e.children) {
        std::set<std::size_t> next;
        for (auto p : cur) {
          auto r = match_ends(c, w, p);
          next.insert(r.begin(), r.end());
        }
        cur = std::move(next);
      }
      return cur;
    }
    case K::Alternation:
      for (const auto& c : e.children) {
        auto r = match_ends(c, w, from);
        out.insert(r.begin(), r.end());
      }
      return out;
    case K::Optional:
      out = match_ends(e.children[0], w, from);
      out.insert(from);
      return out;
    case K::Star:
    case K::Plus: {
      std::set<std::size_t> reached;
      std::vector<std::size_t> frontier{from};
      std::set<std::size_t> expanded;
      while (!frontier.empty()) {
        auto p = frontier.back();
        frontier.pop_back();
        if (!expanded.insert(p).second) continue;
        for (auto q : match_ends(e.children[0], w, p)) {
          reached.insert(q);
          frontier.push_back(q);
        }
      }
      if (e.kind == K::Star) reached.insert(from);
      return reached;
    }
  }
  return out;
}

inline bool reference_match(const PolicyExpr& e, const std::vector<std::string>& w) {
  return match_ends(e, w, 0).count(w.size()) != 0;
}

/// All words over `symbols` of length 0..max_len.
inline std::vector<std::vector<std::string>> all_words(const std::vector<std::string>& symbols, std::size_t max_len) {
  std::vector<std::vector<std::string>> out{{}};
  std::vector<std::vector<std::string>> layer{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& w : layer) {
      for (const auto& s : symbols) {
        auto x = w;
        x.push_back(s);
        next.push_back(std::move(x));
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

inline std::vector<std::string> random_word(std::mt19937_64& rng, const std::vector<std::string>& symbols,
                                            std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, symbols.size() - 1);
  std::vector<std::string> w(len(rng));
  for (auto& s : w) s = symbols[pick(rng)];
  return w;
}

inline std::vector<std::string> symbol_names(std::size_t k) {
  static const std::vector<std::string> names{"a", "b", "c", "d"};
  return {names.begin(), names.begin() + static_cast<long>(k)};
}

// ---------------------------------------------------------------------------
// Random generators
// ---------------------------------------------------------------------------

inline PolicyExpr random_expr(std::mt19937_64& rng, const std::vector<std::string>& symbols, int depth) {
  std::uniform_int_distribution<int> kind(0, depth <= 0 ? 0 : 5);
  std::uniform_int_distribution<std::size_t> pick(0, symbols.size() - 1);
  switch (kind(rng)) {
    case 0: return PolicyExpr::leaf(symbols[pick(rng)]);
    case 1: return PolicyExpr::concat({random_expr(rng, symbols, depth - 1), random_expr(rng, symbols, depth - 1)});
    case 2:
      return PolicyExpr::alternation({random_expr(rng, symbols, depth - 1), random_expr(rng, symbols, depth - 1)});
    case 3: return PolicyExpr::star(random_expr(rng, symbols, depth - 1));
    case 4: return PolicyExpr::optional(random_expr(rng, symbols, depth - 1));
    default: return PolicyExpr::plus(random_expr(rng, symbols, depth - 1));
  }
}

struct NfaShape {
  std::size_t min_states = 2;
  std::size_t max_states = 5;
  std::size_t alphabet = 3;
  double epsilon_probability = 0.1;
  std::size_t min_transitions = 1;
  std::size_t max_transitions = 9;
};

/// Random automaton over symbol_names(alphabet); state 0 starts, at least
/// one state accepts.
inline PolicyNfa random_nfa(std::mt19937_64& rng, const NfaShape& shape = {}) {
  auto names = symbol_names(shape.alphabet);
  PolicyNfa nfa{Alphabet(names)};
  std::uniform_int_distribution<std::size_t> n_states(shape.min_states, shape.max_states);
  std::size_t n = n_states(rng);
  for (std::size_t i = 0; i < n; ++i) nfa.add_state();
  nfa.set_start(0);
  std::uniform_int_distribution<State> state(0, static_cast<State>(n - 1));
  std::uniform_int_distribution<Symbol> symbol(0, static_cast<Symbol>(shape.alphabet - 1));
  std::uniform_int_distribution<std::size_t> count(shape.min_transitions, shape.max_transitions);
  std::bernoulli_distribution eps(shape.epsilon_probability);
  std::size_t m = count(rng);
  for (std::size_t i = 0; i < m; ++i) nfa.add_transition(state(rng), eps(rng) ? kEpsilon : symbol(rng), state(rng));
  std::bernoulli_distribution accept(0.35);
  for (State q = 0; q < n; ++q) {
    if (accept(rng)) nfa.add_accepting(q);
  }
  if (nfa.accepting().empty()) nfa.add_accepting(state(rng));
  return nfa;
}

struct GraphShape {
  std::size_t min_nodes = 3;
  std::size_t max_nodes = 8;
  std::size_t min_edges = 1;
  std::size_t max_edges = 14;
  std::size_t alphabet = 3;
  bool self_loops = true;
  long long max_capacity = 1;
};

inline LabeledDigraph random_graph(std::mt19937_64& rng, const GraphShape& shape = {}) {
  auto names = symbol_names(shape.alphabet);
  std::uniform_int_distribution<std::size_t> n_nodes(shape.min_nodes, shape.max_nodes);
  std::size_t n = n_nodes(rng);
  std::uniform_int_distribution<std::size_t> node(0, n - 1);
  std::uniform_int_distribution<std::size_t> n_edges(shape.min_edges, shape.max_edges);
  std::uniform_int_distribution<std::size_t> label(0, shape.alphabet - 1);
  std::uniform_int_distribution<long long> cap(1, shape.max_capacity);
  std::vector<std::string> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back("n" + std::to_string(i));
  std::vector<EdgeSpec> edges;
  std::size_t m = n_edges(rng);
  while (edges.size() < m) {
    std::size_t a = node(rng);
    std::size_t b = node(rng);
    if (a == b && !shape.self_loops) continue;
    edges.push_back({nodes[a], nodes[b], names[label(rng)], Capacity(cap(rng))});
  }
  return build_graph(Alphabet(names), edges, nodes);
}

/// Small n0 -> n1 query dense enough that a compliant route usually exists.
inline Scenario random_scenario(std::mt19937_64& rng) {
  std::size_t k = std::uniform_int_distribution<std::size_t>(2, 3)(rng);
  NfaShape ns;
  ns.alphabet = k;
  ns.min_transitions = 4;
  GraphShape gs;
  gs.alphabet = k;
  gs.max_nodes = 6;
  gs.min_edges = 10;
  auto g = random_graph(rng, gs);
  return {std::move(g), random_nfa(rng, ns), "n0", "n1"};
}

/// Label strings of all walks source -> sink in G with 1..max_len edges.
inline std::set<std::vector<std::string>> walk_strings(const LabeledDigraph& g, std::string_view source,
                                                       std::string_view sink, std::size_t max_len) {
  std::set<std::vector<std::string>> out;
  std::vector<std::set<std::vector<std::string>>> at(g.node_count());
  at[g.node(source)].insert(std::vector<std::string>{});
  NodeIndex t = g.node(sink);
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::set<std::vector<std::string>>> next(g.node_count());
    for (NodeIndex u = 0; u < g.node_count(); ++u) {
      for (const auto& w : at[u]) {
        for (EdgeId id : g.out_edges(u)) {
          auto x = w;
          x.push_back(g.label_name(id));
          next[g.edge(id).dst].insert(std::move(x));
        }
      }
    }
    at = std::move(next);
    out.insert(at[t].begin(), at[t].end());
  }
  return out;
}

/// Label strings (epsilon edges contribute nothing) of all source -> sink
/// walks in G' that use 1..max_len mapped edges.
inline std::set<std::vector<std::string>> transformed_strings(const TransformedGraph& tg, std::size_t max_len) {
  const std::size_t n = tg.node_count();
  std::vector<std::vector<std::size_t>> eps_out(n);
  std::vector<std::vector<std::size_t>> mapped_out(n);
  for (std::size_t i = 0; i < tg.edges.size(); ++i) {
    (tg.edges[i].mapped() ? mapped_out : eps_out)[tg.edges[i].from].push_back(i);
  }
  // Nodes reachable by epsilon edges alone, each node included.
  std::vector<std::vector<std::size_t>> reach(n);
  for (std::size_t u = 0; u < n; ++u) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{u};
    seen[u] = 1;
    while (!stack.empty()) {
      std::size_t x = stack.back();
      stack.pop_back();
      reach[u].push_back(x);
      for (std::size_t e : eps_out[x]) {
        if (!seen[tg.edges[e].to]) {
          seen[tg.edges[e].to] = 1;
          stack.push_back(tg.edges[e].to);
        }
      }
    }
  }
  auto closure = [&](std::vector<std::set<std::vector<std::string>>>& layer) {
    std::vector<std::set<std::vector<std::string>>> closed(n);
    for (std::size_t u = 0; u < n; ++u) {
      if (layer[u].empty()) continue;
      for (std::size_t x : reach[u]) closed[x].insert(layer[u].begin(), layer[u].end());
    }
    layer = std::move(closed);
  };
  std::set<std::vector<std::string>> out;
  std::vector<std::set<std::vector<std::string>>> at(n);
  at[tg.source].insert(std::vector<std::string>{});
  closure(at);
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::set<std::vector<std::string>>> next(n);
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t e : mapped_out[u]) {
        for (const auto& w : at[u]) {
          auto x = w;
          x.push_back(tg.alphabet.name(tg.edges[e].symbol));
          next[tg.edges[e].to].insert(std::move(x));
        }
      }
    }
    closure(next);
    at = std::move(next);
    out.insert(at[tg.sink].begin(), at[tg.sink].end());
  }
  return out;
}

}  // namespace polcut::testing
