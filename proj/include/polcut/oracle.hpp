#pragma once

// Brute-force ground truth for small instances. Nothing here reuses the
// transform or flow code paths; the automaton is simulated directly.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "polcut/capacity.hpp"
#include "polcut/graph.hpp"
#include "polcut/policy.hpp"

namespace polcut::oracle {

enum class PathMode { EdgeSimple, NodeSimple };

struct Limits {
  std::size_t max_search_states = 1'000'000;
  std::size_t max_paths = 24;
};

struct CompliantPathSet {
  std::vector<std::vector<EdgeId>> paths;
  std::size_t max_len = 0;
};

/// Direct subset simulation over the raw transition list.
class NfaSimulator {
 public:
  explicit NfaSimulator(const PolicyNfa& nfa) : nfa_(nfa), closure_(nfa.state_count()) {
    std::vector<std::vector<State>> eps(nfa.state_count());
    for (const auto& t : nfa.transitions()) {
      if (t.symbol == kEpsilon) eps[t.from].push_back(t.to);
    }
    for (State q = 0; q < nfa.state_count(); ++q) {
      std::vector<char> seen(nfa.state_count(), 0);
      std::vector<State> stack{q};
      seen[q] = 1;
      while (!stack.empty()) {
        State u = stack.back();
        stack.pop_back();
        for (State w : eps[u]) {
          if (!seen[w]) {
            seen[w] = 1;
            stack.push_back(w);
          }
        }
      }
      for (State w = 0; w < seen.size(); ++w) {
        if (seen[w]) closure_[q].push_back(w);
      }
    }
  }

  using StateSet = std::vector<char>;

  StateSet initial() const {
    StateSet s(nfa_.state_count(), 0);
    for (State w : closure_[nfa_.start()]) s[w] = 1;
    return s;
  }

  StateSet step(const StateSet& current, const std::string& label) const {
    StateSet next(nfa_.state_count(), 0);
    auto symbol = nfa_.alphabet().find(label);
    if (!symbol) return next;
    for (const auto& t : nfa_.transitions()) {
      if (t.symbol == *symbol && current[t.from]) {
        for (State w : closure_[t.to]) next[w] = 1;
      }
    }
    return next;
  }

  bool accepting(const StateSet& s) const {
    for (State q : nfa_.accepting()) {
      if (s[q]) return true;
    }
    return false;
  }

  static bool empty(const StateSet& s) { return std::none_of(s.begin(), s.end(), [](char c) { return c != 0; }); }

  bool accepts(const std::vector<std::string>& word) const {
    StateSet s = initial();
    for (const auto& w : word) s = step(s, w);
    return accepting(s);
  }

 private:
  const PolicyNfa& nfa_;
  std::vector<std::vector<State>> closure_;
};

/// Every walk v1 -> vn of 1..max_len edges whose label string is accepted.
/// Edge-simple walks never repeat an edge id; node-simple ones never repeat a
/// node. Output order is depth-first in edge-id order.
inline CompliantPathSet enumerate_compliant_paths(const LabeledDigraph& g, const PolicyNfa& nfa,
                                                  std::string_view v1, std::string_view vn, std::size_t max_len,
                                                  PathMode mode = PathMode::EdgeSimple, const Limits& limits = {}) {
  if (max_len < 1) throw Error(Errc::ExplosionGuard, "max_len must be at least 1");
  NodeIndex s = g.node(v1);
  NodeIndex t = g.node(vn);
  if (s == t) throw Error(Errc::SourceEqualsSink, "oracle queries need distinct endpoints");

  NfaSimulator sim(nfa);
  CompliantPathSet out;
  out.max_len = max_len;
  std::vector<char> used_edge(g.edge_count(), 0);
  std::vector<char> used_node(g.node_count(), 0);
  std::vector<EdgeId> path;
  std::size_t visited = 0;

  auto dfs = [&](auto&& self, NodeIndex u, const NfaSimulator::StateSet& states) -> void {
    if (++visited > limits.max_search_states) {
      throw Error(Errc::ExplosionGuard, "path enumeration exceeded " + std::to_string(limits.max_search_states) + " states");
    }
    if (u == t && !path.empty() && sim.accepting(states)) out.paths.push_back(path);
    if (path.size() == max_len) return;
    for (EdgeId id : g.out_edges(u)) {
      const auto& e = g.edge(id);
      if (used_edge[id.index]) continue;
      if (mode == PathMode::NodeSimple && used_node[e.dst]) continue;
      auto next = sim.step(states, g.alphabet().name(e.label));
      if (NfaSimulator::empty(next)) continue;
      used_edge[id.index] = 1;
      used_node[e.dst] = 1;
      path.push_back(id);
      self(self, e.dst, next);
      path.pop_back();
      used_node[e.dst] = 0;
      used_edge[id.index] = 0;
    }
  };
  used_node[s] = 1;
  dfs(dfs, s, sim.initial());
  return out;
}

inline CompliantPathSet enumerate_compliant_paths(const LabeledDigraph& g, const PolicyNfa& nfa,
                                                  std::string_view v1, std::string_view vn) {
  return enumerate_compliant_paths(g, nfa, v1, vn, std::max<std::size_t>(g.edge_count(), 1));
}

namespace detail {

using EdgeSet = std::vector<std::uint64_t>;

inline EdgeSet to_edge_set(const std::vector<EdgeId>& path, std::size_t words) {
  EdgeSet s(words, 0);
  for (EdgeId e : path) s[e.index / 64] |= std::uint64_t{1} << (e.index % 64);
  return s;
}

inline bool disjoint(const EdgeSet& a, const EdgeSet& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] & b[i]) return false;
  }
  return true;
}

inline bool subset(const EdgeSet& a, const EdgeSet& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] & ~b[i]) return false;
  }
  return true;
}

struct ReducedPath {
  EdgeSet edges;
  std::vector<EdgeId> walk;
};

/// Distinct edge sets with every strict superset of another set removed:
/// swapping a path for one using a subset of its edges never hurts a packing.
inline std::vector<ReducedPath> reduce(const CompliantPathSet& pset) {
  std::size_t max_edge = 0;
  for (const auto& p : pset.paths) {
    for (EdgeId e : p) max_edge = std::max(max_edge, e.index);
  }
  std::size_t words = max_edge / 64 + 1;
  std::map<EdgeSet, std::vector<EdgeId>> unique;
  for (const auto& p : pset.paths) unique.emplace(to_edge_set(p, words), p);
  std::vector<ReducedPath> all;
  for (auto& [set, walk] : unique) all.push_back({set, walk});
  std::vector<ReducedPath> kept;
  for (std::size_t i = 0; i < all.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < all.size() && !dominated; ++j) {
      dominated = j != i && subset(all[j].edges, all[i].edges) && all[j].edges != all[i].edges;
    }
    if (!dominated) kept.push_back(all[i]);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const ReducedPath& a, const ReducedPath& b) { return a.walk.size() < b.walk.size(); });
  return kept;
}

class PackingSearch {
 public:
  explicit PackingSearch(std::vector<ReducedPath> paths) : paths_(std::move(paths)) {}

  std::size_t solve() {
    std::vector<std::size_t> all(paths_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    search(all, 0);
    return best_;
  }

 private:
  // Each chosen path needs its own first edge and its own last edge.
  std::size_t bound(const std::vector<std::size_t>& candidates) const {
    std::set<std::size_t> firsts, lasts;
    for (std::size_t i : candidates) {
      firsts.insert(paths_[i].walk.front().index);
      lasts.insert(paths_[i].walk.back().index);
    }
    return std::min({candidates.size(), firsts.size(), lasts.size()});
  }

  void search(const std::vector<std::size_t>& candidates, std::size_t chosen) {
    best_ = std::max(best_, chosen);
    if (candidates.empty() || chosen + bound(candidates) <= best_) return;
    std::size_t head = candidates.front();
    std::vector<std::size_t> compatible;
    for (std::size_t k = 1; k < candidates.size(); ++k) {
      if (disjoint(paths_[head].edges, paths_[candidates[k]].edges)) compatible.push_back(candidates[k]);
    }
    search(compatible, chosen + 1);
    std::vector<std::size_t> without(candidates.begin() + 1, candidates.end());
    search(without, chosen);
  }

  std::vector<ReducedPath> paths_;
  std::size_t best_ = 0;
};

/// Dense tableau simplex over exact rationals with Bland's rule:
/// maximize sum(x) subject to A x <= b, x >= 0, with b >= 0.
inline Rational maximize_packing(const std::vector<std::vector<Rational>>& a, const std::vector<Rational>& b) {
  const std::size_t m = a.size();
  const std::size_t n = m == 0 ? 0 : a[0].size();
  // Columns: n structural, m slack, then rhs.
  std::vector<std::vector<Rational>> t(m + 1, std::vector<Rational>(n + m + 1, Rational(0)));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
    t[i][n + i] = 1;
    t[i][n + m] = b[i];
    basis[i] = n + i;
  }
  for (std::size_t j = 0; j < n; ++j) t[m][j] = -1;  // reduced costs of max sum(x)

  while (true) {
    std::size_t enter = n + m;
    for (std::size_t j = 0; j < n + m; ++j) {
      if (t[m][j] < 0) {
        enter = j;
        break;
      }
    }
    if (enter == n + m) break;
    std::size_t leave = m;
    Rational best_ratio;
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] > 0) {
        Rational ratio = t[i][n + m] / t[i][enter];
        if (leave == m || ratio < best_ratio || (ratio == best_ratio && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave == m) throw Error(Errc::UnboundedFlow, "path packing is unbounded");
    Rational pivot = t[leave][enter];
    for (auto& v : t[leave]) v /= pivot;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave || t[i][enter] == 0) continue;
      Rational factor = t[i][enter];
      for (std::size_t j = 0; j <= n + m; ++j) t[i][j] -= factor * t[leave][j];
    }
    basis[leave] = enter;
  }
  return t[m][n + m];
}

}  // namespace detail

/// Largest pairwise edge-disjoint subset of the paths, by branch and bound.
/// The limit applies after duplicate and dominated edge sets are removed.
inline std::size_t max_disjoint_packing(const CompliantPathSet& pset, const Limits& limits = {}) {
  auto reduced = detail::reduce(pset);
  if (reduced.size() > limits.max_paths) {
    throw Error(Errc::ExplosionGuard, std::to_string(reduced.size()) + " distinct paths exceed the packing limit of " +
                                          std::to_string(limits.max_paths));
  }
  return detail::PackingSearch(std::move(reduced)).solve();
}

/// Maximum total flow over the enumerated compliant paths subject to edge
/// capacities, solved exactly as a linear program over the path set.
inline Rational oracle_bisection(const LabeledDigraph& g, const PolicyNfa& nfa, std::string_view v1,
                                 std::string_view vn, std::size_t max_len, PathMode mode = PathMode::EdgeSimple,
                                 const Limits& limits = {}) {
  auto pset = enumerate_compliant_paths(g, nfa, v1, vn, max_len, mode, limits);
  auto reduced = detail::reduce(pset);
  if (reduced.size() > limits.max_paths) {
    throw Error(Errc::ExplosionGuard, std::to_string(reduced.size()) + " distinct paths exceed the limit of " +
                                          std::to_string(limits.max_paths));
  }
  if (reduced.empty()) return Rational(0);
  std::vector<std::size_t> rows;  // finite-capacity edges used by some path
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    if (g.edges()[e].capacity.is_unbounded()) continue;
    for (const auto& p : reduced) {
      if (e / 64 < p.edges.size() && (p.edges[e / 64] >> (e % 64) & 1U)) {
        rows.push_back(e);
        break;
      }
    }
  }
  std::vector<std::vector<Rational>> a(rows.size(), std::vector<Rational>(reduced.size(), Rational(0)));
  std::vector<Rational> b(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    b[i] = g.edges()[rows[i]].capacity.value();
    for (std::size_t j = 0; j < reduced.size(); ++j) {
      for (EdgeId e : reduced[j].walk) {
        if (e.index == rows[i]) a[i][j] += 1;
      }
    }
  }
  return detail::maximize_packing(a, b);
}

inline Rational oracle_bisection(const LabeledDigraph& g, const PolicyNfa& nfa, std::string_view v1,
                                 std::string_view vn) {
  return oracle_bisection(g, nfa, v1, vn, std::max<std::size_t>(g.edge_count(), 1));
}

}  // namespace polcut::oracle
