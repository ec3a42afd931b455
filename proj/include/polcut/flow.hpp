#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <future>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "polcut/capacity.hpp"
#include "polcut/decomposition.hpp"
#include "polcut/graph.hpp"
#include "polcut/policy.hpp"
#include "polcut/transform.hpp"

namespace polcut {

enum class BoundMode { Upper, Lower };

inline std::string_view to_string(BoundMode m) { return m == BoundMode::Upper ? "upper" : "lower"; }

namespace detail {

/// Dinic's algorithm on int64 capacities; arcs are scanned in insertion order.
class Dinic {
 public:
  explicit Dinic(std::size_t n) : adj_(n), level_(n), next_(n) {}

  std::size_t add_edge(std::size_t from, std::size_t to, std::int64_t cap) {
    std::size_t id = to_.size();
    to_.push_back(to);
    cap_.push_back(cap);
    adj_[from].push_back(id);
    to_.push_back(from);
    cap_.push_back(0);
    adj_[to].push_back(id + 1);
    return id;
  }

  std::int64_t run(std::size_t s, std::size_t t) {
    std::int64_t total = 0;
    while (bfs(s, t)) {
      std::fill(next_.begin(), next_.end(), 0);
      while (std::int64_t pushed = dfs(s, t)) total += pushed;
    }
    return total;
  }

  /// Flow on the forward arc returned by add_edge.
  std::int64_t flow(std::size_t arc) const { return cap_[arc ^ 1U]; }

 private:
  bool bfs(std::size_t s, std::size_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::deque<std::size_t> queue{s};
    level_[s] = 0;
    while (!queue.empty()) {
      std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t a : adj_[u]) {
        if (cap_[a] > 0 && level_[to_[a]] < 0) {
          level_[to_[a]] = level_[u] + 1;
          queue.push_back(to_[a]);
        }
      }
    }
    return level_[t] >= 0;
  }

  // Iterative blocking-flow search: one augmenting path per call.
  std::int64_t dfs(std::size_t s, std::size_t t) {
    std::vector<std::size_t> path;  // arcs
    std::size_t u = s;
    while (true) {
      if (u == t) {
        std::int64_t bottleneck = std::numeric_limits<std::int64_t>::max();
        for (std::size_t a : path) bottleneck = std::min(bottleneck, cap_[a]);
        for (std::size_t a : path) {
          cap_[a] -= bottleneck;
          cap_[a ^ 1U] += bottleneck;
        }
        return bottleneck;
      }
      bool advanced = false;
      for (auto& i = next_[u]; i < adj_[u].size(); ++i) {
        std::size_t a = adj_[u][i];
        if (cap_[a] > 0 && level_[to_[a]] == level_[u] + 1) {
          path.push_back(a);
          u = to_[a];
          advanced = true;
          break;
        }
      }
      if (advanced) continue;
      if (path.empty()) return 0;
      level_[u] = -1;  // dead end
      std::size_t back = path.back();
      path.pop_back();
      u = to_[back ^ 1U];
      ++next_[u];
    }
  }

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> to_;
  std::vector<std::int64_t> cap_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

inline BigInt lcm_big(const BigInt& a, const BigInt& b) { return a / boost::multiprecision::gcd(a, b) * b; }

}  // namespace detail

/// Maximum flow under one capacity function. Flows are stored scaled by
/// `scale` (the lcm of every capacity denominator) so they stay integral.
struct FlowResult {
  BoundMode mode = BoundMode::Upper;
  Rational value{0};
  BigInt scale{1};
  std::vector<std::int64_t> scaled_flows;

  Rational edge_flow(std::size_t e) const { return Rational(BigInt(scaled_flows.at(e)), scale); }
};

inline Capacity transformed_capacity(const TransformedEdge& e, BoundMode mode) {
  return mode == BoundMode::Upper ? e.upper : e.lower();
}

inline FlowResult max_flow(const TransformedGraph& tg, BoundMode mode) {
  if (tg.source == tg.sink) throw Error(Errc::SourceEqualsSink, "transformed source and sink coincide");

  // Source and sink joined by unbounded edges alone would make the flow infinite.
  {
    std::vector<std::vector<std::size_t>> inf_out(tg.node_count());
    for (const auto& e : tg.edges) {
      if (transformed_capacity(e, mode).is_unbounded()) inf_out[e.from].push_back(e.to);
    }
    std::vector<char> seen(tg.node_count(), 0);
    std::vector<std::size_t> stack{tg.source};
    seen[tg.source] = 1;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      if (u == tg.sink) throw Error(Errc::UnboundedFlow, "sink reachable from source over unbounded edges only");
      for (std::size_t w : inf_out[u]) {
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
  }

  FlowResult result;
  result.mode = mode;
  BigInt scale = 1;
  std::vector<Capacity> caps;
  caps.reserve(tg.edges.size());
  for (const auto& e : tg.edges) {
    caps.push_back(transformed_capacity(e, mode));
    if (!caps.back().is_unbounded()) scale = detail::lcm_big(scale, denominator(caps.back().value()));
  }

  constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max() / 4;
  BigInt finite_sum = 0;
  std::vector<std::int64_t> scaled(caps.size(), 0);
  for (std::size_t i = 0; i < caps.size(); ++i) {
    if (caps[i].is_unbounded()) continue;
    BigInt v = numerator(caps[i].value()) * (scale / denominator(caps[i].value()));
    finite_sum += v;
    if (finite_sum > kMax) throw Error(Errc::ArithmeticOverflow, "scaled capacities exceed 64-bit range");
    scaled[i] = static_cast<std::int64_t>(v);
  }
  const auto unbounded = static_cast<std::int64_t>(finite_sum) + 1;

  detail::Dinic dinic(tg.node_count());
  std::vector<std::size_t> arcs(caps.size());
  for (std::size_t i = 0; i < caps.size(); ++i) {
    arcs[i] = dinic.add_edge(tg.edges[i].from, tg.edges[i].to, caps[i].is_unbounded() ? unbounded : scaled[i]);
  }
  std::int64_t total = dinic.run(tg.source, tg.sink);

  result.scale = scale;
  result.value = Rational(BigInt(total), scale);
  result.scaled_flows.resize(caps.size());
  for (std::size_t i = 0; i < caps.size(); ++i) result.scaled_flows[i] = dinic.flow(arcs[i]);
  return result;
}

/// A route in the original graph with the flow it carries.
struct ProjectedPath {
  std::vector<EdgeId> edges;
  Rational flow{0};
};

/// Decomposes `flow` into source -> sink paths of G' (cycles are discarded),
/// projects each onto G through provenance, merges identical projections and
/// sorts them by edge-id sequence.
inline std::vector<ProjectedPath> extract_paths(const TransformedGraph& tg, const FlowResult& flow) {
  std::vector<std::int64_t> f = flow.scaled_flows;
  std::vector<std::vector<std::size_t>> out(tg.node_count());
  for (std::size_t i = 0; i < tg.edges.size(); ++i) {
    if (f[i] > 0) out[tg.edges[i].from].push_back(i);
  }
  std::vector<std::size_t> cursor(tg.node_count(), 0);
  std::vector<std::size_t> position(tg.node_count(), static_cast<std::size_t>(-1));
  std::map<std::vector<std::size_t>, std::int64_t> merged;

  auto next_edge = [&](std::size_t u) -> std::optional<std::size_t> {
    auto& c = cursor[u];
    while (c < out[u].size() && f[out[u][c]] == 0) ++c;
    if (c == out[u].size()) return std::nullopt;
    return out[u][c];
  };

  while (true) {
    std::vector<std::size_t> nodes{tg.source};
    std::vector<std::size_t> path;
    position[tg.source] = 0;
    bool reached = false;
    while (true) {
      std::size_t u = nodes.back();
      if (u == tg.sink) {
        reached = true;
        break;
      }
      auto e = next_edge(u);
      if (!e) break;
      std::size_t w = tg.edges[*e].to;
      path.push_back(*e);
      if (position[w] != static_cast<std::size_t>(-1)) {
        // Cancel the cycle w -> ... -> u -> w and resume from w.
        std::size_t start = position[w];
        std::int64_t amount = std::numeric_limits<std::int64_t>::max();
        for (std::size_t k = start; k < path.size(); ++k) amount = std::min(amount, f[path[k]]);
        for (std::size_t k = start; k < path.size(); ++k) f[path[k]] -= amount;
        for (std::size_t k = start + 1; k < nodes.size(); ++k) position[nodes[k]] = static_cast<std::size_t>(-1);
        nodes.resize(start + 1);
        path.resize(start);
        continue;
      }
      position[w] = nodes.size();
      nodes.push_back(w);
    }
    for (std::size_t v : nodes) position[v] = static_cast<std::size_t>(-1);
    if (!reached) break;
    std::int64_t amount = std::numeric_limits<std::int64_t>::max();
    for (std::size_t e : path) amount = std::min(amount, f[e]);
    for (std::size_t e : path) f[e] -= amount;
    std::vector<std::size_t> projected;
    for (std::size_t e : path) {
      if (tg.edges[e].mapped()) projected.push_back(tg.edges[e].source.index);
    }
    merged[projected] += amount;
  }

  std::vector<ProjectedPath> paths;
  for (const auto& [edges, amount] : merged) {
    ProjectedPath p;
    for (std::size_t e : edges) p.edges.push_back(EdgeId{e});
    p.flow = Rational(BigInt(amount), flow.scale);
    paths.push_back(std::move(p));
  }
  return paths;
}

struct SymbolBlocks {
  std::string symbol;
  std::size_t n_s = 0;  // 0 when the policy never reads this symbol
  Minimality minimality = Minimality::Guaranteed;
  std::vector<Block> blocks;
};

struct CutReport {
  Rational lower{0};
  Rational upper{0};
  bool exact = false;
  std::vector<ProjectedPath> paths;  // from the upper-bound flow
  std::string policy;
  std::string source;
  std::string sink;
  std::vector<SymbolBlocks> symbols;
  std::size_t transformed_nodes = 0;  // before pruning
  std::size_t transformed_edges = 0;
  std::size_t pruned_nodes = 0;
  std::size_t pruned_edges = 0;
};

struct CutOptions {
  bool prune = true;
  bool parallel_bounds = false;  // run the two max-flows concurrently
  std::string policy_description;
};

inline std::vector<SymbolBlocks> summarize_blocks(const AugmentedNfa& aug) {
  std::vector<SymbolBlocks> out;
  for (const auto& d : aug.decompositions) {
    out.push_back({aug.base.alphabet().name(d.symbol), d.block_count(), d.minimality, d.blocks});
  }
  return out;
}

/// Full pipeline: normalize, decompose, augment, transform, prune, then the
/// lower- and upper-bound max-flows.
inline CutReport min_cut_bounds(const LabeledDigraph& g, const PolicyNfa& nfa, std::string_view v1, std::string_view vn,
                                const CutOptions& options = {}) {
  AugmentedNfa aug = prepare_policy(nfa);
  TransformedGraph full = tensor_transform(g, aug, v1, vn);
  CutReport report;
  report.transformed_nodes = full.node_count();
  report.transformed_edges = full.edge_count();
  TransformedGraph tg = options.prune ? prune_unreachable(full) : std::move(full);
  report.pruned_nodes = tg.node_count();
  report.pruned_edges = tg.edge_count();

  FlowResult upper;
  FlowResult lower;
  if (options.parallel_bounds) {
    auto lower_job = std::async(std::launch::async, [&] { return max_flow(tg, BoundMode::Lower); });
    upper = max_flow(tg, BoundMode::Upper);
    lower = lower_job.get();
  } else {
    upper = max_flow(tg, BoundMode::Upper);
    lower = max_flow(tg, BoundMode::Lower);
  }
  report.upper = upper.value;
  report.lower = lower.value;
  report.exact = aug.exact();
  report.paths = extract_paths(tg, upper);
  report.policy = options.policy_description;
  report.source = std::string(v1);
  report.sink = std::string(vn);
  report.symbols = summarize_blocks(aug);
  return report;
}

/// Node sequence and label string of a projected path, for display.
inline std::string describe_path(const LabeledDigraph& g, const ProjectedPath& p) {
  if (p.edges.empty()) return {};
  std::string out = g.node_name(g.edge(p.edges.front()).src);
  for (EdgeId id : p.edges) {
    const auto& e = g.edge(id);
    out += " -" + g.alphabet().name(e.label) + "-> " + g.node_name(e.dst);
  }
  return out;
}

inline std::vector<std::string> path_labels(const LabeledDigraph& g, const ProjectedPath& p) {
  std::vector<std::string> out;
  for (EdgeId id : p.edges) out.push_back(g.label_name(id));
  return out;
}

}  // namespace polcut
