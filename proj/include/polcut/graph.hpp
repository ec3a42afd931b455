#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "polcut/alphabet.hpp"
#include "polcut/capacity.hpp"
#include "polcut/error.hpp"

namespace polcut {

using NodeIndex = std::size_t;

/// Stable ordinal of an edge within its graph.
struct EdgeId {
  std::size_t index = 0;
  friend auto operator<=>(const EdgeId&, const EdgeId&) = default;
};

struct GraphEdge {
  NodeIndex src = 0;
  NodeIndex dst = 0;
  Symbol label = 0;
  Capacity capacity{1};
};

/// Input record for build_graph: endpoints by name, label by symbol text.
struct EdgeSpec {
  std::string src;
  std::string dst;
  std::string label;
  Capacity capacity{1};
};

/// Directed multigraph with per-edge label and capacity. Immutable once built.
class LabeledDigraph {
 public:
  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t node_count() const noexcept { return names_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  const std::string& node_name(NodeIndex v) const { return names_.at(v); }
  const std::vector<std::string>& node_names() const noexcept { return names_; }

  std::optional<NodeIndex> find_node(std::string_view name) const {
    if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
    return std::nullopt;
  }

  NodeIndex node(std::string_view name) const {
    if (auto v = find_node(name)) return *v;
    throw Error(Errc::UnknownNode, "node '" + std::string(name) + "' is not in the graph");
  }

  const GraphEdge& edge(EdgeId id) const { return edges_.at(id.index); }
  std::span<const GraphEdge> edges() const noexcept { return edges_; }

  std::span<const EdgeId> out_edges(NodeIndex v) const { return out_.at(v); }
  std::span<const EdgeId> in_edges(NodeIndex v) const { return in_.at(v); }

  std::string label_name(EdgeId id) const { return alphabet_.name(edge(id).label); }

  /// Populated by split_nodes: original name -> (in-half, out-half).
  const std::map<std::string, std::pair<std::string, std::string>>& split_map() const noexcept { return splits_; }

  EdgeSpec spec(EdgeId id) const {
    const auto& e = edge(id);
    return {names_[e.src], names_[e.dst], alphabet_.name(e.label), e.capacity};
  }

 private:
  friend class GraphBuilder;

  Alphabet alphabet_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<EdgeId>> out_;
  std::vector<std::vector<EdgeId>> in_;
  std::map<std::string, std::pair<std::string, std::string>> splits_;
};

/// Incremental constructor that validates every invariant of LabeledDigraph.
class GraphBuilder {
 public:
  explicit GraphBuilder(Alphabet alphabet) { g_.alphabet_ = std::move(alphabet); }

  NodeIndex add_node(std::string_view name) {
    if (auto it = g_.index_.find(std::string(name)); it != g_.index_.end()) return it->second;
    NodeIndex v = g_.names_.size();
    g_.names_.emplace_back(name);
    g_.index_.emplace(g_.names_.back(), v);
    g_.out_.emplace_back();
    g_.in_.emplace_back();
    return v;
  }

  bool has_node(std::string_view name) const { return g_.index_.count(std::string(name)) != 0; }

  EdgeId add_edge(std::string_view src, std::string_view dst, std::string_view label, const Capacity& capacity) {
    if (is_epsilon_token(label)) {
      throw Error(Errc::ReservedEpsilonLabel, "edge " + std::string(src) + "->" + std::string(dst) + " uses the epsilon label");
    }
    Symbol s = g_.alphabet_.id(label, Errc::UnknownLabel);
    if (!capacity.is_unbounded() && capacity.value() <= 0) {
      throw Error(Errc::NonPositiveCapacity, "edge " + std::string(src) + "->" + std::string(dst) +
                                                 " has capacity " + capacity.to_string());
    }
    NodeIndex a = add_node(src);
    NodeIndex b = add_node(dst);
    EdgeId id{g_.edges_.size()};
    g_.edges_.push_back({a, b, s, capacity});
    g_.out_[a].push_back(id);
    g_.in_[b].push_back(id);
    return id;
  }

  void record_split(std::string original, std::string in_half, std::string out_half) {
    g_.splits_.emplace(std::move(original), std::make_pair(std::move(in_half), std::move(out_half)));
  }

  LabeledDigraph build() && { return std::move(g_); }

 private:
  LabeledDigraph g_;
};

/// Nodes are the union of edge endpoints in first-appearance order, preceded
/// by any names listed in `nodes` (which lets isolated nodes survive).
inline LabeledDigraph build_graph(const Alphabet& alphabet, std::span<const EdgeSpec> edges,
                                  std::span<const std::string> nodes = {}) {
  GraphBuilder b(alphabet);
  for (const auto& n : nodes) b.add_node(n);
  for (const auto& e : edges) b.add_edge(e.src, e.dst, e.label, e.capacity);
  return std::move(b).build();
}

inline LabeledDigraph build_graph(const Alphabet& alphabet, std::initializer_list<EdgeSpec> edges) {
  return build_graph(alphabet, std::span<const EdgeSpec>(edges.begin(), edges.size()));
}

/// Ids of every edge labelled `symbol` (the E_s view; the node set is unchanged).
inline std::vector<EdgeId> subgraph_by_label(const LabeledDigraph& g, std::string_view symbol) {
  Symbol s = g.alphabet().id(symbol, Errc::UnknownLabel);
  std::vector<EdgeId> out;
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    if (g.edges()[i].label == s) out.push_back(EdgeId{i});
  }
  return out;
}

struct NodeSplit {
  std::string label;
  Capacity capacity{1};
};

/// Replaces each listed node v by v_in -> v_out joined by one labelled edge.
/// In-edges of v land on v_in, out-edges leave v_out. The split label is added
/// to the alphabet if it is new.
inline LabeledDigraph split_nodes(const LabeledDigraph& g, const std::map<std::string, NodeSplit>& node_spec) {
  for (const auto& [name, split] : node_spec) {
    if (!g.find_node(name)) throw Error(Errc::UnknownNode, "cannot split unknown node '" + name + "'");
  }
  if (node_spec.empty()) return g;

  Alphabet alphabet = g.alphabet();
  for (const auto& [name, split] : node_spec) alphabet.add(split.label);

  auto in_half = [](const std::string& n) { return n + "_in"; };
  auto out_half = [](const std::string& n) { return n + "_out"; };

  GraphBuilder b(alphabet);
  for (const auto& name : g.node_names()) {
    if (node_spec.count(name)) {
      for (const auto& half : {in_half(name), out_half(name)}) {
        if (g.find_node(half) || b.has_node(half)) {
          throw Error(Errc::DuplicateNode, "split half '" + half + "' collides with an existing node");
        }
        b.add_node(half);
      }
      b.record_split(name, in_half(name), out_half(name));
    } else {
      b.add_node(name);
    }
  }
  for (const auto& [orig, halves] : g.split_map()) b.record_split(orig, halves.first, halves.second);

  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    const auto& e = g.edges()[i];
    const std::string& src = g.node_name(e.src);
    const std::string& dst = g.node_name(e.dst);
    b.add_edge(node_spec.count(src) ? out_half(src) : src, node_spec.count(dst) ? in_half(dst) : dst,
               g.alphabet().name(e.label), e.capacity);
  }
  for (const auto& [name, split] : node_spec) {
    b.add_edge(in_half(name), out_half(name), split.label, split.capacity);
  }
  return std::move(b).build();
}

/// Copy of `g` without the edges matching `drop`. Nodes (and ids of the
/// surviving edges, renumbered densely) keep their relative order.
inline LabeledDigraph without_edges(const LabeledDigraph& g, const std::function<bool(EdgeId)>& drop) {
  GraphBuilder b(g.alphabet());
  for (const auto& name : g.node_names()) b.add_node(name);
  for (const auto& [orig, halves] : g.split_map()) b.record_split(orig, halves.first, halves.second);
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    if (drop(EdgeId{i})) continue;
    auto s = g.spec(EdgeId{i});
    b.add_edge(s.src, s.dst, s.label, s.capacity);
  }
  return std::move(b).build();
}

/// Same topology with every capacity replaced by 1.
inline LabeledDigraph with_unit_capacities(const LabeledDigraph& g) {
  GraphBuilder b(g.alphabet());
  for (const auto& name : g.node_names()) b.add_node(name);
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    auto s = g.spec(EdgeId{i});
    b.add_edge(s.src, s.dst, s.label, Capacity(1));
  }
  return std::move(b).build();
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view strip_comment(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  return trim(line);
}

}  // namespace detail

/// Reads `src|dst|label|capacity` lines. `#` starts a comment, capacity may be
/// `inf`, and a missing capacity field defaults to 1. The alphabet is the set of
/// labels in order of first use unless `alphabet` is supplied.
inline LabeledDigraph read_graph(std::istream& in, const std::optional<Alphabet>& alphabet = std::nullopt) {
  std::vector<EdgeSpec> specs;
  Alphabet inferred;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = detail::strip_comment(line);
    if (body.empty()) continue;
    auto fields = detail::split(body, '|');
    if (fields.size() != 3 && fields.size() != 4) {
      throw PositionedError(Errc::ParseError, line_no, "expected src|dst|label|capacity");
    }
    EdgeSpec e;
    e.src = std::string(detail::trim(fields[0]));
    e.dst = std::string(detail::trim(fields[1]));
    e.label = std::string(detail::trim(fields[2]));
    if (e.src.empty() || e.dst.empty() || e.label.empty()) {
      throw PositionedError(Errc::ParseError, line_no, "empty field");
    }
    try {
      e.capacity = fields.size() == 4 ? Capacity::parse(detail::trim(fields[3])) : Capacity(1);
      if (!alphabet) inferred.add(e.label);
    } catch (const Error& err) {
      throw PositionedError(err.code(), line_no, err.what());
    }
    specs.push_back(std::move(e));
  }
  const Alphabet& sigma = alphabet ? *alphabet : inferred;
  GraphBuilder b(sigma);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    try {
      b.add_edge(specs[i].src, specs[i].dst, specs[i].label, specs[i].capacity);
    } catch (const Error& err) {
      throw Error(err.code(), std::string(err.what()) + " (edge " + std::to_string(i) + ")");
    }
  }
  return std::move(b).build();
}

inline LabeledDigraph read_graph_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_graph(in);
}

inline void write_graph(std::ostream& out, const LabeledDigraph& g) {
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    auto s = g.spec(EdgeId{i});
    out << s.src << '|' << s.dst << '|' << s.label << '|' << s.capacity.to_string() << '\n';
  }
}

}  // namespace polcut
