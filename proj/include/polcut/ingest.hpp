#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "polcut/graph.hpp"
#include "polcut/policy.hpp"

namespace polcut::ingest {

using Asn = std::uint32_t;

enum class Relationship { ProviderToCustomer, PeerToPeer };

/// One `a|b|rel` record: for ProviderToCustomer, `a` is the provider of `b`.
struct AsRelationship {
  Asn a = 0;
  Asn b = 0;
  Relationship rel = Relationship::PeerToPeer;
  friend bool operator==(const AsRelationship&, const AsRelationship&) = default;
};

struct AsRelationshipSet {
  std::vector<AsRelationship> records;
  std::string source;
};

namespace detail {

inline Asn parse_asn(std::string_view text, std::size_t line) {
  text = polcut::detail::trim(text);
  if (text.empty()) throw PositionedError(Errc::ParseError, line, "empty AS number");
  std::uint64_t v = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw PositionedError(Errc::ParseError, line, "bad AS number '" + std::string(text) + "'");
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
    if (v > 0xFFFFFFFFULL) throw PositionedError(Errc::ParseError, line, "AS number out of range");
  }
  if (v == 0) throw PositionedError(Errc::ParseError, line, "AS numbers are positive");
  return static_cast<Asn>(v);
}

}  // namespace detail

/// CAIDA serial format: `<as_a>|<as_b>|<rel>[|...]`, rel -1 means a is the
/// provider of b and 0 means peers; `#` lines are comments. Exact repeats of
/// a record are dropped; contradictory ones are an error.
inline AsRelationshipSet parse_as_rel(std::istream& in, std::string source = {}) {
  AsRelationshipSet set;
  set.source = std::move(source);
  std::map<std::pair<Asn, Asn>, AsRelationship> by_pair;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = polcut::detail::strip_comment(line);
    if (body.empty()) continue;
    auto fields = polcut::detail::split(body, '|');
    if (fields.size() < 3) throw PositionedError(Errc::ParseError, line_no, "expected <as_a>|<as_b>|<rel>");
    AsRelationship r;
    r.a = detail::parse_asn(fields[0], line_no);
    r.b = detail::parse_asn(fields[1], line_no);
    auto rel = polcut::detail::trim(fields[2]);
    if (rel == "-1") r.rel = Relationship::ProviderToCustomer;
    else if (rel == "0") r.rel = Relationship::PeerToPeer;
    else throw PositionedError(Errc::ParseError, line_no, "unsupported relationship '" + std::string(rel) + "'");
    if (r.a == r.b) throw PositionedError(Errc::ParseError, line_no, "self relationship");

    auto key = std::minmax(r.a, r.b);
    if (auto it = by_pair.find(key); it != by_pair.end()) {
      const auto& prev = it->second;
      bool same = prev == r || (r.rel == Relationship::PeerToPeer && prev.rel == Relationship::PeerToPeer);
      if (!same) {
        throw PositionedError(Errc::ConflictingRelationship, line_no,
                              "AS" + std::to_string(r.a) + " and AS" + std::to_string(r.b) + " already related differently");
      }
      continue;
    }
    by_pair.emplace(key, r);
    set.records.push_back(r);
  }
  return set;
}

inline AsRelationshipSet parse_as_rel_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_as_rel(in);
}

/// p2c record (a, b) gives a -p2c-> b and b -c2p-> a; p2p gives both
/// directions labelled p2p. All capacities are 1.
inline LabeledDigraph to_labeled_graph(const AsRelationshipSet& rels) {
  GraphBuilder b(relationship_alphabet());
  for (const auto& r : rels.records) {
    std::string a = std::to_string(r.a);
    std::string c = std::to_string(r.b);
    if (r.rel == Relationship::ProviderToCustomer) {
      b.add_edge(a, c, "p2c", 1);
      b.add_edge(c, a, "c2p", 1);
    } else {
      b.add_edge(a, c, "p2p", 1);
      b.add_edge(c, a, "p2p", 1);
    }
  }
  return std::move(b).build();
}

enum class PeeringPolicy { Open, Selective, Restrictive };

inline PeeringPolicy parse_peering_policy(std::string_view text) {
  std::string lower;
  for (char c : polcut::detail::trim(text)) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "open") return PeeringPolicy::Open;
  if (lower == "selective") return PeeringPolicy::Selective;
  if (lower == "restrictive") return PeeringPolicy::Restrictive;
  throw Error(Errc::ParseError, "unknown peering policy '" + std::string(text) + "'");
}

struct IxpMember {
  Asn asn = 0;
  PeeringPolicy policy = PeeringPolicy::Open;
};

/// CSV `asn,policy`; a first data line that does not start with a digit is a header.
inline std::vector<IxpMember> parse_members_csv(std::istream& in) {
  std::vector<IxpMember> out;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = polcut::detail::strip_comment(line);
    if (body.empty()) continue;
    bool header = first && !std::isdigit(static_cast<unsigned char>(body.front()));
    first = false;
    if (header) continue;
    auto fields = polcut::detail::split(body, ',');
    if (fields.size() != 2) throw PositionedError(Errc::ParseError, line_no, "expected asn,policy");
    try {
      out.push_back({detail::parse_asn(fields[0], line_no), parse_peering_policy(fields[1])});
    } catch (const PositionedError&) {
      throw;
    } catch (const Error& e) {
      throw PositionedError(Errc::ParseError, line_no, e.what());
    }
  }
  return out;
}

/// Adds p2p edges in both directions between every pair of members of the
/// selected class that has no edge in either direction yet. Existing
/// relationships are never duplicated or changed.
inline LabeledDigraph augment_peering(const LabeledDigraph& g, const std::vector<IxpMember>& members,
                                      PeeringPolicy mode) {
  std::vector<std::string> selected;
  std::set<Asn> seen;
  for (const auto& m : members) {
    if (m.policy == mode && seen.insert(m.asn).second) selected.push_back(std::to_string(m.asn));
  }
  std::set<std::pair<NodeIndex, NodeIndex>> linked;
  for (const auto& e : g.edges()) linked.insert(std::minmax(e.src, e.dst));

  GraphBuilder b(g.alphabet().merged(relationship_alphabet()));
  for (const auto& name : g.node_names()) b.add_node(name);
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    auto s = g.spec(EdgeId{i});
    b.add_edge(s.src, s.dst, s.label, s.capacity);
  }
  for (std::size_t i = 0; i < selected.size(); ++i) {
    for (std::size_t j = i + 1; j < selected.size(); ++j) {
      auto u = g.find_node(selected[i]);
      auto v = g.find_node(selected[j]);
      if (u && v && linked.count(std::minmax(*u, *v))) continue;
      b.add_edge(selected[i], selected[j], "p2p", 1);
      b.add_edge(selected[j], selected[i], "p2p", 1);
    }
  }
  return std::move(b).build();
}

/// Removes every edge between the two ASes labelled p2p, in both directions.
inline LabeledDigraph depeer(const LabeledDigraph& g, std::string_view a, std::string_view b) {
  NodeIndex u = g.node(a);
  NodeIndex v = g.node(b);
  auto p2p = g.alphabet().find("p2p");
  return without_edges(g, [&](EdgeId id) {
    const auto& e = g.edge(id);
    return p2p && e.label == *p2p && ((e.src == u && e.dst == v) || (e.src == v && e.dst == u));
  });
}

/// AS -> announced address count.
using WeightTable = std::map<Asn, std::uint64_t>;

/// CSV `asn,address_count`; a non-numeric first data line is a header.
inline WeightTable parse_weights_csv(std::istream& in) {
  WeightTable table;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = polcut::detail::strip_comment(line);
    if (body.empty()) continue;
    bool header = first && !std::isdigit(static_cast<unsigned char>(body.front()));
    first = false;
    if (header) continue;
    auto fields = polcut::detail::split(body, ',');
    if (fields.size() != 2) throw PositionedError(Errc::ParseError, line_no, "expected asn,address_count");
    Asn asn = detail::parse_asn(fields[0], line_no);
    auto count_text = polcut::detail::trim(fields[1]);
    std::uint64_t count = 0;
    for (char c : count_text) {
      if (c < '0' || c > '9') throw PositionedError(Errc::ParseError, line_no, "bad address count");
      count = count * 10 + static_cast<std::uint64_t>(c - '0');
    }
    table[asn] += count;
  }
  return table;
}

/// Draws `n` ordered pairs; each endpoint is chosen with probability
/// proportional to its weight and the second is redrawn until it differs
/// from the first. Deterministic for a given seed.
inline std::vector<std::pair<Asn, Asn>> weighted_sample_pairs(const WeightTable& weights, std::size_t n,
                                                              std::uint64_t seed) {
  std::vector<Asn> support;
  std::vector<double> w;
  for (const auto& [asn, weight] : weights) {
    if (weight > 0) {
      support.push_back(asn);
      w.push_back(static_cast<double>(weight));
    }
  }
  if (support.size() < 2) throw Error(Errc::InsufficientSupport, "need at least two ASes with positive weight");
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::vector<std::pair<Asn, Asn>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    out.emplace_back(support[a], support[b]);
  }
  return out;
}

namespace detail {

inline std::set<NodeIndex> customer_cone(const LabeledDigraph& g, NodeIndex root, std::size_t depth) {
  std::set<NodeIndex> cone;
  auto p2c = g.alphabet().find("p2c");
  if (!p2c || depth == 0) return cone;
  std::vector<std::size_t> dist(g.node_count(), static_cast<std::size_t>(-1));
  std::deque<NodeIndex> queue{root};
  dist[root] = 0;
  while (!queue.empty()) {
    NodeIndex u = queue.front();
    queue.pop_front();
    if (dist[u] == depth) continue;
    for (EdgeId id : g.out_edges(u)) {
      const auto& e = g.edge(id);
      if (e.label != *p2c || dist[e.dst] != static_cast<std::size_t>(-1)) continue;
      dist[e.dst] = dist[u] + 1;
      if (e.dst != root) cone.insert(e.dst);
      queue.push_back(e.dst);
    }
  }
  return cone;
}

}  // namespace detail

/// ASes reachable from `asn` over 1..depth consecutive p2c edges (root
/// excluded), minus those reachable the same way from any AS in `other`.
/// Results are node names in graph order.
inline std::vector<std::string> exclusive_customer_cone(const LabeledDigraph& g, std::string_view asn,
                                                        const std::vector<std::string>& other, std::size_t depth) {
  auto cone = detail::customer_cone(g, g.node(asn), depth);
  for (const auto& o : other) {
    for (NodeIndex v : detail::customer_cone(g, g.node(o), depth)) cone.erase(v);
  }
  std::vector<std::string> out;
  for (NodeIndex v : cone) out.push_back(g.node_name(v));
  return out;
}

}  // namespace polcut::ingest
