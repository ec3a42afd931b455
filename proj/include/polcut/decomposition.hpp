#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "polcut/policy.hpp"

namespace polcut {

using StatePair = std::pair<State, State>;

/// Delta_s: the (from, to) pairs of every transition reading `symbol`.
struct TransitionRelation {
  Symbol symbol = 0;
  std::vector<StatePair> pairs;  // sorted, unique

  std::vector<State> domain() const {
    std::set<State> d;
    for (const auto& p : pairs) d.insert(p.first);
    return {d.begin(), d.end()};
  }
  std::vector<State> range() const {
    std::set<State> r;
    for (const auto& p : pairs) r.insert(p.second);
    return {r.begin(), r.end()};
  }
};

inline TransitionRelation make_relation(Symbol symbol, std::vector<StatePair> pairs) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return {symbol, std::move(pairs)};
}

/// One Cartesian block Q'_{s,k} x Q''_{s,k}; both sides sorted.
struct Block {
  std::vector<State> from;
  std::vector<State> to;
  friend bool operator==(const Block&, const Block&) = default;
};

enum class Minimality { Guaranteed, Heuristic };

struct TransitionDecomposition {
  Symbol symbol = 0;
  std::vector<Block> blocks;
  Minimality minimality = Minimality::Guaranteed;

  std::size_t block_count() const noexcept { return blocks.size(); }
  /// n_s = 1. An empty relation has no blocks and is also exact.
  bool exact() const noexcept { return blocks.size() <= 1; }
  /// Divisor for lower-bound capacities (never 0).
  std::size_t n_s() const noexcept { return std::max<std::size_t>(blocks.size(), 1); }
};

/// Pairs exact-searched for a minimum block partition; larger relations use
/// the greedy rule.
inline constexpr std::size_t kExactDecompositionLimit = 16;

inline TransitionRelation transitions_by_symbol(const PolicyNfa& nfa, Symbol symbol) {
  if (symbol != kEpsilon && symbol >= nfa.alphabet().size()) {
    throw Error(Errc::UnknownSymbol, "symbol id " + std::to_string(symbol) + " is not in the policy alphabet");
  }
  std::vector<StatePair> pairs;
  for (const auto& t : nfa.transitions()) {
    if (t.symbol == symbol) pairs.emplace_back(t.from, t.to);
  }
  return make_relation(symbol, std::move(pairs));
}

inline TransitionRelation transitions_by_symbol(const PolicyNfa& nfa, std::string_view symbol) {
  if (is_epsilon_token(symbol)) return transitions_by_symbol(nfa, kEpsilon);
  return transitions_by_symbol(nfa, nfa.alphabet().id(symbol, Errc::UnknownSymbol));
}

/// True iff pairs == domain x range (vacuously true when empty).
inline bool is_cartesian(const TransitionRelation& rel) {
  return rel.domain().size() * rel.range().size() == rel.pairs.size();
}

namespace detail {

inline Block block_of(const std::vector<StatePair>& pairs, std::uint32_t mask) {
  std::set<State> from, to;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (mask >> i & 1U) {
      from.insert(pairs[i].first);
      to.insert(pairs[i].second);
    }
  }
  return {{from.begin(), from.end()}, {to.begin(), to.end()}};
}

/// Minimum partition of the pair set into full products, by DP over pair
/// subsets. Among optimal partitions the one whose block masks are
/// numerically largest first is chosen.
inline std::vector<Block> exact_partition(const std::vector<StatePair>& pairs) {
  const std::size_t m = pairs.size();
  const std::uint32_t full = m == 32 ? ~0U : (1U << m) - 1U;

  // The pairs of a mask always lie inside rows(mask) x cols(mask); the mask is
  // the whole product exactly when the sizes agree.
  std::vector<char> is_product(std::size_t{full} + 1, 0);
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    std::set<State> rows, cols;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask >> i & 1U) {
        rows.insert(pairs[i].first);
        cols.insert(pairs[i].second);
      }
    }
    is_product[mask] = rows.size() * cols.size() == static_cast<std::size_t>(std::popcount(mask));
    if (mask == full) break;
  }

  constexpr std::uint8_t kUnknown = std::numeric_limits<std::uint8_t>::max();
  std::vector<std::uint8_t> best(std::size_t{full} + 1, kUnknown);
  std::vector<std::uint32_t> choice(std::size_t{full} + 1, 0);
  best[0] = 0;

  // Removing a block yields a numerically smaller mask, so increasing order
  // visits every remainder before it is needed.
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    std::uint32_t low = mask & (~mask + 1U);
    std::uint8_t best_here = kUnknown;
    std::uint32_t best_block = 0;
    // Enumerate submasks that contain the lowest set bit, largest first.
    for (std::uint32_t sub = mask; sub != 0; sub = (sub - 1) & mask) {
      if (!(sub & low) || !is_product[sub]) continue;
      std::uint8_t rest = best[mask & ~sub];
      if (rest == kUnknown) continue;
      if (rest + 1 < best_here) {
        best_here = static_cast<std::uint8_t>(rest + 1);
        best_block = sub;
      }
    }
    best[mask] = best_here;
    choice[mask] = best_block;
    if (mask == full) break;
  }

  std::vector<Block> blocks;
  for (std::uint32_t mask = full; mask != 0; mask &= ~choice[mask]) blocks.push_back(block_of(pairs, choice[mask]));
  return blocks;
}

/// Take the smallest remaining pair's row; grow the row set while the product
/// |rows| * |cols| increases; remove the block and repeat.
inline std::vector<Block> greedy_partition(const std::vector<StatePair>& pairs) {
  std::set<StatePair> remaining(pairs.begin(), pairs.end());
  std::vector<Block> blocks;
  while (!remaining.empty()) {
    State row = remaining.begin()->first;
    std::map<State, std::set<State>> out;
    for (const auto& [f, t] : remaining) out[f].insert(t);

    std::vector<State> rows{row};
    std::set<State> cols = out[row];
    for (const auto& [other, targets] : out) {
      if (other == row) continue;
      std::set<State> shared;
      std::set_intersection(cols.begin(), cols.end(), targets.begin(), targets.end(),
                            std::inserter(shared, shared.end()));
      if (!shared.empty() && (rows.size() + 1) * shared.size() > rows.size() * cols.size()) {
        rows.push_back(other);
        cols = std::move(shared);
      }
    }
    std::sort(rows.begin(), rows.end());
    for (State f : rows) {
      for (State t : cols) remaining.erase({f, t});
    }
    blocks.push_back({rows, {cols.begin(), cols.end()}});
  }
  return blocks;
}

}  // namespace detail

/// Disjoint partition of Delta_s into Cartesian blocks. Minimum block count is
/// guaranteed up to kExactDecompositionLimit pairs, greedy beyond.
inline TransitionDecomposition decompose(const TransitionRelation& rel) {
  TransitionDecomposition d;
  d.symbol = rel.symbol;
  if (rel.pairs.empty()) return d;
  if (is_cartesian(rel)) {
    d.blocks.push_back({rel.domain(), rel.range()});
    return d;
  }
  if (rel.pairs.size() <= kExactDecompositionLimit) {
    d.blocks = detail::exact_partition(rel.pairs);
    d.minimality = Minimality::Guaranteed;
  } else {
    d.blocks = detail::greedy_partition(rel.pairs);
    d.minimality = Minimality::Heuristic;
  }
  return d;
}

inline TransitionDecomposition greedy_decompose(const TransitionRelation& rel) {
  TransitionDecomposition d;
  d.symbol = rel.symbol;
  d.minimality = Minimality::Heuristic;
  if (!rel.pairs.empty()) d.blocks = detail::greedy_partition(rel.pairs);
  return d;
}

/// One decomposition per non-epsilon symbol of the alphabet, in symbol order.
inline std::vector<TransitionDecomposition> decompose_all(const PolicyNfa& nfa) {
  std::vector<TransitionDecomposition> out;
  for (Symbol s = 0; s < nfa.alphabet().size(); ++s) out.push_back(decompose(transitions_by_symbol(nfa, s)));
  return out;
}

inline bool all_exact(const std::vector<TransitionDecomposition>& decomps) {
  return std::all_of(decomps.begin(), decomps.end(), [](const auto& d) { return d.exact(); });
}

}  // namespace polcut
