#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "polcut/error.hpp"

namespace polcut {

using Symbol = std::uint32_t;

/// Reserved symbol for transitions that consume no input. Never a graph label.
inline constexpr Symbol kEpsilon = std::numeric_limits<Symbol>::max();
inline constexpr std::string_view kEpsilonToken = "eps";

inline bool is_epsilon_token(std::string_view token) noexcept {
  return token == kEpsilonToken || token == "\xCE\xB5";  // "eps" or UTF-8 epsilon
}

/// Finite, ordered symbol set. Symbol ids are positions in insertion order.
class Alphabet {
 public:
  Alphabet() = default;
  Alphabet(std::initializer_list<std::string_view> symbols) {
    for (auto s : symbols) add(s);
  }
  explicit Alphabet(const std::vector<std::string>& symbols) {
    for (const auto& s : symbols) add(s);
  }

  /// Adds `symbol` if absent and returns its id.
  Symbol add(std::string_view symbol) {
    if (is_epsilon_token(symbol)) {
      throw Error(Errc::ReservedEpsilonLabel, "'" + std::string(symbol) + "' is reserved for epsilon transitions");
    }
    if (symbol.empty()) throw Error(Errc::UnknownLabel, "empty symbol");
    if (auto it = index_.find(std::string(symbol)); it != index_.end()) return it->second;
    auto id = static_cast<Symbol>(symbols_.size());
    symbols_.emplace_back(symbol);
    index_.emplace(symbols_.back(), id);
    return id;
  }

  std::optional<Symbol> find(std::string_view symbol) const {
    if (auto it = index_.find(std::string(symbol)); it != index_.end()) return it->second;
    return std::nullopt;
  }

  bool contains(std::string_view symbol) const { return find(symbol).has_value(); }

  Symbol id(std::string_view symbol, Errc missing = Errc::UnknownLabel) const {
    if (auto found = find(symbol)) return *found;
    if (is_epsilon_token(symbol)) {
      throw Error(Errc::ReservedEpsilonLabel, "'" + std::string(symbol) + "' is reserved for epsilon transitions");
    }
    throw Error(missing, "symbol '" + std::string(symbol) + "' is not in the alphabet");
  }

  const std::string& name(Symbol s) const { return symbols_.at(s); }

  std::string display(Symbol s) const { return s == kEpsilon ? std::string(kEpsilonToken) : name(s); }

  std::size_t size() const noexcept { return symbols_.size(); }
  const std::vector<std::string>& symbols() const noexcept { return symbols_; }

  /// Set equality, ignoring order.
  bool same_symbols(const Alphabet& other) const {
    if (size() != other.size()) return false;
    return std::all_of(symbols_.begin(), symbols_.end(), [&](const std::string& s) { return other.contains(s); });
  }

  bool is_subset_of(const Alphabet& other) const {
    return std::all_of(symbols_.begin(), symbols_.end(), [&](const std::string& s) { return other.contains(s); });
  }

  Alphabet merged(const Alphabet& other) const {
    Alphabet out = *this;
    for (const auto& s : other.symbols_) out.add(s);
    return out;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, Symbol> index_;
};

}  // namespace polcut
