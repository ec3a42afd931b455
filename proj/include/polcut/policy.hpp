#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "polcut/alphabet.hpp"
#include "polcut/error.hpp"
#include "polcut/graph.hpp"

namespace polcut {

// ---------------------------------------------------------------------------
// Policy expressions
// ---------------------------------------------------------------------------

/// Regular expression over whole-word label tokens.
struct PolicyExpr {
  enum class Kind { Symbol, Concat, Alternation, Star, Optional, Plus };

  Kind kind = Kind::Symbol;
  std::string symbol;               // Kind::Symbol only
  std::vector<PolicyExpr> children;  // operands, in order

  static PolicyExpr leaf(std::string s) { return {Kind::Symbol, std::move(s), {}}; }
  static PolicyExpr concat(std::vector<PolicyExpr> parts) { return {Kind::Concat, {}, std::move(parts)}; }
  static PolicyExpr alternation(std::vector<PolicyExpr> parts) { return {Kind::Alternation, {}, std::move(parts)}; }
  static PolicyExpr star(PolicyExpr e) { return {Kind::Star, {}, {std::move(e)}}; }
  static PolicyExpr optional(PolicyExpr e) { return {Kind::Optional, {}, {std::move(e)}}; }
  static PolicyExpr plus(PolicyExpr e) { return {Kind::Plus, {}, {std::move(e)}}; }

  friend bool operator==(const PolicyExpr&, const PolicyExpr&) = default;

  /// Fully parenthesised rendering that parses back to the same tree.
  std::string to_string() const {
    switch (kind) {
      case Kind::Symbol: return symbol;
      case Kind::Concat:
      case Kind::Alternation: {
        std::string out = "(";
        for (std::size_t i = 0; i < children.size(); ++i) {
          if (i) out += kind == Kind::Concat ? " " : " | ";
          out += children[i].to_string();
        }
        return out + ")";
      }
      case Kind::Star: return children[0].to_string() + "*";
      case Kind::Optional: return children[0].to_string() + "?";
      case Kind::Plus: return children[0].to_string() + "+";
    }
    return {};
  }
};

namespace detail {

inline bool is_token_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == ':' || c == '-';
}

class PolicyParser {
 public:
  PolicyParser(std::string_view text, const Alphabet* alphabet) : text_(text), alphabet_(alphabet) { advance(); }

  PolicyExpr parse() {
    if (tok_.kind == Tok::End) throw PositionedError(Errc::SyntaxError, tok_.pos, "empty policy");
    PolicyExpr e = alternation();
    if (tok_.kind != Tok::End) throw PositionedError(Errc::SyntaxError, tok_.pos, "unexpected '" + tok_.text + "'");
    return e;
  }

  /// Identifier tokens in order of appearance, without validation.
  static std::vector<std::string> tokens(std::string_view text) {
    PolicyParser p(text, nullptr);
    std::vector<std::string> out;
    while (p.tok_.kind != Tok::End) {
      if (p.tok_.kind == Tok::Ident) out.push_back(p.tok_.text);
      p.advance();
    }
    return out;
  }

 private:
  enum class Tok { Ident, LParen, RParen, Bar, Star, Question, Plus, End };
  struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t pos = 0;
  };

  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    tok_.pos = pos_;
    if (pos_ == text_.size()) {
      tok_ = {Tok::End, "<end>", pos_};
      return;
    }
    char c = text_[pos_];
    auto single = [&](Tok k) {
      tok_ = {k, std::string(1, c), pos_};
      ++pos_;
    };
    switch (c) {
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      case '|': return single(Tok::Bar);
      case '*': return single(Tok::Star);
      case '?': return single(Tok::Question);
      case '+': return single(Tok::Plus);
      default: break;
    }
    if (!is_token_char(c)) throw PositionedError(Errc::SyntaxError, pos_, std::string("unexpected character '") + c + "'");
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_token_char(text_[pos_])) ++pos_;
    tok_ = {Tok::Ident, std::string(text_.substr(start, pos_ - start)), start};
  }

  bool starts_atom() const { return tok_.kind == Tok::Ident || tok_.kind == Tok::LParen; }

  PolicyExpr alternation() {
    std::vector<PolicyExpr> parts{concatenation()};
    while (tok_.kind == Tok::Bar) {
      advance();
      parts.push_back(concatenation());
    }
    return parts.size() == 1 ? std::move(parts[0]) : PolicyExpr::alternation(std::move(parts));
  }

  PolicyExpr concatenation() {
    if (!starts_atom()) throw PositionedError(Errc::SyntaxError, tok_.pos, "expected a label or '(' but found '" + tok_.text + "'");
    std::vector<PolicyExpr> parts;
    while (starts_atom()) parts.push_back(postfix());
    return parts.size() == 1 ? std::move(parts[0]) : PolicyExpr::concat(std::move(parts));
  }

  PolicyExpr postfix() {
    PolicyExpr e = atom();
    while (true) {
      if (tok_.kind == Tok::Star) e = PolicyExpr::star(std::move(e));
      else if (tok_.kind == Tok::Question) e = PolicyExpr::optional(std::move(e));
      else if (tok_.kind == Tok::Plus) e = PolicyExpr::plus(std::move(e));
      else return e;
      advance();
    }
  }

  PolicyExpr atom() {
    if (tok_.kind == Tok::Ident) {
      if (alphabet_ && !alphabet_->contains(tok_.text)) {
        throw PositionedError(Errc::UnknownToken, tok_.pos, "label '" + tok_.text + "' is not in the alphabet");
      }
      PolicyExpr e = PolicyExpr::leaf(tok_.text);
      advance();
      return e;
    }
    std::size_t open = tok_.pos;
    advance();  // '('
    if (tok_.kind == Tok::RParen) throw PositionedError(Errc::SyntaxError, tok_.pos, "empty group");
    PolicyExpr e = alternation();
    if (tok_.kind != Tok::RParen) throw PositionedError(Errc::SyntaxError, open, "unbalanced '('");
    advance();
    return e;
  }

  std::string_view text_;
  const Alphabet* alphabet_;
  std::size_t pos_ = 0;
  Token tok_;
};

}  // namespace detail

/// Grammar: tokens `[A-Za-z0-9_.:-]+`, juxtaposition is concatenation,
/// postfix `* ? +`, infix `|` (lowest precedence), parentheses group.
inline PolicyExpr parse_policy(std::string_view text, const Alphabet& alphabet) {
  return detail::PolicyParser(text, &alphabet).parse();
}

/// Label tokens mentioned by a policy, in order of first appearance.
inline std::vector<std::string> policy_tokens(std::string_view text) {
  auto all = detail::PolicyParser::tokens(text);
  std::vector<std::string> out;
  for (auto& t : all) {
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// NFA
// ---------------------------------------------------------------------------

using State = std::uint32_t;

struct Transition {
  State from = 0;
  Symbol symbol = 0;
  State to = 0;
  friend auto operator<=>(const Transition&, const Transition&) = default;
};

/// (Q, Sigma, Delta, q0, F) with epsilon transitions allowed.
class PolicyNfa {
 public:
  PolicyNfa() = default;
  explicit PolicyNfa(Alphabet alphabet) : alphabet_(std::move(alphabet)) {}

  State add_state(std::string name = {}) {
    auto q = static_cast<State>(names_.size());
    names_.push_back(name.empty() ? "q" + std::to_string(q) : std::move(name));
    return q;
  }

  /// Delta is a set: repeated insertions are ignored.
  void add_transition(State from, Symbol symbol, State to) {
    check_state(from);
    check_state(to);
    if (symbol != kEpsilon && symbol >= alphabet_.size()) {
      throw Error(Errc::UnknownSymbol, "symbol id " + std::to_string(symbol) + " outside the alphabet");
    }
    Transition t{from, symbol, to};
    if (seen_.insert(t).second) transitions_.push_back(t);
  }

  void set_start(State q) {
    check_state(q);
    start_ = q;
  }

  void add_accepting(State q) {
    check_state(q);
    if (!is_accepting(q)) {
      accepting_.insert(std::upper_bound(accepting_.begin(), accepting_.end(), q), q);
    }
  }

  void clear_accepting() { accepting_.clear(); }

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t state_count() const noexcept { return names_.size(); }
  const std::string& state_name(State q) const { return names_.at(q); }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  State start() const noexcept { return start_; }
  const std::vector<State>& accepting() const noexcept { return accepting_; }
  bool is_accepting(State q) const { return std::binary_search(accepting_.begin(), accepting_.end(), q); }

  std::vector<Transition> epsilon_transitions() const {
    std::vector<Transition> out;
    for (const auto& t : transitions_) {
      if (t.symbol == kEpsilon) out.push_back(t);
    }
    return out;
  }

  /// Same automaton over a superset alphabet (symbol ids are remapped).
  PolicyNfa with_alphabet(const Alphabet& superset) const {
    if (!alphabet_.is_subset_of(superset)) {
      throw Error(Errc::AlphabetMismatch, "target alphabet does not contain every policy symbol");
    }
    PolicyNfa out(superset);
    out.names_ = names_;
    out.start_ = start_;
    out.accepting_ = accepting_;
    for (const auto& t : transitions_) {
      out.add_transition(t.from, t.symbol == kEpsilon ? kEpsilon : superset.id(alphabet_.name(t.symbol)), t.to);
    }
    return out;
  }

 private:
  void check_state(State q) const {
    if (q >= names_.size()) throw Error(Errc::UnknownSymbol, "state " + std::to_string(q) + " does not exist");
  }

  Alphabet alphabet_;
  std::vector<std::string> names_;
  std::vector<Transition> transitions_;
  std::set<Transition> seen_;
  State start_ = 0;
  std::vector<State> accepting_;
};

namespace detail {

inline std::vector<State> epsilon_closure(const PolicyNfa& nfa, std::vector<State> states) {
  std::vector<char> in(nfa.state_count(), 0);
  std::vector<State> stack;
  for (State q : states) {
    if (!in[q]) {
      in[q] = 1;
      stack.push_back(q);
    }
  }
  while (!stack.empty()) {
    State q = stack.back();
    stack.pop_back();
    for (const auto& t : nfa.transitions()) {
      if (t.from == q && t.symbol == kEpsilon && !in[t.to]) {
        in[t.to] = 1;
        stack.push_back(t.to);
      }
    }
  }
  std::vector<State> out;
  for (State q = 0; q < in.size(); ++q) {
    if (in[q]) out.push_back(q);
  }
  return out;
}

}  // namespace detail

/// Subset simulation with epsilon closure.
inline bool nfa_accepts(const PolicyNfa& nfa, const std::vector<Symbol>& word) {
  if (nfa.state_count() == 0) return false;
  auto current = detail::epsilon_closure(nfa, {nfa.start()});
  for (Symbol s : word) {
    std::vector<State> next;
    for (const auto& t : nfa.transitions()) {
      if (t.symbol == s && std::binary_search(current.begin(), current.end(), t.from)) next.push_back(t.to);
    }
    current = detail::epsilon_closure(nfa, std::move(next));
    if (current.empty()) return false;
  }
  return std::any_of(current.begin(), current.end(), [&](State q) { return nfa.is_accepting(q); });
}

inline bool nfa_accepts(const PolicyNfa& nfa, const std::vector<std::string>& word) {
  std::vector<Symbol> ids;
  ids.reserve(word.size());
  for (const auto& w : word) {
    auto id = nfa.alphabet().find(w);
    if (!id) return false;
    ids.push_back(*id);
  }
  return nfa_accepts(nfa, ids);
}

/// Splits "c2p c2p p2c" into tokens and tests membership.
inline bool nfa_accepts(const PolicyNfa& nfa, std::string_view spaced_word) {
  std::vector<std::string> word;
  std::istringstream in{std::string(spaced_word)};
  for (std::string tok; in >> tok;) word.push_back(tok);
  return nfa_accepts(nfa, word);
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

namespace detail {

struct Fragment {
  State start;
  State accept;
};

inline Fragment thompson(PolicyNfa& nfa, const PolicyExpr& e) {
  using K = PolicyExpr::Kind;
  switch (e.kind) {
    case K::Symbol: {
      State s = nfa.add_state();
      State f = nfa.add_state();
      nfa.add_transition(s, nfa.alphabet().id(e.symbol, Errc::UnknownToken), f);
      return {s, f};
    }
    case K::Concat: {
      Fragment whole = thompson(nfa, e.children.front());
      for (std::size_t i = 1; i < e.children.size(); ++i) {
        Fragment next = thompson(nfa, e.children[i]);
        nfa.add_transition(whole.accept, kEpsilon, next.start);
        whole.accept = next.accept;
      }
      return whole;
    }
    case K::Alternation: {
      State s = nfa.add_state();
      State f = nfa.add_state();
      for (const auto& child : e.children) {
        Fragment c = thompson(nfa, child);
        nfa.add_transition(s, kEpsilon, c.start);
        nfa.add_transition(c.accept, kEpsilon, f);
      }
      return {s, f};
    }
    case K::Star:
    case K::Optional:
    case K::Plus: {
      State s = nfa.add_state();
      Fragment c = thompson(nfa, e.children.front());
      State f = nfa.add_state();
      nfa.add_transition(s, kEpsilon, c.start);
      nfa.add_transition(c.accept, kEpsilon, f);
      if (e.kind != K::Plus) nfa.add_transition(s, kEpsilon, f);
      if (e.kind != K::Optional) nfa.add_transition(c.accept, kEpsilon, c.start);
      return {s, f};
    }
  }
  throw Error(Errc::SyntaxError, "malformed expression");
}

}  // namespace detail

/// Thompson construction. The result has exactly one accepting state and keeps
/// its epsilon transitions.
inline PolicyNfa compile_nfa(const PolicyExpr& expr, const Alphabet& alphabet) {
  PolicyNfa nfa(alphabet);
  auto frag = detail::thompson(nfa, expr);
  nfa.set_start(frag.start);
  nfa.add_accepting(frag.accept);
  return nfa;
}

inline PolicyNfa compile_policy(std::string_view regex, const Alphabet& alphabet) {
  return compile_nfa(parse_policy(regex, alphabet), alphabet);
}

/// Adds a single terminal state q* when |F| > 1: every transition into F is
/// copied onto q*. An accepting start state additionally gets q0 -eps-> q* so
/// the empty word survives.
inline PolicyNfa normalize_terminals(const PolicyNfa& nfa) {
  if (nfa.accepting().empty()) throw Error(Errc::NoAcceptingState, "policy automaton has no accepting state");
  if (nfa.accepting().size() == 1) return nfa;
  PolicyNfa out = nfa;
  State terminal = out.add_state("q*");
  for (const auto& t : nfa.transitions()) {
    if (nfa.is_accepting(t.to)) out.add_transition(t.from, t.symbol, terminal);
  }
  if (nfa.is_accepting(nfa.start())) out.add_transition(nfa.start(), kEpsilon, terminal);
  out.clear_accepting();
  out.add_accepting(terminal);
  return out;
}

/// Standard closure construction: same states, no epsilon transitions.
inline PolicyNfa remove_epsilon(const PolicyNfa& nfa) {
  PolicyNfa out(nfa.alphabet());
  for (State q = 0; q < nfa.state_count(); ++q) out.add_state(nfa.state_name(q));
  out.set_start(nfa.start());
  for (State q = 0; q < nfa.state_count(); ++q) {
    auto closure = detail::epsilon_closure(nfa, {q});
    for (State p : closure) {
      if (nfa.is_accepting(p)) out.add_accepting(q);
      for (const auto& t : nfa.transitions()) {
        if (t.from == p && t.symbol != kEpsilon) out.add_transition(q, t.symbol, t.to);
      }
    }
  }
  return out;
}

/// Product automaton of the epsilon-free inputs, restricted to pairs reachable
/// from the start pair. Accepts L(a) intersected with L(b).
inline PolicyNfa intersect(const PolicyNfa& a, const PolicyNfa& b) {
  if (!a.alphabet().same_symbols(b.alphabet())) {
    throw Error(Errc::AlphabetMismatch, "intersect requires identical alphabets");
  }
  PolicyNfa left = remove_epsilon(a);
  PolicyNfa right = remove_epsilon(b.with_alphabet(a.alphabet()));

  std::vector<std::vector<std::pair<Symbol, State>>> right_out(right.state_count());
  for (const auto& t : right.transitions()) right_out[t.from].emplace_back(t.symbol, t.to);

  PolicyNfa out(a.alphabet());
  std::map<std::pair<State, State>, State> ids;
  std::deque<std::pair<State, State>> queue;
  auto id_of = [&](State p, State q) {
    auto key = std::make_pair(p, q);
    if (auto it = ids.find(key); it != ids.end()) return it->second;
    State s = out.add_state("(" + left.state_name(p) + "," + right.state_name(q) + ")");
    ids.emplace(key, s);
    queue.push_back(key);
    if (left.is_accepting(p) && right.is_accepting(q)) out.add_accepting(s);
    return s;
  };
  out.set_start(id_of(left.start(), right.start()));
  while (!queue.empty()) {
    auto [p, q] = queue.front();
    queue.pop_front();
    State from = ids.at({p, q});
    for (const auto& t : left.transitions()) {
      if (t.from != p) continue;
      for (const auto& [sym, to] : right_out[q]) {
        if (sym == t.symbol) {
          State target = id_of(t.to, to);
          out.add_transition(from, t.symbol, target);
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Presets and tuple alphabets
// ---------------------------------------------------------------------------

struct Preset {
  std::string name;
  std::string regex;
  Alphabet alphabet;
  PolicyNfa nfa;
};

inline const Alphabet& relationship_alphabet() {
  static const Alphabet sigma{"c2p", "p2p", "p2c"};
  return sigma;
}

inline std::vector<std::string> preset_names() { return {"valley-free", "multiple-peering-links", "any"}; }

inline std::string preset_regex(std::string_view name) {
  if (name == "valley-free") return "c2p* p2p? p2c*";
  if (name == "multiple-peering-links") return "c2p* p2p* p2c*";
  if (name == "any") return "(c2p|p2p|p2c)*";
  throw Error(Errc::UnknownPreset, "no preset named '" + std::string(name) + "'");
}

inline Preset preset(std::string_view name) {
  std::string regex = preset_regex(name);
  const Alphabet& sigma = relationship_alphabet();
  return {std::string(name), regex, sigma, compile_policy(regex, sigma)};
}

/// Rewrites every base label `rel` into the alternation of the tuple labels
/// `rel<sep>...` present in `tuple_alphabet` (e.g. c2p -> c2p:AS1 | c2p:AS2).
inline PolicyExpr expand_over_tuples(const PolicyExpr& expr, const Alphabet& tuple_alphabet, char separator = ':') {
  if (expr.kind == PolicyExpr::Kind::Symbol) {
    std::vector<PolicyExpr> options;
    for (const auto& s : tuple_alphabet.symbols()) {
      auto sep = s.find(separator);
      if (sep != std::string::npos && s.compare(0, sep, expr.symbol) == 0 && sep == expr.symbol.size()) {
        options.push_back(PolicyExpr::leaf(s));
      }
    }
    if (options.empty()) throw Error(Errc::UnknownToken, "no tuple label refines '" + expr.symbol + "'");
    return options.size() == 1 ? std::move(options[0]) : PolicyExpr::alternation(std::move(options));
  }
  PolicyExpr out = expr;
  for (auto& child : out.children) child = expand_over_tuples(child, tuple_alphabet, separator);
  return out;
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

/// Header lines `start: q0` and `accept: q1 q2 ...`, optional
/// `alphabet: a b ...`, then one `from <symbol>|eps to` transition per line.
inline PolicyNfa read_nfa(std::istream& in, const std::optional<Alphabet>& base_alphabet = std::nullopt) {
  struct Row {
    std::string from, symbol, to;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::optional<std::string> start;
  std::vector<std::string> accept;
  std::vector<std::string> declared;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = detail::strip_comment(line);
    if (body.empty()) continue;
    auto colon = body.find(':');
    auto header = colon == std::string_view::npos ? std::string_view{} : detail::trim(body.substr(0, colon));
    if (header == "start" || header == "accept" || header == "alphabet") {
      std::istringstream fields{std::string(body.substr(colon + 1))};
      std::vector<std::string> values;
      for (std::string v; fields >> v;) values.push_back(v);
      if (header == "start") {
        if (values.size() != 1) throw PositionedError(Errc::ParseError, line_no, "start needs exactly one state");
        start = values[0];
      } else if (header == "accept") {
        accept.insert(accept.end(), values.begin(), values.end());
      } else {
        declared.insert(declared.end(), values.begin(), values.end());
      }
      continue;
    }
    std::istringstream fields{std::string(body)};
    Row r{{}, {}, {}, line_no};
    std::string extra;
    if (!(fields >> r.from >> r.symbol >> r.to) || (fields >> extra)) {
      throw PositionedError(Errc::ParseError, line_no, "expected '<from> <symbol>|eps <to>'");
    }
    rows.push_back(std::move(r));
  }
  if (!start) throw Error(Errc::ParseError, "missing 'start:' line");

  Alphabet sigma = base_alphabet.value_or(Alphabet{});
  try {
    for (const auto& s : declared) sigma.add(s);
    for (const auto& r : rows) {
      if (!is_epsilon_token(r.symbol)) sigma.add(r.symbol);
    }
  } catch (const Error& e) {
    throw Error(Errc::ParseError, e.what());
  }

  PolicyNfa nfa(sigma);
  std::map<std::string, State> states;
  auto state = [&](const std::string& name) {
    if (auto it = states.find(name); it != states.end()) return it->second;
    State q = nfa.add_state(name);
    states.emplace(name, q);
    return q;
  };
  nfa.set_start(state(*start));
  for (const auto& r : rows) {
    State from = state(r.from);
    State to = state(r.to);
    nfa.add_transition(from, is_epsilon_token(r.symbol) ? kEpsilon : sigma.id(r.symbol), to);
  }
  for (const auto& a : accept) nfa.add_accepting(state(a));
  return nfa;
}

inline PolicyNfa read_nfa_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_nfa(in);
}

inline void write_nfa(std::ostream& out, const PolicyNfa& nfa) {
  out << "start: " << nfa.state_name(nfa.start()) << '\n';
  out << "accept:";
  for (State q : nfa.accepting()) out << ' ' << nfa.state_name(q);
  out << '\n';
  out << "alphabet:";
  for (const auto& s : nfa.alphabet().symbols()) out << ' ' << s;
  out << '\n';
  for (const auto& t : nfa.transitions()) {
    out << nfa.state_name(t.from) << ' ' << nfa.alphabet().display(t.symbol) << ' ' << nfa.state_name(t.to) << '\n';
  }
}

}  // namespace polcut
