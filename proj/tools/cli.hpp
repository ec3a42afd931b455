#pragma once

// Command-line front end. `run` takes the argument vector (without the program
// name) and two streams so the tests can drive it in-process.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "polcut/polcut.hpp"

namespace polcut::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Thrown for malformed invocations that CLI11 itself accepts.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PolicyOptions {
  std::string regex;
  std::string nfa_file;
  std::string preset;
};

struct CommonOptions {
  std::string graph_file;
  PolicyOptions policy;
  std::string source;
  std::string sink;
  bool unit_capacities = false;
  bool no_prune = false;
  std::string format = "text";
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

struct OracleOptions {
  std::size_t max_len = 0;  // 0 = |E|
  bool node_simple = false;
  std::size_t max_paths = 24;
  std::size_t max_states = 1'000'000;
};

struct ExperimentOptions {
  std::string as_rel;
  std::string weights;
  std::size_t pairs = 100;
  std::string augment;
  std::string peering_class = "open";
  std::vector<std::string> depeer;
  std::size_t cone_depth = 3;
};

/// A compiled policy plus the text used to describe it in reports.
struct LoadedPolicy {
  PolicyNfa nfa;
  std::string kind;  // preset | regex | nfa
  std::string description;
  std::string regex;  // empty for NFA files
};

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
  return in;
}

inline LabeledDigraph load_graph(const std::string& path) {
  auto in = open_input(path);
  return read_graph(in);
}

inline void check_single_policy(const PolicyOptions& p, bool required = true) {
  int given = !p.regex.empty() + !p.nfa_file.empty() + !p.preset.empty();
  if (given > 1) throw UsageError("give only one of --policy-regex, --policy-nfa, --preset");
  if (given == 0 && required) throw UsageError("one of --policy-regex, --policy-nfa, --preset is required");
}

/// The returned automaton's alphabet also covers every label of `labels`, so
/// graph edges the policy never mentions simply fail to match.
inline LoadedPolicy load_policy(const PolicyOptions& p, const Alphabet& labels) {
  LoadedPolicy out;
  if (!p.preset.empty()) {
    Preset pre = preset(p.preset);
    out.nfa = pre.nfa.with_alphabet(pre.alphabet.merged(labels));
    out.kind = "preset";
    out.description = pre.name;
    out.regex = pre.regex;
  } else if (!p.regex.empty()) {
    Alphabet sigma = labels;
    for (const auto& tok : policy_tokens(p.regex)) sigma.add(tok);
    out.nfa = compile_policy(p.regex, sigma);
    out.kind = "regex";
    out.description = p.regex;
    out.regex = p.regex;
  } else {
    auto in = open_input(p.nfa_file);
    PolicyNfa nfa = read_nfa(in);
    out.nfa = nfa.with_alphabet(nfa.alphabet().merged(labels));
    out.kind = "nfa";
    out.description = p.nfa_file;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Formatting helpers
// ---------------------------------------------------------------------------

inline Json rational_number(const Rational& r) {
  if (denominator(r) == 1 && abs(numerator(r)) < BigInt(1) << 53) return Json(numerator(r).convert_to<long long>());
  return Json(r.convert_to<double>());
}

inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline Json policy_json(const LoadedPolicy& p) {
  Json j;
  j["kind"] = p.kind;
  j["description"] = p.description;
  if (!p.regex.empty()) j["regex"] = p.regex;
  return j;
}

inline Json block_json(const Block& b, const std::vector<std::string>& names) {
  Json from = Json::array();
  Json to = Json::array();
  for (State q : b.from) from.push_back(names.at(q));
  for (State q : b.to) to.push_back(names.at(q));
  return Json{{"from", from}, {"to", to}};
}

inline std::string block_text(const Block& b, const std::vector<std::string>& names) {
  auto side = [&](const std::vector<State>& qs) {
    std::string s = "{";
    for (std::size_t i = 0; i < qs.size(); ++i) s += (i ? "," : "") + names.at(qs[i]);
    return s + "}";
  };
  return side(b.from) + " x " + side(b.to);
}

inline std::string_view minimality_name(Minimality m) {
  return m == Minimality::Guaranteed ? "guaranteed" : "heuristic";
}

/// Per-symbol n_s summary; symbols the policy never reads get n_s = 0.
inline Json symbols_json(const std::vector<SymbolBlocks>& symbols, const std::vector<std::string>& state_names,
                         bool with_blocks) {
  Json arr = Json::array();
  for (const auto& s : symbols) {
    Json j;
    j["symbol"] = s.symbol;
    j["n_s"] = s.n_s;
    j["minimality"] = minimality_name(s.minimality);
    if (with_blocks) {
      Json blocks = Json::array();
      for (const auto& b : s.blocks) blocks.push_back(block_json(b, state_names));
      j["blocks"] = blocks;
    }
    arr.push_back(j);
  }
  return arr;
}

inline std::string gap_symbols(const std::vector<SymbolBlocks>& symbols) {
  std::string out;
  for (const auto& s : symbols) {
    if (s.n_s > 1) out += (out.empty() ? "" : ", ") + std::string("n_") + s.symbol + "=" + std::to_string(s.n_s);
  }
  return out;
}

inline Json paths_json(const LabeledDigraph& g, const std::vector<ProjectedPath>& paths) {
  Json arr = Json::array();
  for (const auto& p : paths) {
    Json nodes = Json::array();
    Json labels = Json::array();
    Json edges = Json::array();
    if (!p.edges.empty()) nodes.push_back(g.node_name(g.edge(p.edges.front()).src));
    for (EdgeId id : p.edges) {
      nodes.push_back(g.node_name(g.edge(id).dst));
      labels.push_back(g.label_name(id));
      edges.push_back(id.index);
    }
    arr.push_back(Json{{"nodes", nodes},
                       {"labels", labels},
                       {"edges", edges},
                       {"flow", rational_number(p.flow)},
                       {"flow_rational", format_rational(p.flow)}});
  }
  return arr;
}

inline void emit_json(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

inline CutOptions cut_options(const CommonOptions& o, const LoadedPolicy& p) {
  CutOptions opts;
  opts.prune = !o.no_prune;
  opts.policy_description = p.description;
  return opts;
}

inline Json cut_json(const std::string& command, const CommonOptions& o, const LoadedPolicy& p,
                     const LabeledDigraph& g, const CutReport& r, const std::vector<std::string>& state_names,
                     bool include_paths) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["policy"] = policy_json(p);
  j["source"] = r.source;
  j["sink"] = r.sink;
  j["unit_capacities"] = o.unit_capacities;
  j["exact"] = r.exact;
  if (r.exact) {
    j["value"] = rational_number(r.upper);
    j["value_rational"] = format_rational(r.upper);
  }
  j["lower"] = rational_number(r.lower);
  j["lower_rational"] = format_rational(r.lower);
  j["upper"] = rational_number(r.upper);
  j["upper_rational"] = format_rational(r.upper);
  j["symbols"] = symbols_json(r.symbols, state_names, false);
  j["transformed"] = Json{{"nodes", r.transformed_nodes},
                          {"edges", r.transformed_edges},
                          {"pruned_nodes", r.pruned_nodes},
                          {"pruned_edges", r.pruned_edges}};
  if (include_paths) j["paths"] = paths_json(g, r.paths);
  return j;
}

inline void cut_text(std::ostream& out, const LoadedPolicy& p, const LabeledDigraph& g, const CutReport& r,
                     bool include_paths) {
  out << "policy: " << p.description;
  if (!p.regex.empty() && p.regex != p.description) out << " (" << p.regex << ")";
  out << '\n' << "source: " << r.source << '\n' << "sink: " << r.sink << '\n';
  if (r.exact) {
    out << "exact: yes\n" << "value: " << format_rational(r.upper) << '\n';
  } else {
    out << "exact: no (" << gap_symbols(r.symbols) << ")\n"
        << "lower: " << format_rational(r.lower) << '\n'
        << "upper: " << format_rational(r.upper) << '\n';
  }
  if (!include_paths) return;
  out << "paths: " << r.paths.size() << '\n';
  for (const auto& path : r.paths) out << "  " << format_rational(path.flow) << "  " << describe_path(g, path) << '\n';
}

/// mincut, diversity (unit capacities forced) and paths (path listing only).
inline int cmd_cut(const std::string& command, CommonOptions o, std::ostream& out) {
  check_single_policy(o.policy);
  if (command == "diversity") o.unit_capacities = true;
  LabeledDigraph g = load_graph(o.graph_file);
  if (o.unit_capacities) g = with_unit_capacities(g);
  LoadedPolicy p = load_policy(o.policy, g.alphabet());
  AugmentedNfa aug = prepare_policy(p.nfa);
  CutReport r = min_cut_bounds(g, p.nfa, o.source, o.sink, cut_options(o, p));
  const bool paths_only = command == "paths";

  if (o.format == "json") {
    Json j = cut_json(command, o, p, g, r, aug.state_names, true);
    emit_json(out, j);
  } else if (o.format == "csv") {
    if (paths_only) {
      out << "path,flow,nodes,labels\n";
      for (std::size_t i = 0; i < r.paths.size(); ++i) {
        std::string nodes, labels;
        const auto& path = r.paths[i];
        if (!path.edges.empty()) nodes = g.node_name(g.edge(path.edges.front()).src);
        for (EdgeId id : path.edges) {
          nodes += " " + g.node_name(g.edge(id).dst);
          labels += (labels.empty() ? "" : " ") + g.label_name(id);
        }
        out << i + 1 << ',' << format_rational(path.flow) << ',' << csv_field(nodes) << ',' << csv_field(labels)
            << '\n';
      }
    } else {
      out << "source,sink,lower,upper,exact\n"
          << csv_field(r.source) << ',' << csv_field(r.sink) << ',' << format_rational(r.lower) << ','
          << format_rational(r.upper) << ',' << (r.exact ? "true" : "false") << '\n';
    }
  } else {
    if (paths_only) {
      for (const auto& path : r.paths) out << format_rational(path.flow) << "  " << describe_path(g, path) << '\n';
    } else {
      cut_text(out, p, g, r, true);
    }
  }
  return kExitOk;
}

inline int cmd_transform(const CommonOptions& o, const std::string& out_file, std::ostream& out) {
  check_single_policy(o.policy);
  LabeledDigraph g = load_graph(o.graph_file);
  if (o.unit_capacities) g = with_unit_capacities(g);
  LoadedPolicy p = load_policy(o.policy, g.alphabet());
  AugmentedNfa aug = prepare_policy(p.nfa);
  TransformedGraph full = tensor_transform(g, aug, o.source, o.sink);
  TransformedGraph tg = o.no_prune ? full : prune_unreachable(full);

  if (out_file.empty()) {
    write_transformed(out, tg);
    return kExitOk;
  }
  {
    std::ofstream file(out_file);
    if (!file) throw Error(Errc::IoError, "cannot write '" + out_file + "'");
    write_transformed(file, tg);
    std::ofstream prov(out_file + ".prov");
    if (!prov) throw Error(Errc::IoError, "cannot write '" + out_file + ".prov'");
    write_provenance(prov, tg);
  }
  const std::size_t eps_pairs = aug.epsilon_pairs.size();
  const std::size_t edge_bound = g.edge_count() * aug.max_n_s() + g.node_count() * eps_pairs;
  if (o.format == "json") {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "transform";
    j["policy"] = policy_json(p);
    j["source"] = o.source;
    j["sink"] = o.sink;
    j["exact"] = aug.exact();
    j["graph"] = Json{{"nodes", g.node_count()}, {"edges", g.edge_count()}};
    j["augmented_states"] = aug.state_count();
    j["aggregator_states"] = aug.aggregator_states.size();
    j["transformed"] = Json{{"nodes", full.node_count()}, {"edges", full.edge_count()}, {"edge_bound", edge_bound}};
    j["written"] = Json{{"nodes", tg.node_count()},
                        {"edges", tg.edge_count()},
                        {"graph", out_file},
                        {"provenance", out_file + ".prov"}};
    emit_json(out, j);
  } else {
    out << "augmented states: " << aug.state_count() << " (" << aug.aggregator_states.size() << " aggregators)\n"
        << "transformed nodes: " << full.node_count() << '\n'
        << "transformed edges: " << full.edge_count() << " (bound " << edge_bound << ")\n"
        << "written: " << tg.node_count() << " nodes, " << tg.edge_count() << " edges to " << out_file << '\n'
        << "provenance: " << out_file << ".prov\n";
  }
  return kExitOk;
}

inline int cmd_check_exact(const CommonOptions& o, std::ostream& out) {
  check_single_policy(o.policy);
  Alphabet labels;
  if (!o.graph_file.empty()) labels = load_graph(o.graph_file).alphabet();
  LoadedPolicy p = load_policy(o.policy, labels);
  AugmentedNfa aug = prepare_policy(p.nfa);
  auto symbols = summarize_blocks(aug);
  if (o.format == "json") {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "check-exact";
    j["policy"] = policy_json(p);
    j["states"] = aug.base.state_count();
    j["symbols"] = symbols_json(symbols, aug.state_names, true);
    j["exact"] = aug.exact();
    j["verdict"] = aug.exact() ? "exact" : "bounds";
    emit_json(out, j);
  } else if (o.format == "csv") {
    out << "symbol,n_s,minimality,blocks\n";
    for (const auto& s : symbols) {
      std::string blocks;
      for (const auto& b : s.blocks) blocks += (blocks.empty() ? "" : "; ") + block_text(b, aug.state_names);
      out << csv_field(s.symbol) << ',' << s.n_s << ',' << minimality_name(s.minimality) << ',' << csv_field(blocks)
          << '\n';
    }
    out << "verdict," << (aug.exact() ? "exact" : "bounds") << ",,\n";
  } else {
    out << "policy: " << p.description << '\n';
    for (const auto& s : symbols) {
      out << "symbol " << s.symbol << ": n_s=" << s.n_s;
      if (s.minimality == Minimality::Heuristic) out << " (greedy)";
      out << '\n';
      for (const auto& b : s.blocks) out << "  " << block_text(b, aug.state_names) << '\n';
    }
    out << "verdict: " << (aug.exact() ? "exact" : "bounds (lower <= value <= upper)") << '\n';
  }
  return kExitOk;
}

inline int cmd_oracle(const CommonOptions& o, const OracleOptions& oo, std::ostream& out) {
  check_single_policy(o.policy);
  LabeledDigraph g = load_graph(o.graph_file);
  if (o.unit_capacities) g = with_unit_capacities(g);
  LoadedPolicy p = load_policy(o.policy, g.alphabet());
  oracle::Limits limits{oo.max_states, oo.max_paths};
  const std::size_t max_len = oo.max_len ? oo.max_len : std::max<std::size_t>(g.edge_count(), 1);
  const auto mode = oo.node_simple ? oracle::PathMode::NodeSimple : oracle::PathMode::EdgeSimple;
  auto pset = oracle::enumerate_compliant_paths(g, p.nfa, o.source, o.sink, max_len, mode, limits);
  std::size_t packing = oracle::max_disjoint_packing(pset, limits);
  Rational bisection = oracle::oracle_bisection(g, p.nfa, o.source, o.sink, max_len, mode, limits);

  if (o.format == "json") {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "oracle";
    j["policy"] = policy_json(p);
    j["source"] = o.source;
    j["sink"] = o.sink;
    j["path_mode"] = oo.node_simple ? "node-simple" : "edge-simple";
    j["max_len"] = max_len;
    j["diversity"] = packing;
    j["bisection"] = rational_number(bisection);
    j["bisection_rational"] = format_rational(bisection);
    Json paths = Json::array();
    for (const auto& path : pset.paths) {
      Json edges = Json::array();
      for (EdgeId id : path) edges.push_back(id.index);
      paths.push_back(Json{{"edges", edges}, {"route", describe_path(g, {path, Rational(0)})}});
    }
    j["paths"] = paths;
    emit_json(out, j);
  } else if (o.format == "csv") {
    out << "source,sink,diversity,bisection,paths\n"
        << csv_field(o.source) << ',' << csv_field(o.sink) << ',' << packing << ',' << format_rational(bisection)
        << ',' << pset.paths.size() << '\n';
  } else {
    out << "compliant paths: " << pset.paths.size() << " (" << (oo.node_simple ? "node" : "edge")
        << "-simple, length <= " << max_len << ")\n";
    for (const auto& path : pset.paths) out << "  " << describe_path(g, {path, Rational(0)}) << '\n';
    out << "diversity: " << packing << '\n' << "bisection: " << format_rational(bisection) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct PairResult {
  std::string source;
  std::string sink;
  Rational lower{0};
  Rational upper{0};
  bool exact = false;
};

/// Evaluates every pair, spreading them over `jobs` threads. Results keep the
/// input order so output never depends on scheduling.
inline std::vector<PairResult> evaluate_pairs(const LabeledDigraph& g, const PolicyNfa& nfa,
                                              const std::vector<std::pair<std::string, std::string>>& pairs,
                                              std::size_t jobs) {
  std::vector<PairResult> results(pairs.size());
  std::vector<std::optional<Error>> failures(pairs.size());
  std::size_t next = 0;
  std::mutex lock;
  auto worker = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard guard(lock);
        if (next == pairs.size()) return;
        i = next++;
      }
      try {
        CutReport r = min_cut_bounds(g, nfa, pairs[i].first, pairs[i].second);
        results[i] = {pairs[i].first, pairs[i].second, r.lower, r.upper, r.exact};
      } catch (const Error& e) {
        failures[i] = e;
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < std::max<std::size_t>(jobs, 1); ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (auto& f : failures) {
    if (f) throw *f;
  }
  return results;
}

/// Population mean and standard deviation.
inline std::pair<double, double> mean_stddev(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {mean, std::sqrt(var)};
}

inline LabeledDigraph load_topology(const ExperimentOptions& e) {
  if (e.as_rel.empty()) throw UsageError("--as-rel is required");
  auto in = open_input(e.as_rel);
  LabeledDigraph g = ingest::to_labeled_graph(ingest::parse_as_rel(in, e.as_rel));
  if (!e.augment.empty()) {
    auto members_in = open_input(e.augment);
    g = ingest::augment_peering(g, ingest::parse_members_csv(members_in), ingest::parse_peering_policy(e.peering_class));
  }
  return g;
}

inline std::pair<std::string, std::string> parse_as_pair(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw UsageError("expected ASN1:ASN2 but got '" + text + "'");
  }
  return {text.substr(0, colon), text.substr(colon + 1)};
}

inline LabeledDigraph apply_depeering(LabeledDigraph g, const std::vector<std::string>& specs) {
  for (const auto& spec : specs) {
    auto [a, b] = parse_as_pair(spec);
    g = ingest::depeer(g, a, b);
  }
  return g;
}

inline PolicyOptions experiment_policy(const PolicyOptions& p, const std::string& policy_name) {
  PolicyOptions out = p;
  if (!policy_name.empty()) {
    if (!p.preset.empty()) throw UsageError("give only one of --policy, --preset");
    out.preset = policy_name;
  }
  int given = !out.regex.empty() + !out.nfa_file.empty() + !out.preset.empty();
  if (given == 0) out.preset = "valley-free";
  return out;
}

inline Json pair_json(const PairResult& r) {
  Json j;
  j["source"] = r.source;
  j["sink"] = r.sink;
  j["exact"] = r.exact;
  j["lower"] = rational_number(r.lower);
  j["lower_rational"] = format_rational(r.lower);
  j["upper"] = rational_number(r.upper);
  j["upper_rational"] = format_rational(r.upper);
  return j;
}

inline int cmd_experiment_diversity(const CommonOptions& o, const ExperimentOptions& e, const std::string& policy_name,
                                    std::ostream& out) {
  PolicyOptions po = experiment_policy(o.policy, policy_name);
  check_single_policy(po);
  LabeledDigraph g = apply_depeering(load_topology(e), e.depeer);
  LoadedPolicy p = load_policy(po, g.alphabet());

  ingest::WeightTable weights;
  if (!e.weights.empty()) {
    auto in = open_input(e.weights);
    for (const auto& [asn, w] : ingest::parse_weights_csv(in)) {
      if (g.find_node(std::to_string(asn))) weights[asn] = w;
    }
  } else {
    for (const auto& name : g.node_names()) weights[static_cast<ingest::Asn>(std::stoul(name))] = 1;
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& [a, b] : ingest::weighted_sample_pairs(weights, e.pairs, o.seed)) {
    pairs.emplace_back(std::to_string(a), std::to_string(b));
  }
  auto results = evaluate_pairs(g, p.nfa, pairs, o.jobs);

  std::vector<double> lowers, uppers;
  bool all_exact = true;
  for (const auto& r : results) {
    lowers.push_back(r.lower.convert_to<double>());
    uppers.push_back(r.upper.convert_to<double>());
    all_exact = all_exact && r.exact;
  }
  auto [mean_lo, sd_lo] = mean_stddev(lowers);
  auto [mean_up, sd_up] = mean_stddev(uppers);

  if (o.format == "json") {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "experiment diversity";
    j["policy"] = policy_json(p);
    j["seed"] = o.seed;
    j["pairs_requested"] = e.pairs;
    j["graph"] = Json{{"nodes", g.node_count()}, {"edges", g.edge_count()}};
    j["exact"] = all_exact;
    Json rows = Json::array();
    for (const auto& r : results) rows.push_back(pair_json(r));
    j["pairs"] = rows;
    j["summary"] = Json{{"mean_lower", mean_lo}, {"stddev_lower", sd_lo}, {"mean_upper", mean_up}, {"stddev_upper", sd_up}};
    emit_json(out, j);
  } else if (o.format == "csv") {
    out << "pair,source,sink,lower,upper,exact\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      out << i + 1 << ',' << r.source << ',' << r.sink << ',' << format_rational(r.lower) << ','
          << format_rational(r.upper) << ',' << (r.exact ? "true" : "false") << '\n';
    }
    out << "mean,,," << fixed(mean_lo) << ',' << fixed(mean_up) << ',' << (all_exact ? "true" : "false") << '\n';
    out << "stddev,,," << fixed(sd_lo) << ',' << fixed(sd_up) << ',' << (all_exact ? "true" : "false") << '\n';
  } else {
    out << "policy: " << p.description << '\n'
        << "graph: " << g.node_count() << " nodes, " << g.edge_count() << " edges\n"
        << "pairs: " << results.size() << '\n';
    if (all_exact) {
      out << "mean: " << fixed(mean_up, 3) << '\n' << "stddev: " << fixed(sd_up, 3) << '\n';
    } else {
      out << "mean: [" << fixed(mean_lo, 3) << ", " << fixed(mean_up, 3) << "]\n"
          << "stddev: [" << fixed(sd_lo, 3) << ", " << fixed(sd_up, 3) << "]\n";
    }
  }
  return kExitOk;
}

/// Diversity between the exclusive customer cones of two peers, before and
/// after their peering is removed.
inline int cmd_experiment_depeering(const CommonOptions& o, const ExperimentOptions& e, const std::string& policy_name,
                                    std::ostream& out) {
  PolicyOptions po = experiment_policy(o.policy, policy_name);
  check_single_policy(po);
  if (e.depeer.size() != 1) throw UsageError("experiment depeering needs exactly one --depeer ASN1:ASN2");
  auto [a, b] = parse_as_pair(e.depeer.front());
  LabeledDigraph before = load_topology(e);
  LabeledDigraph after = ingest::depeer(before, a, b);
  LoadedPolicy p = load_policy(po, before.alphabet());

  auto cone_a = ingest::exclusive_customer_cone(before, a, {b}, e.cone_depth);
  auto cone_b = ingest::exclusive_customer_cone(before, b, {a}, e.cone_depth);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& x : cone_a) {
    for (const auto& y : cone_b) pairs.emplace_back(x, y);
  }
  if (pairs.size() > e.pairs) {
    std::mt19937_64 rng(o.seed);
    std::vector<std::pair<std::string, std::string>> chosen;
    std::sample(pairs.begin(), pairs.end(), std::back_inserter(chosen), e.pairs, rng);
    pairs = std::move(chosen);
  }
  auto before_r = evaluate_pairs(before, p.nfa, pairs, o.jobs);
  auto after_r = evaluate_pairs(after, p.nfa, pairs, o.jobs);

  std::vector<double> lo_before, up_before, lo_after, up_after;
  std::size_t disconnected = 0;
  bool all_exact = true;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    lo_before.push_back(before_r[i].lower.convert_to<double>());
    up_before.push_back(before_r[i].upper.convert_to<double>());
    lo_after.push_back(after_r[i].lower.convert_to<double>());
    up_after.push_back(after_r[i].upper.convert_to<double>());
    if (after_r[i].upper == 0 && before_r[i].upper > 0) ++disconnected;
    all_exact = all_exact && before_r[i].exact && after_r[i].exact;
  }
  auto [m_lb, s_lb] = mean_stddev(lo_before);
  auto [m_ub, s_ub] = mean_stddev(up_before);
  auto [m_la, s_la] = mean_stddev(lo_after);
  auto [m_ua, s_ua] = mean_stddev(up_after);

  if (o.format == "json") {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "experiment depeering";
    j["policy"] = policy_json(p);
    j["depeer"] = Json::array({a, b});
    j["cone_depth"] = e.cone_depth;
    j["cone_sizes"] = Json::array({cone_a.size(), cone_b.size()});
    j["seed"] = o.seed;
    j["exact"] = all_exact;
    Json rows = Json::array();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      rows.push_back(Json{{"source", pairs[i].first},
                          {"sink", pairs[i].second},
                          {"before", pair_json(before_r[i])},
                          {"after", pair_json(after_r[i])}});
    }
    j["pairs"] = rows;
    j["summary"] = Json{{"mean_lower_before", m_lb}, {"stddev_lower_before", s_lb},
                        {"mean_upper_before", m_ub}, {"stddev_upper_before", s_ub},
                        {"mean_lower_after", m_la},  {"stddev_lower_after", s_la},
                        {"mean_upper_after", m_ua},  {"stddev_upper_after", s_ua},
                        {"disconnected", disconnected}};
    emit_json(out, j);
  } else if (o.format == "csv") {
    out << "pair,source,sink,lower_before,upper_before,lower_after,upper_after,exact\n";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      out << i + 1 << ',' << pairs[i].first << ',' << pairs[i].second << ',' << format_rational(before_r[i].lower)
          << ',' << format_rational(before_r[i].upper) << ',' << format_rational(after_r[i].lower) << ','
          << format_rational(after_r[i].upper) << ',' << (before_r[i].exact && after_r[i].exact ? "true" : "false")
          << '\n';
    }
    out << "mean,,," << fixed(m_lb) << ',' << fixed(m_ub) << ',' << fixed(m_la) << ',' << fixed(m_ua) << ','
        << (all_exact ? "true" : "false") << '\n';
    out << "stddev,,," << fixed(s_lb) << ',' << fixed(s_ub) << ',' << fixed(s_la) << ',' << fixed(s_ua) << ','
        << (all_exact ? "true" : "false") << '\n';
  } else {
    out << "depeering " << a << " and " << b << '\n'
        << "exclusive cones (depth " << e.cone_depth << "): " << cone_a.size() << " x " << cone_b.size() << '\n'
        << "pairs: " << pairs.size() << '\n'
        << "mean before: " << fixed(m_ub, 3) << '\n'
        << "mean after: " << fixed(m_ua, 3) << '\n'
        << "disconnected by depeering: " << disconnected << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline void error_record(std::ostream& err, std::string_view code, const std::string& message) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["error"] = Json{{"code", code}, {"message", message}};
  err << j.dump() << '\n';
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Policy-compliant path diversity and bisection bandwidth", "polcut"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  CommonOptions common;
  OracleOptions oracle_opts;
  ExperimentOptions exp;
  std::string out_file;
  std::string policy_name;

  auto add_policy = [&](CLI::App* sub) {
    sub->add_option("--policy-regex", common.policy.regex, "Policy as a regular expression over edge labels");
    sub->add_option("--policy-nfa", common.policy.nfa_file, "Policy automaton file");
    sub->add_option("--preset", common.policy.preset, "Named policy: valley-free, multiple-peering-links, any");
  };
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"text", "json", "csv"}));
  };
  auto add_query = [&](CLI::App* sub) {
    sub->add_option("--graph", common.graph_file, "Graph file (src|dst|label|capacity)")->required();
    add_policy(sub);
    sub->add_option("--source", common.source, "Source node")->required();
    sub->add_option("--sink", common.sink, "Sink node")->required();
    sub->add_flag("--unit-capacities", common.unit_capacities, "Treat every edge as capacity 1");
    add_format(sub);
    sub->add_option("--seed", common.seed, "Random seed (accepted for uniformity)");
    sub->add_option("--jobs", common.jobs, "Worker threads (accepted for uniformity)");
  };

  auto* transform = app.add_subcommand("transform", "Write the transformed graph and its provenance");
  add_query(transform);
  transform->add_option("--out", out_file, "Output file; provenance goes to <out>.prov");
  transform->add_flag("--no-prune", common.no_prune, "Keep nodes off every source-sink route");

  std::vector<CLI::App*> cut_commands;
  for (const char* name : {"mincut", "diversity", "paths"}) {
    std::string help = std::string(name) == "mincut"      ? "Lower and upper policy-compliant min-cut"
                       : std::string(name) == "diversity" ? "Min-cut with unit capacities (edge-disjoint paths)"
                                                          : "Paths realizing the upper-bound flow";
    auto* sub = app.add_subcommand(name, help);
    add_query(sub);
    sub->add_flag("--no-prune", common.no_prune, "Skip pruning of the transformed graph");
    cut_commands.push_back(sub);
  }

  auto* check = app.add_subcommand("check-exact", "Per-symbol block structure and exactness verdict");
  add_policy(check);
  check->add_option("--graph", common.graph_file, "Optional graph whose labels join the alphabet");
  add_format(check);

  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force path enumeration for small graphs");
  add_query(oracle_cmd);
  oracle_cmd->add_option("--max-len", oracle_opts.max_len, "Longest path in edges (default |E|)");
  oracle_cmd->add_flag("--node-simple", oracle_opts.node_simple, "Forbid repeated nodes, not only repeated edges");
  oracle_cmd->add_option("--max-paths", oracle_opts.max_paths, "Packing limit on distinct paths");
  oracle_cmd->add_option("--max-states", oracle_opts.max_states, "Search-state limit for enumeration");

  auto* experiment = app.add_subcommand("experiment", "Batch experiments on AS relationship data");
  experiment->require_subcommand(1);
  auto add_experiment = [&](CLI::App* sub) {
    sub->add_option("--as-rel", exp.as_rel, "AS relationship file (a|b|rel)")->required();
    add_policy(sub);
    sub->add_option("--policy", policy_name, "Preset name (same as --preset)");
    sub->add_option("--pairs", exp.pairs, "Number of AS pairs");
    sub->add_option("--seed", common.seed, "Random seed");
    sub->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--augment", exp.augment, "IXP member CSV (asn,policy) used to add peering links");
    sub->add_option("--class", exp.peering_class, "Peering class added by --augment")
        ->check(CLI::IsMember({"open", "selective", "restrictive"}));
    sub->add_option("--depeer", exp.depeer, "Remove the peering ASN1:ASN2 (repeatable)");
    add_format(sub);
  };
  auto* exp_div = experiment->add_subcommand("diversity", "Diversity between weighted random AS pairs");
  add_experiment(exp_div);
  exp_div->add_option("--weights", exp.weights, "Weight CSV (asn,address_count); uniform if absent");
  auto* exp_dep = experiment->add_subcommand("depeering", "Cone-to-cone diversity before and after a depeering");
  add_experiment(exp_dep);
  exp_dep->add_option("--cone-depth", exp.cone_depth, "Customer cone depth in p2c edges");

  std::vector<const char*> argv{"polcut"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (transform->parsed()) return cmd_transform(common, out_file, out);
    for (auto* sub : cut_commands) {
      if (sub->parsed()) return cmd_cut(sub->get_name(), common, out);
    }
    if (check->parsed()) return cmd_check_exact(common, out);
    if (oracle_cmd->parsed()) return cmd_oracle(common, oracle_opts, out);
    if (exp_div->parsed()) return cmd_experiment_diversity(common, exp, policy_name, out);
    if (exp_dep->parsed()) return cmd_experiment_depeering(common, exp, policy_name, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    error_record(err, to_string(e.code()), e.what());
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace polcut::cli
