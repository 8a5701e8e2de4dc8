#pragma once

// File formats: demo and plan files are JSON lines (one DemoRecord per line,
// schema-versioned); models and configs are single JSON documents.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "meip/concept_parser.hpp"
#include "meip/learn.hpp"
#include "meip/maxent_irl.hpp"
#include "meip/pursuit.hpp"

namespace meip {

using json = nlohmann::json;

inline constexpr int kDemoSchemaVersion = 1;
inline constexpr int kModelSchemaVersion = 1;

/// One plan with everything needed to replay or learn from it.
struct DemoRecord {
  std::string problem_id;
  json environment = json::object();  // descriptor, see make_environment
  Plan plan;
  bool operator==(const DemoRecord&) const = default;
};

namespace detail {

inline const char* source_name(PlanSource s) { return s == PlanSource::kDemonstration ? "demonstration" : "sampled"; }

inline PlanSource parse_source(const std::string& s) {
  if (s == "demonstration") return PlanSource::kDemonstration;
  if (s == "sampled") return PlanSource::kSampled;
  throw FormatError("unknown plan source '" + s + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

/// Rejects keys outside `allowed` so config typos fail loudly.
inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

}  // namespace detail

inline json schema_to_json(const Schema& s) {
  json out = json::array();
  for (const auto& f : s.fluents()) {
    out.push_back({{"name", f.name},
                   {"kind", f.kind == FluentKind::kPredicate ? "predicate" : "function"},
                   {"domain", f.domain == ValueDomain::kBoolean ? "boolean"
                              : f.domain == ValueDomain::kReal  ? "real"
                                                                : "integer"},
                   {"args", f.arg_classes}});
  }
  return out;
}

inline Schema schema_from_json(const json& j) {
  Schema s;
  for (const auto& f : j) {
    Fluent fl;
    fl.name = f.at("name").get<std::string>();
    const auto kind = f.at("kind").get<std::string>();
    if (kind != "predicate" && kind != "function") throw FormatError("unknown fluent kind '" + kind + "'");
    fl.kind = kind == "predicate" ? FluentKind::kPredicate : FluentKind::kFunction;
    const auto dom = f.at("domain").get<std::string>();
    if (dom == "boolean") fl.domain = ValueDomain::kBoolean;
    else if (dom == "real") fl.domain = ValueDomain::kReal;
    else if (dom == "integer") fl.domain = ValueDomain::kInteger;
    else throw FormatError("unknown value domain '" + dom + "'");
    fl.arg_classes = f.at("args").get<std::vector<std::string>>();
    s.add(std::move(fl));
  }
  return s;
}

inline json state_values_to_json(const State& s) {
  json vals = json::object();
  for (const auto& [name, rows] : s.table()) {
    json r = json::array();
    for (const auto& [args, v] : rows) r.push_back({args, v});
    vals[name] = std::move(r);
  }
  return vals;
}

inline json demo_to_json(const DemoRecord& d) {
  if (d.plan.states.empty()) throw Error("cannot write an empty plan");
  auto entities_json = [](const State& s) {
    json ents = json::array();
    for (const auto& e : s.entities()) ents.push_back({e.id, e.cls});
    return ents;
  };
  const State& first = d.plan.states.front();
  json ents = entities_json(first);
  json states = json::array();
  for (const auto& s : d.plan.states) {
    json sj = {{"t", s.time_index()}, {"values", state_values_to_json(s)}};
    if (s.entities() != first.entities()) sj["entities"] = entities_json(s);  // worlds whose objects change
    states.push_back(std::move(sj));
  }
  return {{"schema_version", kDemoSchemaVersion},
          {"problem_id", d.problem_id},
          {"environment", d.environment},
          {"source", detail::source_name(d.plan.source)},
          {"entities", ents},
          {"states", states},
          {"actions", d.plan.actions}};
}

inline DemoRecord demo_from_json(const json& j) {
  const int version = j.at("schema_version").get<int>();
  if (version != kDemoSchemaVersion)
    throw FormatError("unsupported demo schema version " + std::to_string(version));
  DemoRecord d;
  d.problem_id = j.at("problem_id").get<std::string>();
  d.environment = detail::get_or(j, "environment", json::object());
  d.plan.source = detail::parse_source(detail::get_or<std::string>(j, "source", "demonstration"));
  auto entities_of = [](const json& arr) {
    std::vector<Entity> ents;
    for (const auto& e : arr) ents.push_back({e.at(0).get<std::string>(), e.at(1).get<std::string>()});
    return make_entities(std::move(ents));
  };
  auto shared = entities_of(j.at("entities"));
  for (const auto& sj : j.at("states")) {
    State s(d.problem_id, sj.contains("entities") ? entities_of(sj.at("entities")) : shared);
    s.set_time_index(sj.at("t").get<std::size_t>());
    for (const auto& [name, rows] : sj.at("values").items())
      for (const auto& row : rows) {
        double v = row.at(1).get<double>();
        if (v == 0.0) throw FormatError("zero-valued grounding of '" + name + "' (closed world: omit it)");
        s.set(name, row.at(0).get<Args>(), v);
      }
    d.plan.states.push_back(std::move(s));
  }
  d.plan.actions = detail::get_or(j, "actions", std::vector<std::string>{});
  d.plan.validate();
  return d;
}

inline std::string write_demo_line(const DemoRecord& d) { return demo_to_json(d).dump(); }

inline void write_demos(std::ostream& os, const std::vector<DemoRecord>& demos) {
  for (const auto& d : demos) os << write_demo_line(d) << '\n';
}

inline void write_demos(const std::string& path, const std::vector<DemoRecord>& demos) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  write_demos(f, demos);
}

inline void append_demo(const std::string& path, const DemoRecord& d) {
  std::ofstream f(path, std::ios::binary | std::ios::app);
  if (!f) throw Error("cannot open '" + path + "' for appending");
  f << write_demo_line(d) << '\n';
}

inline std::vector<DemoRecord> read_demos(std::istream& is, const std::string& where = "<stream>") {
  std::vector<DemoRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(demo_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError(where + ":" + std::to_string(n) + ": " + e.what());
    } catch (const Error& e) {
      throw FormatError(where + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<DemoRecord> read_demos(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open demo file '" + path + "'");
  return read_demos(f, path);
}

inline std::vector<Plan> plans_of(const std::vector<DemoRecord>& demos) {
  std::vector<Plan> out;
  for (const auto& d : demos) out.push_back(d.plan);
  return out;
}

inline json model_to_json(const RankingModel& m) {
  json cs = json::array();
  for (std::size_t i = 0; i < m.concepts().size(); ++i)
    cs.push_back({{"concept", print(m.concepts()[i])}, {"knots", m.bins()[i].knots}, {"weights", m.bins()[i].weights}});
  return {{"schema_version", kModelSchemaVersion}, {"schema", schema_to_json(m.schema())}, {"concepts", cs}};
}

inline RankingModel model_from_json(const json& j) {
  const int version = j.at("schema_version").get<int>();
  if (version != kModelSchemaVersion)
    throw FormatError("unsupported model schema version " + std::to_string(version));
  Schema schema = schema_from_json(j.at("schema"));
  std::vector<Concept> cs;
  std::vector<ConceptBins> bins;
  for (const auto& c : j.at("concepts")) {
    cs.push_back(parse_concept(c.at("concept").get<std::string>(), schema));
    bins.push_back({c.at("knots").get<std::vector<double>>(), c.at("weights").get<std::vector<double>>()});
  }
  return RankingModel(std::move(schema), std::move(cs), std::move(bins));
}

inline json read_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "'");
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << j.dump(2) << '\n';
}

// ---- configuration ---------------------------------------------------------

inline void from_json(const json& j, LearnerConfig& c) {
  detail::check_keys(j, {"C", "max_iterations", "tolerance", "samples", "loss", "seed", "solver_iterations",
                         "accumulate_samples", "balance_pairs", "average_iterates"},
                     "learner config");
  c.C = detail::get_or(j, "C", c.C);
  c.max_iterations = detail::get_or(j, "max_iterations", c.max_iterations);
  c.tolerance = detail::get_or(j, "tolerance", c.tolerance);
  c.samples = detail::get_or(j, "samples", c.samples);
  c.seed = detail::get_or(j, "seed", c.seed);
  c.solver_iterations = detail::get_or(j, "solver_iterations", c.solver_iterations);
  c.accumulate_samples = detail::get_or(j, "accumulate_samples", c.accumulate_samples);
  c.balance_pairs = detail::get_or(j, "balance_pairs", c.balance_pairs);
  c.average_iterates = detail::get_or(j, "average_iterates", c.average_iterates);
  if (j.contains("loss")) {
    const auto l = j["loss"].get<std::string>();
    if (l == "svm") c.loss = LossKind::kHingeSvm;
    else if (l == "tanh") c.loss = LossKind::kTanhDiscriminator;
    else throw ConfigError("unknown loss '" + l + "' (svm or tanh)");
  }
  c.validate();
}

inline void to_json(json& j, const LearnerConfig& c) {
  j = {{"C", c.C},
       {"max_iterations", c.max_iterations},
       {"tolerance", c.tolerance},
       {"samples", c.samples},
       {"loss", c.loss == LossKind::kHingeSvm ? "svm" : "tanh"},
       {"seed", c.seed},
       {"solver_iterations", c.solver_iterations},
       {"accumulate_samples", c.accumulate_samples},
       {"balance_pairs", c.balance_pairs},
       {"average_iterates", c.average_iterates}};
}

inline void from_json(const json& j, PlannerConfig& c) {
  detail::check_keys(j, {"iterations", "exploration", "inverse_temperature", "samples", "seed"}, "planner config");
  c.iterations = detail::get_or(j, "iterations", c.iterations);
  c.exploration = detail::get_or(j, "exploration", c.exploration);
  c.inverse_temperature = detail::get_or(j, "inverse_temperature", c.inverse_temperature);
  c.samples = detail::get_or(j, "samples", c.samples);
  c.seed = detail::get_or(j, "seed", c.seed);
  c.validate();
}

inline void to_json(json& j, const PlannerConfig& c) {
  j = {{"iterations", c.iterations},
       {"exploration", c.exploration},
       {"inverse_temperature", c.inverse_temperature},
       {"samples", c.samples},
       {"seed", c.seed}};
}

inline void from_json(const json& j, EnumerationOptions& o) {
  detail::check_keys(j, {"filters", "cap", "restricted_domains", "fluents", "negations"}, "enumeration options");
  o.filters = detail::get_or(j, "filters", o.filters);
  o.cap = detail::get_or(j, "cap", o.cap);
  o.restricted_domains = detail::get_or(j, "restricted_domains", o.restricted_domains);
  o.fluents = detail::get_or(j, "fluents", o.fluents);
  o.negations = detail::get_or(j, "negations", o.negations);
}

inline void to_json(json& j, const EnumerationOptions& o) {
  j = {{"filters", o.filters},
       {"cap", o.cap},
       {"restricted_domains", o.restricted_domains},
       {"fluents", o.fluents},
       {"negations", o.negations}};
}

inline void from_json(const json& j, PursuitConfig& c) {
  detail::check_keys(j, {"epsilon", "max_level", "beta", "candidate_cap", "seeds", "margin_samples",
                         "require_consistent", "reference", "enumeration", "seed"},
                     "pursuit config");
  c.epsilon = detail::get_or(j, "epsilon", c.epsilon);
  c.max_level = detail::get_or(j, "max_level", c.max_level);
  c.beta = detail::get_or(j, "beta", c.beta);
  c.candidate_cap = detail::get_or(j, "candidate_cap", c.candidate_cap);
  c.seeds = detail::get_or(j, "seeds", c.seeds);
  c.margin_samples = detail::get_or(j, "margin_samples", c.margin_samples);
  c.require_consistent = detail::get_or(j, "require_consistent", c.require_consistent);
  c.seed = detail::get_or(j, "seed", c.seed);
  if (j.contains("reference")) {
    const auto r = j["reference"].get<std::string>();
    if (r == "current") c.reference = MarginReference::kCurrentSamples;
    else if (r == "own") c.reference = MarginReference::kOwnSamples;
    else throw ConfigError("unknown margin reference '" + r + "' (current or own)");
  }
  if (j.contains("enumeration")) c.enumeration = j["enumeration"].get<EnumerationOptions>();
  c.validate();
}

inline void to_json(json& j, const PursuitConfig& c) {
  j = {{"epsilon", c.epsilon},
       {"max_level", c.max_level},
       {"beta", c.beta},
       {"candidate_cap", c.candidate_cap},
       {"seeds", c.seeds},
       {"margin_samples", c.margin_samples},
       {"require_consistent", c.require_consistent},
       {"reference", c.reference == MarginReference::kCurrentSamples ? "current" : "own"},
       {"enumeration", c.enumeration},
       {"seed", c.seed}};
}

inline void from_json(const json& j, MaxEntConfig& c) {
  detail::check_keys(j, {"l2", "max_iterations", "tolerance", "initial_step", "node_cap"}, "maxent config");
  c.l2 = detail::get_or(j, "l2", c.l2);
  c.max_iterations = detail::get_or(j, "max_iterations", c.max_iterations);
  c.tolerance = detail::get_or(j, "tolerance", c.tolerance);
  c.initial_step = detail::get_or(j, "initial_step", c.initial_step);
  c.node_cap = detail::get_or(j, "node_cap", c.node_cap);
  c.validate();
}

inline void to_json(json& j, const MaxEntConfig& c) {
  j = {{"l2", c.l2},
       {"max_iterations", c.max_iterations},
       {"tolerance", c.tolerance},
       {"initial_step", c.initial_step},
       {"node_cap", c.node_cap}};
}

/// 64-bit FNV-1a of the canonical dump, as 16 hex digits.
inline std::string config_hash(const json& j) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace meip
