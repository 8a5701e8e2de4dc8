#pragma once

#include <algorithm>
#include <any>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "meip/error.hpp"

namespace meip {

enum class FluentKind { kPredicate, kFunction };
enum class ValueDomain { kBoolean, kReal, kInteger };

/// A time-varying relation or function over typed entities.
struct Fluent {
  std::string name;
  FluentKind kind = FluentKind::kPredicate;
  ValueDomain domain = ValueDomain::kBoolean;
  std::vector<std::string> arg_classes;  // one entity class per argument

  std::size_t arity() const { return arg_classes.size(); }
  bool operator==(const Fluent&) const = default;
};

/// The fluent vocabulary shared by every problem of a domain.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Fluent> fluents) {
    for (auto& f : fluents) add(std::move(f));
  }

  void add(Fluent f) {
    if (f.arg_classes.empty()) throw SchemaError("fluent '" + f.name + "' must have arity >= 1");
    if (find(f.name)) throw SchemaError("duplicate fluent '" + f.name + "'");
    fluents_.push_back(std::move(f));
  }

  const Fluent* find(const std::string& name) const {
    auto it = std::find_if(fluents_.begin(), fluents_.end(),
                           [&](const Fluent& f) { return f.name == name; });
    return it == fluents_.end() ? nullptr : &*it;
  }

  const Fluent& at(const std::string& name) const {
    if (const Fluent* f = find(name)) return *f;
    throw SchemaError("unknown fluent '" + name + "'");
  }

  const std::vector<Fluent>& fluents() const { return fluents_; }
  bool operator==(const Schema&) const = default;

 private:
  std::vector<Fluent> fluents_;
};

struct Entity {
  std::string id;
  std::string cls;
  bool operator==(const Entity&) const = default;
};

using Args = std::vector<std::string>;

/// Grounded fluent values of one time step. Groundings that are absent read as 0
/// (closed world), so states only need to list the atoms that hold.
class State {
 public:
  using Table = std::map<std::string, std::map<Args, double>>;

  State() : entities_(std::make_shared<const std::vector<Entity>>()) {}
  State(std::string problem_id, std::shared_ptr<const std::vector<Entity>> entities)
      : problem_id_(std::move(problem_id)), entities_(std::move(entities)) {}

  const std::string& problem_id() const { return problem_id_; }
  void set_problem_id(std::string id) { problem_id_ = std::move(id); }
  std::size_t time_index() const { return time_index_; }
  void set_time_index(std::size_t t) { time_index_ = t; }

  const std::vector<Entity>& entities() const { return *entities_; }
  const std::shared_ptr<const std::vector<Entity>>& entity_ptr() const { return entities_; }

  double value(const std::string& fluent, const Args& args) const {
    auto f = values_.find(fluent);
    if (f == values_.end()) return 0.0;
    auto v = f->second.find(args);
    return v == f->second.end() ? 0.0 : v->second;
  }

  /// Zero erases the grounding, so equal closed-world states compare equal.
  void set(const std::string& fluent, Args args, double v) {
    if (v != 0.0) {
      values_[fluent][std::move(args)] = v;
      return;
    }
    auto f = values_.find(fluent);
    if (f == values_.end()) return;
    f->second.erase(args);
    if (f->second.empty()) values_.erase(f);
  }
  const Table& table() const { return values_; }

  /// Environment-private data carried with the state (e.g. scene geometry).
  /// Not a fluent: ignored by key(), equality and serialization.
  void set_payload(std::shared_ptr<const std::any> p) { payload_ = std::move(p); }
  template <class T>
  const T* payload() const {
    return payload_ ? std::any_cast<T>(payload_.get()) : nullptr;
  }

  /// Canonical text of the fluent table and entity set; equal keys mean equal
  /// states up to time index.
  std::string key() const {
    std::ostringstream os;
    os.precision(17);
    for (const auto& e : *entities_) os << e.id << ':' << e.cls << ';';
    os << '|';
    for (const auto& [name, rows] : values_) {
      for (const auto& [args, v] : rows) {
        if (v == 0.0) continue;
        os << name << '(';
        for (const auto& a : args) os << a << ',';
        os << ")=" << v << ';';
      }
    }
    return os.str();
  }

  bool operator==(const State& o) const {
    return problem_id_ == o.problem_id_ && time_index_ == o.time_index_ &&
           *entities_ == *o.entities_ && values_ == o.values_;
  }

 private:
  std::string problem_id_;
  std::size_t time_index_ = 0;
  std::shared_ptr<const std::vector<Entity>> entities_;
  Table values_;
  std::shared_ptr<const std::any> payload_;
};

enum class PlanSource { kDemonstration, kSampled };

/// A temporally ordered state sequence of one problem instance. `actions[i]`
/// produced `states[i + 1]`; action labels are kept for replay only.
struct Plan {
  std::vector<State> states;
  std::vector<std::string> actions;
  PlanSource source = PlanSource::kDemonstration;

  std::size_t horizon() const { return states.size(); }
  const std::string& problem_id() const {
    if (states.empty()) throw Error("empty plan has no problem id");
    return states.front().problem_id();
  }

  /// Checks consecutive time indices and a shared problem id.
  void validate() const {
    if (states.empty()) throw Error("plan must contain at least one state");
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (states[i].time_index() != i)
        throw Error("plan time indices must be 0..h-1, found " +
                    std::to_string(states[i].time_index()) + " at position " + std::to_string(i));
      if (states[i].problem_id() != states.front().problem_id())
        throw Error("plan mixes problem ids");
    }
    if (!actions.empty() && actions.size() + 1 != states.size())
      throw Error("plan action count must be horizon - 1");
  }

  bool operator==(const Plan&) const = default;
};

inline std::shared_ptr<const std::vector<Entity>> make_entities(std::vector<Entity> es) {
  return std::make_shared<const std::vector<Entity>>(std::move(es));
}

}  // namespace meip
