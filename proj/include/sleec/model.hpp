#pragma once

// Normalized rule syntax, traces and capability relations.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sleec {

using Value = std::int64_t;
using Seconds = std::int64_t;

/// Error raised by evaluation (unbound measures, malformed traces, bad indices).
class EvalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class MeasureSort { boolean, numeric };

struct Signature {
  std::set<std::string> events;
  std::map<std::string, MeasureSort> measures;
  std::map<std::string, Value> constants;

  bool has_event(const std::string& name) const { return events.count(name) != 0; }
  bool has_measure(const std::string& name) const { return measures.count(name) != 0; }
  bool is_boolean(const std::string& name) const {
    auto it = measures.find(name);
    return it != measures.end() && it->second == MeasureSort::boolean;
  }
  bool empty() const { return events.empty() && measures.empty(); }

  void add_event(const std::string& name) {
    if (measures.count(name) || constants.count(name)) throw EvalError("symbol '" + name + "' already declared");
    events.insert(name);
  }
  void add_measure(const std::string& name, MeasureSort sort) {
    if (events.count(name) || constants.count(name)) throw EvalError("symbol '" + name + "' already declared");
    measures[name] = sort;
  }

  bool operator==(const Signature&) const = default;
};

struct Term {
  enum class Kind { constant, measure, negate, sum, scale };

  Kind kind = Kind::constant;
  Value value = 0;              // constant value, or multiplier for scale
  std::string measure;          // measure name for Kind::measure
  std::vector<Term> operands;   // negate: 1, sum: 2, scale: 1

  static Term constant(Value v) { return Term{Kind::constant, v, {}, {}}; }
  static Term measure_ref(std::string name) { return Term{Kind::measure, 0, std::move(name), {}}; }
  static Term negate(Term t) { return Term{Kind::negate, 0, {}, {std::move(t)}}; }
  static Term sum(Term a, Term b) { return Term{Kind::sum, 0, {}, {std::move(a), std::move(b)}}; }
  static Term scale(Value factor, Term t) { return Term{Kind::scale, factor, {}, {std::move(t)}}; }

  bool is_constant() const { return kind == Kind::constant; }

  bool operator==(const Term&) const = default;
};

struct Proposition {
  enum class Kind { truth, falsity, equal, greater_equal, negation, conjunction, disjunction };

  Kind kind = Kind::truth;
  std::vector<Term> terms;              // equal / greater_equal: 2
  std::vector<Proposition> operands;    // negation: 1, conjunction/disjunction: >= 2

  static Proposition truth() { return Proposition{Kind::truth, {}, {}}; }
  static Proposition falsity() { return Proposition{Kind::falsity, {}, {}}; }
  static Proposition equal(Term a, Term b) { return Proposition{Kind::equal, {std::move(a), std::move(b)}, {}}; }
  static Proposition greater_equal(Term a, Term b) {
    return Proposition{Kind::greater_equal, {std::move(a), std::move(b)}, {}};
  }
  /// Boolean measure read as a proposition: `m` is sugar for `m = 1`.
  static Proposition holds(std::string measure) { return equal(Term::measure_ref(std::move(measure)), Term::constant(1)); }
  static Proposition negation(Proposition p) { return Proposition{Kind::negation, {}, {std::move(p)}}; }

  /// Builds a flattened conjunction; `true` conjuncts are dropped.
  static Proposition conjunction(std::vector<Proposition> parts) { return junction(Kind::conjunction, std::move(parts)); }
  static Proposition disjunction(std::vector<Proposition> parts) { return junction(Kind::disjunction, std::move(parts)); }

  bool is_truth() const { return kind == Kind::truth; }

  bool operator==(const Proposition&) const = default;

private:
  static Proposition junction(Kind k, std::vector<Proposition> parts) {
    const Kind unit = k == Kind::conjunction ? Kind::truth : Kind::falsity;
    std::vector<Proposition> flat;
    for (auto& p : parts) {
      if (p.kind == unit) continue;
      if (p.kind == k) {
        for (auto& q : p.operands) flat.push_back(std::move(q));
      } else {
        flat.push_back(std::move(p));
      }
    }
    if (flat.empty()) return Proposition{unit, {}, {}};
    if (flat.size() == 1) return std::move(flat.front());
    return Proposition{k, {}, std::move(flat)};
  }
};

enum class Polarity { positive, negative };

struct Obligation {
  Polarity polarity = Polarity::positive;
  std::string event;
  Term deadline = Term::constant(0);

  bool operator==(const Obligation&) const = default;
};

struct CondObligation {
  Proposition guard = Proposition::truth();
  Obligation obligation;

  bool operator==(const CondObligation&) const = default;
};

struct ObligationChain {
  std::vector<CondObligation> items;

  bool empty() const { return items.empty(); }
  std::size_t size() const { return items.size(); }

  /// Every item except possibly the last must be a positive obligation.
  bool well_formed() const {
    if (items.empty()) return false;
    for (std::size_t i = 0; i + 1 < items.size(); ++i)
      if (items[i].obligation.polarity != Polarity::positive) return false;
    return true;
  }

  bool operator==(const ObligationChain&) const = default;
};

/// Half-open byte range into a source document.
struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const SourceSpan&) const = default;
};

struct NormRule {
  std::string id;
  std::string trigger_event;
  Proposition trigger_cond = Proposition::truth();
  ObligationChain chain;
  SourceSpan span;

  /// Structural equality, ignoring the source span.
  bool same_as(const NormRule& o) const {
    return id == o.id && trigger_event == o.trigger_event && trigger_cond == o.trigger_cond && chain == o.chain;
  }
};

enum class FactMode { asserted, negated };
enum class FactRole { concern, purpose, rule_negation };

/// `exists e and p [while OC | while not (OC)]`. An empty chain asserts only the occurrence.
struct Fact {
  std::string id;
  std::string trigger_event;
  Proposition trigger_cond = Proposition::truth();
  ObligationChain chain;
  FactMode mode = FactMode::asserted;
  FactRole role = FactRole::concern;
  SourceSpan span;
};

struct State {
  std::set<std::string> events;
  std::map<std::string, Value> valuation;
  Seconds time = 0;

  bool has(const std::string& e) const { return events.count(e) != 0; }
  bool operator==(const State&) const = default;
};

/// Finite timed state sequence with strictly increasing timestamps.
class Trace {
public:
  Trace() = default;
  explicit Trace(std::vector<State> states) : states_(std::move(states)) {
    for (std::size_t i = 1; i < states_.size(); ++i)
      if (states_[i].time <= states_[i - 1].time)
        throw EvalError("trace timestamps must be strictly increasing (state " + std::to_string(i + 1) + ")");
    for (const auto& s : states_)
      if (s.time < 0) throw EvalError("trace timestamps must be natural numbers");
  }

  /// Validates that every valuation is total over the signature and boolean measures stay in {0,1}.
  void check_against(const Signature& sig) const {
    for (std::size_t i = 0; i < states_.size(); ++i) {
      for (const auto& [m, sort] : sig.measures) {
        auto it = states_[i].valuation.find(m);
        if (it == states_[i].valuation.end())
          throw EvalError("state " + std::to_string(i + 1) + " has no value for measure '" + m + "'");
        if (it->second < 0) throw EvalError("measure '" + m + "' must be a natural number");
        if (sort == MeasureSort::boolean && it->second > 1)
          throw EvalError("boolean measure '" + m + "' valued outside {0,1}");
      }
      for (const auto& e : states_[i].events)
        if (!sig.has_event(e)) throw EvalError("undeclared event '" + e + "' in trace");
    }
  }

  const std::vector<State>& states() const { return states_; }
  const State& operator[](std::size_t i) const { return states_[i]; }
  std::size_t size() const { return states_.size(); }
  bool empty() const { return states_.empty(); }

  bool operator==(const Trace&) const = default;

private:
  std::vector<State> states_;
};

enum class RelationKind {
  // event / event
  hypernym,
  contradictory,
  happens_before,
  event_equal,
  // measure proposition / measure proposition
  imply,
  mutually_exclusive,
  opposite,
  measure_equal,
  // event / measure
  forbids,
  induces,
  when_then_until,
  when_then_for,
};

enum class Sign { positive, negative };
enum class Provenance { inferred, llm, stakeholder };

inline int provenance_rank(Provenance p) { return static_cast<int>(p); }

inline bool is_event_kind(RelationKind k) { return k <= RelationKind::event_equal; }
inline bool is_measure_kind(RelationKind k) {
  return k >= RelationKind::imply && k <= RelationKind::measure_equal;
}
inline bool is_mixed_kind(RelationKind k) { return k >= RelationKind::forbids; }
inline bool is_symmetric_kind(RelationKind k) {
  return k == RelationKind::contradictory || k == RelationKind::event_equal ||
         k == RelationKind::mutually_exclusive || k == RelationKind::opposite || k == RelationKind::measure_equal;
}

/// Signed binary capability relation. Operand use depends on the kind:
///   event/event:   event_a, event_b
///   measure:       prop_a, prop_b
///   forbids:       prop_a (condition), event_a (forbidden event)
///   induces:       event_a, prop_a
///   until:         event_a, prop_a, event_b
///   for:           event_a, prop_a, duration
struct Relation {
  RelationKind kind = RelationKind::hypernym;
  Sign sign = Sign::positive;
  Provenance provenance = Provenance::llm;
  std::string event_a;
  std::string event_b;
  Proposition prop_a = Proposition::truth();
  Proposition prop_b = Proposition::truth();
  Term duration = Term::constant(0);
  std::optional<SourceSpan> span;

  bool positive() const { return sign == Sign::positive; }

  Relation negated() const {
    Relation r = *this;
    r.sign = positive() ? Sign::negative : Sign::positive;
    return r;
  }

  static Relation events(RelationKind k, std::string a, std::string b, Sign s = Sign::positive,
                         Provenance p = Provenance::llm) {
    Relation r;
    r.kind = k;
    r.sign = s;
    r.provenance = p;
    r.event_a = std::move(a);
    r.event_b = std::move(b);
    return r;
  }
  static Relation measures(RelationKind k, Proposition a, Proposition b, Sign s = Sign::positive,
                           Provenance p = Provenance::llm) {
    Relation r;
    r.kind = k;
    r.sign = s;
    r.provenance = p;
    r.prop_a = std::move(a);
    r.prop_b = std::move(b);
    return r;
  }
};

}  // namespace sleec
