#pragma once

// Bounded satisfiability over finite timed traces: rules, relations and facts are decided by a
// backtracking search over states, cross-checked against the reference evaluator.
//
// Timestamps. Every comparison the semantics makes has the form  tau_j - tau_i  vs  d, with d a
// deadline or duration value. With G the gcd of all positive values d can take, write
// tau = G*q + r (0 <= r < G). The comparison only depends on the q's and on the order of the
// r's, so the r's can be replaced by their ranks, which never increases a timestamp. Shifting a
// trace changes nothing either. Hence the search may assume tau_1 = 0 and r < min(G, K) without
// losing models.

#include "sleec/eval.hpp"
#include "sleec/model.hpp"
#include "sleec/text.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace sleec {

class SolveError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Bound {
  std::size_t max_states = 6;
  Seconds horizon = 0;  // 0 selects the default horizon
};

struct Budget {
  std::uint64_t max_nodes = 50'000'000;
  std::chrono::milliseconds wall{120'000};
};

inline std::string constraint_id(const Relation& r) { return "rel:" + signed_key(r); }

struct EncodingProblem {
  Signature signature;
  std::vector<NormRule> rules;
  std::vector<Relation> relations;
  std::vector<Fact> facts;
  std::size_t max_states = 6;
  Seconds horizon = 0;
  Seconds grid = 0;  // 0: no positive deadline, only the order of timestamps matters
  std::vector<std::string> events;                    // events mentioned by some constraint
  std::map<std::string, std::vector<Value>> domains;  // measures mentioned by some constraint
  std::vector<Seconds> deadlines;                     // distinct non-negative deadline values

  /// Rule ids then relation ids: the candidates for an unsatisfiable core.
  std::vector<std::string> soft_ids() const {
    std::vector<std::string> out;
    for (const auto& r : rules) out.push_back(r.id);
    for (const auto& r : relations) out.push_back(constraint_id(r));
    return out;
  }

  /// Same problem with only the listed rules and relations. Facts, domains and the
  /// timestamp grid are kept, so verdicts stay comparable.
  EncodingProblem restricted(const std::set<std::string>& keep) const {
    EncodingProblem p = *this;
    p.rules.clear();
    p.relations.clear();
    for (const auto& r : rules)
      if (keep.count(r.id)) p.rules.push_back(r);
    for (const auto& r : relations)
      if (keep.count(constraint_id(r))) p.relations.push_back(r);
    return p;
  }
};

namespace detail {

inline void collect_measures(const Term& t, std::set<std::string>& out) {
  if (t.kind == Term::Kind::measure) out.insert(t.measure);
  for (const auto& o : t.operands) collect_measures(o, out);
}

inline void collect_measures(const Proposition& p, std::set<std::string>& out) {
  for (const auto& t : p.terms) collect_measures(t, out);
  for (const auto& o : p.operands) collect_measures(o, out);
}

inline void collect_constants(const Term& t, std::set<Value>& out) {
  if (t.kind == Term::Kind::constant) out.insert(t.value);
  for (const auto& o : t.operands) collect_constants(o, out);
}

inline void collect_constants(const Proposition& p, std::set<Value>& out) {
  for (const auto& t : p.terms) collect_constants(t, out);
  for (const auto& o : p.operands) collect_constants(o, out);
}

// Every value `t` takes over the product of the domains of its measures, clamped at 0.
inline void term_values(const Term& t, const std::map<std::string, std::vector<Value>>& domains,
                        std::set<Seconds>& out) {
  std::set<std::string> ms;
  collect_measures(t, ms);
  std::vector<std::string> names(ms.begin(), ms.end());
  Valuation v;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == names.size()) {
      out.insert(std::max<Value>(0, eval_term(t, v)));
      return;
    }
    for (Value x : domains.at(names[k])) {
      v[names[k]] = x;
      rec(k + 1);
    }
  };
  rec(0);
}

}  // namespace detail

/// Builds the bounded problem. Numeric measures range over the constants of the document and 0.
inline EncodingProblem encode(const Signature& sig, const std::vector<NormRule>& rules,
                              const std::vector<Relation>& relations, const std::vector<Fact>& facts,
                              Bound bound = {}) {
  if (bound.max_states == 0 && !facts.empty()) throw SolveError("bound too small to place any fact trigger");
  EncodingProblem p;
  p.signature = sig;
  p.rules = rules;
  p.relations = relations;
  p.facts = facts;
  p.max_states = bound.max_states;

  std::set<std::string> events, measures;
  std::set<Value> constants{0};
  for (const auto& [c, v] : sig.constants) constants.insert(v);
  auto chain = [&](const ObligationChain& oc) {
    for (const auto& c : oc.items) {
      events.insert(c.obligation.event);
      detail::collect_measures(c.guard, measures);
      detail::collect_constants(c.guard, constants);
      detail::collect_measures(c.obligation.deadline, measures);
    }
  };
  for (const auto& r : rules) {
    events.insert(r.trigger_event);
    detail::collect_measures(r.trigger_cond, measures);
    detail::collect_constants(r.trigger_cond, constants);
    chain(r.chain);
  }
  for (const auto& f : facts) {
    events.insert(f.trigger_event);
    detail::collect_measures(f.trigger_cond, measures);
    detail::collect_constants(f.trigger_cond, constants);
    chain(f.chain);
  }
  for (const auto& r : relations) {
    if (!r.event_a.empty()) events.insert(r.event_a);
    if (!r.event_b.empty()) events.insert(r.event_b);
    for (const Proposition* q : {&r.prop_a, &r.prop_b}) {
      detail::collect_measures(*q, measures);
      detail::collect_constants(*q, constants);
    }
    if (r.kind == RelationKind::when_then_for) detail::collect_measures(r.duration, measures);
  }
  for (const auto& e : events)
    if (!sig.has_event(e)) throw SolveError("undeclared event '" + e + "'");
  p.events.assign(events.begin(), events.end());
  for (const auto& m : measures) {
    if (!sig.has_measure(m)) throw SolveError("undeclared measure '" + m + "'");
    if (sig.is_boolean(m)) {
      p.domains[m] = {0, 1};
    } else {
      std::vector<Value> dom;
      for (Value c : constants)
        if (c >= 0) dom.push_back(c);
      p.domains[m] = dom;
    }
  }

  std::set<Seconds> ds;
  auto deadline_values = [&](const ObligationChain& oc) {
    for (const auto& c : oc.items) detail::term_values(c.obligation.deadline, p.domains, ds);
  };
  for (const auto& r : rules) deadline_values(r.chain);
  for (const auto& f : facts) deadline_values(f.chain);
  for (const auto& r : relations)
    if (r.kind == RelationKind::when_then_for) detail::term_values(r.duration, p.domains, ds);
  p.deadlines.assign(ds.begin(), ds.end());

  Seconds g = 0;
  Seconds sum = 0;
  for (Seconds d : p.deadlines) {
    sum += d;
    if (d > 0) g = std::gcd(g, d);
  }
  p.grid = g;
  p.horizon = bound.horizon > 0 ? bound.horizon : 2 * (sum + 1);
  return p;
}

enum class Verdict { sat, unsat, unknown };

inline std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::sat: return "sat";
    case Verdict::unsat: return "unsat";
    case Verdict::unknown: return "unknown";
  }
  return "?";
}

struct SolveResult {
  Verdict verdict = Verdict::unknown;
  std::optional<Trace> witness;
  std::vector<std::string> core;  // UNSAT only: soft ids sufficient for unsatisfiability
  std::uint64_t nodes = 0;
  std::string budget_report;      // Unknown only
};

/// Replays a trace through the evaluator: every rule fulfilled, every relation and fact holds.
inline bool is_model(const EncodingProblem& p, const Trace& tr) {
  if (tr.size() > p.max_states) return false;
  if (!tr.empty() && tr.states().back().time > p.horizon) return false;
  tr.check_against(p.signature);
  for (const auto& r : p.rules)
    if (check_rule(tr, r).status != Status::fulfilled) return false;
  for (const auto& r : p.relations)
    if (!check_relation(tr, r)) return false;
  for (const auto& f : p.facts)
    if (!check_fact(tr, f)) return false;
  return true;
}

namespace detail {

struct Cursor {
  std::size_t item = 0;
  std::size_t start = 0;
  ObligationVerdict verdict;
};

// The chain item that currently decides the chain's status, with the state it started at.
inline Cursor chain_cursor(const Trace& tr, std::size_t i, const ObligationChain& oc) {
  std::size_t at = i;
  for (std::size_t k = 0;; ++k) {
    ObligationVerdict v = check_obligation(tr, at, oc.items[k]);
    if (v.status != Status::violated || k + 1 == oc.items.size()) return {k, at, v};
    at = v.at;
  }
}

inline Seconds cursor_end(const Trace& tr, const Cursor& c, const ObligationChain& oc) {
  const State& s = tr[c.start];
  return s.time + effective_deadline(oc.items[c.item].obligation.deadline, s.valuation);
}

struct BudgetExhausted {
  std::string report;
};

class Engine {
public:
  Engine(const EncodingProblem& p, const Budget& budget)
      : p_(p), budget_(budget), started_(std::chrono::steady_clock::now()) {
    // timestamp grid
    const Seconds k = static_cast<Seconds>(std::max<std::size_t>(p.max_states, 1));
    if (p.grid == 0) {
      for (Seconds t = 0; t < k && t <= p.horizon; ++t) times_.push_back(t);
    } else {
      const Seconds rmax = std::min(p.grid, k);
      for (Seconds q = 0; q * p.grid <= p.horizon; ++q)
        for (Seconds r = 0; r < rmax && q * p.grid + r <= p.horizon; ++r) times_.push_back(q * p.grid + r);
    }
    // event subsets, empty set first
    const std::size_t n = p.events.size();
    for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
      std::set<std::string> s;
      for (std::size_t e = 0; e < n; ++e)
        if (bits & (std::size_t{1} << e)) s.insert(p.events[e]);
      subsets_.push_back(std::move(s));
    }
    // valuations over mentioned measures; the rest of the signature is pinned to 0
    Valuation base;
    for (const auto& [m, sort] : p.signature.measures) base[m] = 0;
    std::vector<std::string> names;
    for (const auto& [m, dom] : p.domains) names.push_back(m);
    std::function<void(std::size_t, Valuation&)> rec = [&](std::size_t i, Valuation& v) {
      if (i == names.size()) {
        valuations_.push_back(v);
        return;
      }
      for (Value x : p.domains.at(names[i])) {
        v[names[i]] = x;
        rec(i + 1, v);
      }
    };
    rec(0, base);

    bool long_chain = false, negated_fact = false, negative_relation = false, positive_hb = false;
    for (const auto& r : p.rules) long_chain = long_chain || r.chain.size() > 1;
    for (const auto& f : p.facts) {
      long_chain = long_chain || f.chain.size() > 1;
      negated_fact = negated_fact || f.mode == FactMode::negated;
    }
    for (const auto& r : p.relations) {
      negative_relation = negative_relation || !r.positive();
      positive_hb = positive_hb || (r.positive() && r.kind == RelationKind::happens_before);
    }
    // An empty state can only matter as a violation point or to break a relation.
    allow_empty_ = long_chain || negated_fact || negative_relation;
    // Dropping the states before the first fact trigger keeps a model a model, unless a
    // relation looks backwards or must be broken somewhere.
    first_triggers_fact_ = !p.facts.empty() && !positive_hb && !negative_relation;
  }

  std::uint64_t nodes() const { return nodes_; }

  /// Engine used for the inner query of find_dead_end.
  void set_completer(Engine* inner) { completer_ = inner; }

  /// Shortest model, or nullopt when none exists within the bound.
  std::optional<Trace> find_model() {
    std::vector<State> states;
    for (std::size_t cap = 0; cap <= p_.max_states; ++cap) {
      if (auto t = extend(states, cap, true)) return t;
    }
    return std::nullopt;
  }

  /// Some model that starts with `prefix` (used for the inner situational query).
  std::optional<Trace> complete(const std::vector<State>& prefix) {
    std::vector<State> states = prefix;
    return extend(states, p_.max_states, false);
  }

  /// Outer situational query: a prefix ending at a trigger of `subject`, not violating anything,
  /// that no model extends. `exact_trigger` restricts the final state to the trigger event alone.
  std::optional<Trace> find_dead_end(const NormRule& subject, bool exact_trigger) {
    for (std::size_t cap = 1; cap <= p_.max_states; ++cap) {
      std::vector<State> states;
      outer_seen_.clear();
      if (auto t = outer(states, cap, subject, exact_trigger)) return t;
    }
    return std::nullopt;
  }

private:
  void tick() {
    ++nodes_;
    if (nodes_ > budget_.max_nodes)
      throw BudgetExhausted{"node budget of " + std::to_string(budget_.max_nodes) + " exhausted"};
    if ((nodes_ & 1023) == 0 && std::chrono::steady_clock::now() - started_ > budget_.wall)
      throw BudgetExhausted{"wall-clock budget of " + std::to_string(budget_.wall.count()) + " ms exhausted"};
  }

  // No rule violated and no positive relation violated. Both are final once they happen.
  bool not_violated(const Trace& tr) const {
    for (const auto& r : p_.rules)
      if (check_rule(tr, r).status == Status::violated) return false;
    for (const auto& r : p_.relations)
      if (r.positive() && !check_relation(tr, r)) return false;
    return true;
  }

  bool exists_time_in(Seconds lo_exclusive, Seconds hi_inclusive) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), lo_exclusive);
    return it != times_.end() && *it <= hi_inclusive;
  }

  // Every pending last obligation of a rule needs its event at a reachable, non-forbidden time.
  bool feasible(const Trace& tr, std::size_t states_left) const {
    if (tr.empty()) return true;
    const Seconds last = tr.states().back().time;
    std::map<std::string, Seconds> need, forbid;
    for (const auto& r : p_.rules) {
      for (std::size_t i = 0; i < tr.size(); ++i) {
        if (!triggers(tr[i], r.trigger_event, r.trigger_cond)) continue;
        Cursor c = chain_cursor(tr, i, r.chain);
        const Obligation& ob = r.chain.items[c.item].obligation;
        const bool last_item = c.item + 1 == r.chain.size();
        if (ob.polarity == Polarity::positive && c.verdict.status == Status::pending && last_item) {
          Seconds end = cursor_end(tr, c, r.chain);
          auto [it, fresh] = need.emplace(ob.event, end);
          if (!fresh) it->second = std::min(it->second, end);
        } else if (ob.polarity == Polarity::negative && c.verdict.status == Status::fulfilled) {
          Seconds end = cursor_end(tr, c, r.chain);
          if (end > last) forbid[ob.event] = std::max(forbid[ob.event], end);
        }
      }
    }
    for (const auto& [e, end] : need) {
      if (states_left == 0) return false;
      Seconds lo = last;
      if (auto f = forbid.find(e); f != forbid.end()) lo = std::max(lo, f->second);
      if (!exists_time_in(lo, std::min(end, p_.horizon))) return false;
    }
    return true;
  }

  // Everything about a prefix that can influence how it may be extended.
  std::string residual(const Trace& tr, bool with_facts) const {
    if (tr.empty()) return "-";
    const Seconds last = tr.states().back().time;
    std::string key = std::to_string(last) + "|";
    std::map<std::string, Seconds> need, forbid;
    std::set<std::string> exact;
    auto cursor_key = [&](const std::string& id, std::size_t i, const ObligationChain& oc, bool fact) {
      Cursor c = chain_cursor(tr, i, oc);
      const Obligation& ob = oc.items[c.item].obligation;
      const Seconds end = cursor_end(tr, c, oc);
      const bool last_item = c.item + 1 == oc.size();
      if (ob.polarity == Polarity::positive) {
        if (c.verdict.status != Status::pending) return;
        if (last_item && !fact) {
          auto [it, fresh] = need.emplace(ob.event, end);
          if (!fresh) it->second = std::min(it->second, end);
          return;
        }
      } else {
        if (c.verdict.status != Status::fulfilled || end <= last) return;
        if (!fact) {
          forbid[ob.event] = std::max(forbid[ob.event], end);
          return;
        }
      }
      exact.insert(id + ":" + std::to_string(c.item) + ":" + std::to_string(end));
    };
    for (const auto& r : p_.rules)
      for (std::size_t i = 0; i < tr.size(); ++i)
        if (triggers(tr[i], r.trigger_event, r.trigger_cond)) cursor_key(r.id, i, r.chain, false);
    if (with_facts) {
      for (const auto& f : p_.facts) {
        if (check_fact(tr, f)) {
          key += "F" + f.id + ";";
          continue;
        }
        if (f.chain.empty()) continue;
        for (std::size_t i = 0; i < tr.size(); ++i)
          if (triggers(tr[i], f.trigger_event, f.trigger_cond)) cursor_key("f" + f.id, i, f.chain, true);
      }
    }
    for (const auto& [e, t] : need) key += "n" + e + "@" + std::to_string(t) + ";";
    for (const auto& [e, t] : forbid) key += "x" + e + "@" + std::to_string(t) + ";";
    for (const auto& s : exact) key += s + ";";
    key += "|";
    for (std::size_t k = 0; k < p_.relations.size(); ++k) key += relation_residual(tr, p_.relations[k]) + ",";
    return key;
  }

  std::string relation_residual(const Trace& tr, const Relation& r) const {
    const auto& st = tr.states();
    std::string s;
    if (!r.positive()) {
      Relation pos = r;
      pos.sign = Sign::positive;
      if (!check_relation(tr, pos)) return "done";
    }
    switch (r.kind) {
      case RelationKind::happens_before: {
        bool seen = std::any_of(st.begin(), st.end(), [&](const State& x) { return x.has(r.event_a); });
        s = seen ? "a" : "-";
        break;
      }
      case RelationKind::when_then_until: {
        bool active = false;
        for (const auto& x : st) active = !x.has(r.event_b) && (active || x.has(r.event_a));
        s = active ? "u" : "-";
        break;
      }
      case RelationKind::when_then_for: {
        Seconds end = -1;
        for (const auto& x : st)
          if (x.has(r.event_a)) end = std::max(end, x.time + effective_deadline(r.duration, x.valuation));
        s = end > st.back().time + 1 ? std::to_string(end) : "-";
        break;
      }
      default: s = "-";
    }
    return s;
  }

  const std::vector<Seconds>& times() const { return times_; }

  // Depth-first extension of `states` up to `cap` states. Returns a model when found.
  std::optional<Trace> extend(std::vector<State>& states, std::size_t cap, bool from_scratch) {
    Trace tr(states);
    if (is_model_fast(tr)) return tr;
    if (states.size() >= cap) return std::nullopt;
    const std::string key = std::to_string(cap - states.size()) + "#" + residual(tr, true);
    if (failed_.count(key)) return std::nullopt;

    const Seconds prev = states.empty() ? -1 : states.back().time;
    for (const auto& evs : subsets_) {
      if (evs.empty() && !allow_empty_) continue;
      for (const auto& val : valuations_) {
        State probe{evs, val, 0};
        if (from_scratch && states.empty() && first_triggers_fact_ && !triggers_some_fact(probe)) continue;
        for (Seconds t : times_) {
          if (t <= prev) continue;
          if (states.empty() && from_scratch && t != 0) break;
          tick();
          probe.time = t;
          states.push_back(probe);
          Trace next(states);
          if (not_violated(next) && feasible(next, cap - states.size())) {
            if (auto found = extend(states, cap, from_scratch)) return found;
          }
          states.pop_back();
        }
      }
    }
    failed_.insert(key);
    return std::nullopt;
  }

  std::optional<Trace> outer(std::vector<State>& states, std::size_t cap, const NormRule& subject, bool exact) {
    if (states.size() >= cap) return std::nullopt;
    Trace tr(states);
    const std::string key = std::to_string(cap - states.size()) + "#" + residual(tr, false);
    if (outer_seen_.count(key)) return std::nullopt;

    const Seconds prev = states.empty() ? -1 : states.back().time;
    for (const auto& evs : subsets_) {
      if (evs.empty() && !allow_empty_) continue;
      for (const auto& val : valuations_) {
        for (Seconds t : times_) {
          if (t <= prev) continue;
          if (states.empty() && t != 0) break;
          tick();
          states.push_back(State{evs, val, t});
          Trace next(states);
          if (not_violated(next)) {
            const State& s = states.back();
            const bool at_trigger = triggers(s, subject.trigger_event, subject.trigger_cond) &&
                                    (!exact || s.events == std::set<std::string>{subject.trigger_event});
            if (at_trigger && states.size() == cap && !completer_->complete(states)) return next;
            if (auto found = outer(states, cap, subject, exact)) return found;
          }
          states.pop_back();
        }
      }
    }
    outer_seen_.insert(key);
    return std::nullopt;
  }

  bool triggers_some_fact(const State& s) const {
    for (const auto& f : p_.facts)
      if (triggers(s, f.trigger_event, f.trigger_cond)) return true;
    return false;
  }

  bool is_model_fast(const Trace& tr) const {
    for (const auto& r : p_.rules)
      if (check_rule(tr, r).status != Status::fulfilled) return false;
    for (const auto& r : p_.relations)
      if (!check_relation(tr, r)) return false;
    for (const auto& f : p_.facts)
      if (!check_fact(tr, f)) return false;
    return true;
  }

  const EncodingProblem& p_;
  Budget budget_;
  std::chrono::steady_clock::time_point started_;
  std::uint64_t nodes_ = 0;
  std::vector<Seconds> times_;
  std::vector<std::set<std::string>> subsets_;
  std::vector<Valuation> valuations_;
  bool allow_empty_ = false;
  bool first_triggers_fact_ = false;
  std::unordered_set<std::string> failed_;
  std::unordered_set<std::string> outer_seen_;
  Engine* completer_ = this;
};

}  // namespace detail

/// Decides whether some trace within the bound fulfils every rule and relation and
/// satisfies every fact. On UNSAT the core is the full soft set (see minimize_core).
inline SolveResult solve(const EncodingProblem& p, const Budget& budget = {}) {
  SolveResult res;
  detail::Engine engine(p, budget);
  try {
    auto model = engine.find_model();
    res.nodes = engine.nodes();
    if (model) {
      if (!is_model(p, *model)) throw std::logic_error("solver witness rejected by the evaluator");
      res.verdict = Verdict::sat;
      res.witness = std::move(model);
    } else {
      res.verdict = Verdict::unsat;
      res.core = p.soft_ids();
    }
  } catch (const detail::BudgetExhausted& e) {
    res.nodes = engine.nodes();
    res.verdict = Verdict::unknown;
    res.budget_report = e.report;
  }
  return res;
}

struct CoreResult {
  std::vector<std::string> core;
  bool minimal = true;  // false when some re-solve ran out of budget
};

/// Deletion-based minimisation: drop each soft constraint in turn and keep it dropped when
/// the rest stays unsatisfiable.
inline CoreResult minimize_core(const EncodingProblem& p, const std::vector<std::string>& start,
                                const Budget& budget = {}) {
  CoreResult out;
  std::vector<std::string> core = start;
  for (std::size_t i = 0; i < core.size();) {
    std::set<std::string> keep(core.begin(), core.end());
    keep.erase(core[i]);
    SolveResult r = solve(p.restricted(keep), budget);
    if (r.verdict == Verdict::unsat) {
      core.erase(core.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      if (r.verdict == Verdict::unknown) out.minimal = false;
      ++i;
    }
  }
  out.core = std::move(core);
  return out;
}

/// Two-level query: some prefix (at most K states, timestamps up to T) ends at a trigger of
/// `subject` without violating anything, yet no extension fulfils all rules and relations.
/// Extensions may use up to 2K states and timestamps up to 2T, so that a prefix is not a dead
/// end merely because it sits at the edge of the bound. Facts are ignored.
/// The first phase asks for a trigger state holding the trigger event alone; the second
/// allows any event set.
inline SolveResult solve_situational(const EncodingProblem& problem, const std::string& subject_id,
                                     const Budget& budget = {}) {
  EncodingProblem p = problem;
  p.facts.clear();
  const NormRule* subject = nullptr;
  for (const auto& r : p.rules)
    if (r.id == subject_id) subject = &r;
  if (!subject) throw SolveError("no rule '" + subject_id + "' in the problem");

  EncodingProblem wide = p;
  wide.max_states = 2 * p.max_states;
  wide.horizon = 2 * p.horizon;

  SolveResult res;
  detail::Engine engine(p, budget);
  detail::Engine inner(wide, budget);
  engine.set_completer(&inner);
  try {
    std::optional<Trace> prefix = engine.find_dead_end(*subject, true);
    if (!prefix) prefix = engine.find_dead_end(*subject, false);
    res.nodes = engine.nodes();
    if (prefix) {
      res.verdict = Verdict::sat;
      res.witness = std::move(prefix);
    } else {
      res.verdict = Verdict::unsat;
    }
  } catch (const detail::BudgetExhausted& e) {
    res.nodes = engine.nodes() + inner.nodes();
    res.verdict = Verdict::unknown;
    res.budget_report = e.report;
  }
  return res;
}

}  // namespace sleec
