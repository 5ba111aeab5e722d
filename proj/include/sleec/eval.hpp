#pragma once

// Reference trace semantics for normalized rules, facts and capability relations.
// Every other component (normalization, solving, analysis) is checked against this.

#include "sleec/model.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>

namespace sleec {

using Valuation = std::map<std::string, Value>;

inline Value eval_term(const Term& t, const Valuation& val) {
  switch (t.kind) {
    case Term::Kind::constant: return t.value;
    case Term::Kind::measure: {
      auto it = val.find(t.measure);
      if (it == val.end()) throw EvalError("unbound measure '" + t.measure + "'");
      return it->second;
    }
    case Term::Kind::negate: return -eval_term(t.operands[0], val);
    case Term::Kind::sum: return eval_term(t.operands[0], val) + eval_term(t.operands[1], val);
    case Term::Kind::scale: return t.value * eval_term(t.operands[0], val);
  }
  throw EvalError("malformed term");
}

inline bool eval_prop(const Proposition& p, const Valuation& val) {
  using K = Proposition::Kind;
  switch (p.kind) {
    case K::truth: return true;
    case K::falsity: return false;
    case K::equal: return eval_term(p.terms[0], val) == eval_term(p.terms[1], val);
    case K::greater_equal: return eval_term(p.terms[0], val) >= eval_term(p.terms[1], val);
    case K::negation: return !eval_prop(p.operands[0], val);
    case K::conjunction:
      return std::all_of(p.operands.begin(), p.operands.end(), [&](const auto& q) { return eval_prop(q, val); });
    case K::disjunction:
      return std::any_of(p.operands.begin(), p.operands.end(), [&](const auto& q) { return eval_prop(q, val); });
  }
  throw EvalError("malformed proposition");
}

enum class Status { fulfilled, violated, pending };

inline std::string_view status_name(Status s) {
  switch (s) {
    case Status::fulfilled: return "fulfilled";
    case Status::violated: return "violated";
    case Status::pending: return "pending";
  }
  return "?";
}

/// Outcome of an obligation checked from a time point. `at` is the violation point when violated.
struct ObligationVerdict {
  Status status = Status::fulfilled;
  std::size_t at = 0;
  bool deadline_clamped = false;

  bool operator==(const ObligationVerdict&) const = default;
};

/// Deadline of an obligation under the valuation of its start state. Negative values clamp to 0.
inline Seconds effective_deadline(const Term& deadline, const Valuation& val, bool* clamped = nullptr) {
  Value d = eval_term(deadline, val);
  if (d < 0) {
    if (clamped) *clamped = true;
    return 0;
  }
  return d;
}

/// Checks `guard => obligation` started at state `i` (0-based).
///
/// Positive `e within d`: fulfilled when e occurs at some j >= i with time in [t_i, t_i + d];
/// otherwise violated at the first state whose time reaches t_i + d; pending when the
/// trace ends before that.  Negative `not e within d`: violated at the first occurrence
/// of e inside the window, fulfilled otherwise (a truncated window counts as fulfilled).
inline ObligationVerdict check_obligation(const Trace& trace, std::size_t i, const CondObligation& cob) {
  if (i >= trace.size()) throw EvalError("obligation start index out of range");
  const State& start = trace[i];
  if (!eval_prop(cob.guard, start.valuation)) return {Status::fulfilled, 0, false};

  ObligationVerdict out;
  const Seconds d = effective_deadline(cob.obligation.deadline, start.valuation, &out.deadline_clamped);
  const Seconds end = start.time + d;
  const std::string& e = cob.obligation.event;

  if (cob.obligation.polarity == Polarity::positive) {
    for (std::size_t j = i; j < trace.size(); ++j) {
      if (trace[j].time > end) {
        out.status = Status::violated;
        out.at = j;
        return out;
      }
      if (trace[j].has(e)) {
        out.status = Status::fulfilled;
        return out;
      }
      if (trace[j].time == end) {
        out.status = Status::violated;
        out.at = j;
        return out;
      }
    }
    out.status = Status::pending;
    return out;
  }

  for (std::size_t j = i; j < trace.size() && trace[j].time <= end; ++j) {
    if (trace[j].has(e)) {
      out.status = Status::violated;
      out.at = j;
      return out;
    }
  }
  out.status = Status::fulfilled;
  return out;
}

struct ChainVerdict {
  Status status = Status::fulfilled;
  bool deadline_clamped = false;
};

/// Checks an obligation chain from item `from` onward, started at state `i`.
inline ChainVerdict check_chain(const Trace& trace, std::size_t i, const ObligationChain& oc, std::size_t from = 0) {
  if (i >= trace.size()) throw EvalError("chain start index out of range");
  if (from >= oc.items.size()) throw EvalError("empty obligation chain");
  ChainVerdict out;
  std::size_t at = i;
  for (std::size_t k = from; k < oc.items.size(); ++k) {
    ObligationVerdict v = check_obligation(trace, at, oc.items[k]);
    out.deadline_clamped = out.deadline_clamped || v.deadline_clamped;
    if (v.status != Status::violated || k + 1 == oc.items.size()) {
      out.status = v.status;
      return out;
    }
    at = v.at;
  }
  return out;
}

inline bool triggers(const State& s, const std::string& event, const Proposition& cond) {
  return s.has(event) && eval_prop(cond, s.valuation);
}

struct RuleVerdict {
  Status status = Status::fulfilled;
  std::size_t first_violation_trigger = 0;  // meaningful when violated
  bool deadline_clamped = false;
};

/// Violated if some triggering point's chain is violated; pending if none violated but some pending.
inline RuleVerdict check_rule(const Trace& trace, const NormRule& r) {
  RuleVerdict out;
  bool pending = false;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!triggers(trace[i], r.trigger_event, r.trigger_cond)) continue;
    ChainVerdict v = check_chain(trace, i, r.chain);
    out.deadline_clamped = out.deadline_clamped || v.deadline_clamped;
    if (v.status == Status::violated) {
      out.status = Status::violated;
      out.first_violation_trigger = i;
      return out;
    }
    pending = pending || v.status == Status::pending;
  }
  out.status = pending ? Status::pending : Status::fulfilled;
  return out;
}

/// A fact holds when some trigger point has its chain fulfilled (asserted) or violated (negated).
/// A fact without a chain only asserts the trigger occurrence.
inline bool check_fact(const Trace& trace, const Fact& f) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!triggers(trace[i], f.trigger_event, f.trigger_cond)) continue;
    if (f.chain.empty()) return true;
    Status s = check_chain(trace, i, f.chain).status;
    if (f.mode == FactMode::asserted ? s == Status::fulfilled : s == Status::violated) return true;
  }
  return false;
}

namespace detail {

inline bool relation_holds(const Trace& tr, const Relation& r) {
  const auto& st = tr.states();
  auto all = [&](auto pred) { return std::all_of(st.begin(), st.end(), pred); };
  switch (r.kind) {
    case RelationKind::hypernym:
      return all([&](const State& s) { return !s.has(r.event_a) || s.has(r.event_b); });
    case RelationKind::contradictory:
      return all([&](const State& s) { return !(s.has(r.event_a) && s.has(r.event_b)); });
    case RelationKind::happens_before: {
      bool seen_a = false;
      for (const auto& s : st) {
        if (s.has(r.event_b) && !seen_a) return false;
        seen_a = seen_a || s.has(r.event_a);
      }
      return true;
    }
    case RelationKind::event_equal:
      return all([&](const State& s) { return s.has(r.event_a) == s.has(r.event_b); });
    case RelationKind::imply:
      return all([&](const State& s) { return !eval_prop(r.prop_a, s.valuation) || eval_prop(r.prop_b, s.valuation); });
    case RelationKind::mutually_exclusive:
      return all([&](const State& s) { return !(eval_prop(r.prop_a, s.valuation) && eval_prop(r.prop_b, s.valuation)); });
    case RelationKind::opposite:
      return all([&](const State& s) { return eval_prop(r.prop_a, s.valuation) != eval_prop(r.prop_b, s.valuation); });
    case RelationKind::measure_equal:
      return all([&](const State& s) { return eval_prop(r.prop_a, s.valuation) == eval_prop(r.prop_b, s.valuation); });
    case RelationKind::forbids:
      return all([&](const State& s) { return !s.has(r.event_a) || !eval_prop(r.prop_a, s.valuation); });
    case RelationKind::induces:
      return all([&](const State& s) { return !s.has(r.event_a) || eval_prop(r.prop_a, s.valuation); });
    case RelationKind::when_then_until: {
      // From each trigger, p must hold at every state before the first later-or-equal e_b,
      // or at every remaining state when e_b never comes.
      for (std::size_t i = 0; i < st.size(); ++i) {
        if (!st[i].has(r.event_a)) continue;
        for (std::size_t k = i; k < st.size(); ++k) {
          if (st[k].has(r.event_b)) break;
          if (!eval_prop(r.prop_a, st[k].valuation)) return false;
        }
      }
      return true;
    }
    case RelationKind::when_then_for: {
      for (std::size_t i = 0; i < st.size(); ++i) {
        if (!st[i].has(r.event_a)) continue;
        const Seconds end = st[i].time + effective_deadline(r.duration, st[i].valuation);
        for (std::size_t j = i; j < st.size() && st[j].time < end; ++j)
          if (!eval_prop(r.prop_a, st[j].valuation)) return false;
      }
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// True iff the trace satisfies the relation; negative relations return the complement.
inline bool check_relation(const Trace& trace, const Relation& r) {
  const bool holds = detail::relation_holds(trace, r);
  return r.positive() ? holds : !holds;
}

}  // namespace sleec
