#pragma once

// Keyword-syntax rendering of terms, propositions, rules and relations, plus
// the canonical proposition form used for relation identity.

#include "sleec/model.hpp"

#include <algorithm>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace sleec {

struct TimeUnit {
  std::string_view name;
  Seconds factor;
};

inline constexpr TimeUnit kTimeUnits[] = {
    {"days", 86400},
    {"hours", 3600},
    {"minutes", 60},
    {"seconds", 1},
};

/// Accepts plural and singular unit keywords; returns 0 for non-units.
inline Seconds unit_factor(std::string_view word) {
  for (const auto& u : kTimeUnits) {
    if (word == u.name) return u.factor;
    if (word.size() + 1 == u.name.size() && u.name.substr(0, word.size()) == word) return u.factor;
  }
  return 0;
}

inline std::string_view kind_keyword(RelationKind k) {
  switch (k) {
    case RelationKind::hypernym: return "hypernym";
    case RelationKind::contradictory: return "isContradictoryWith";
    case RelationKind::happens_before: return "happensBefore";
    case RelationKind::event_equal: return "equal";
    case RelationKind::imply: return "imply";
    case RelationKind::mutually_exclusive: return "mutuallyExclusive";
    case RelationKind::opposite: return "oppositeTo";
    case RelationKind::measure_equal: return "equal";
    case RelationKind::forbids: return "forbids";
    case RelationKind::induces: return "induces";
    case RelationKind::when_then_until: return "until";
    case RelationKind::when_then_for: return "for";
  }
  return "?";
}

/// Stable identifier of a kind, distinct for event and measure equality.
inline std::string_view kind_name(RelationKind k) {
  switch (k) {
    case RelationKind::hypernym: return "hypernym";
    case RelationKind::contradictory: return "isContradictoryWith";
    case RelationKind::happens_before: return "happensBefore";
    case RelationKind::event_equal: return "eventEqual";
    case RelationKind::imply: return "imply";
    case RelationKind::mutually_exclusive: return "mutuallyExclusive";
    case RelationKind::opposite: return "opposite";
    case RelationKind::measure_equal: return "measureEqual";
    case RelationKind::forbids: return "forbids";
    case RelationKind::induces: return "induces";
    case RelationKind::when_then_until: return "whenThenUntil";
    case RelationKind::when_then_for: return "whenThenFor";
  }
  return "?";
}

inline std::optional<RelationKind> kind_from_name(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(RelationKind::when_then_for); ++i) {
    auto k = static_cast<RelationKind>(i);
    if (kind_name(k) == s) return k;
  }
  return std::nullopt;
}

inline std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::inferred: return "inferred";
    case Provenance::llm: return "llm";
    case Provenance::stakeholder: return "stakeholder";
  }
  return "?";
}

namespace detail {

inline std::string render_term(const Term& t, int level);

inline std::string render_term(const Term& t, int level) {
  // levels: 0 = sum context, 1 = operand of scale/negate
  switch (t.kind) {
    case Term::Kind::constant: return std::to_string(t.value);
    case Term::Kind::measure: return t.measure;
    case Term::Kind::negate: return "-" + render_term(t.operands[0], 1);
    case Term::Kind::scale: {
      std::string s = std::to_string(t.value) + " * " + render_term(t.operands[0], 1);
      return level > 0 ? "(" + s + ")" : s;
    }
    case Term::Kind::sum: {
      const Term& rhs = t.operands[1];
      std::string r = render_term(rhs, 0);
      if (rhs.kind == Term::Kind::sum) r = "(" + r + ")";
      std::string s = render_term(t.operands[0], 0) + " + " + r;
      return level > 0 ? "(" + s + ")" : s;
    }
  }
  return "?";
}

inline std::string render_prop(const Proposition& p, const Signature* sig, int level) {
  // levels: 1 = or, 2 = and, 3 = not/atom
  using K = Proposition::Kind;
  switch (p.kind) {
    case K::truth: return "true";
    case K::falsity: return "false";
    case K::equal: {
      const Term& a = p.terms[0];
      const Term& b = p.terms[1];
      if (sig && a.kind == Term::Kind::measure && sig->is_boolean(a.measure) && b.is_constant() && b.value == 1)
        return a.measure;
      return render_term(a, 0) + " = " + render_term(b, 0);
    }
    case K::greater_equal: return render_term(p.terms[0], 0) + " >= " + render_term(p.terms[1], 0);
    case K::negation: return "not " + render_prop(p.operands[0], sig, 3);
    case K::conjunction:
    case K::disjunction: {
      const bool conj = p.kind == K::conjunction;
      const int mine = conj ? 2 : 1;
      std::string s;
      for (std::size_t i = 0; i < p.operands.size(); ++i) {
        if (i) s += conj ? " and " : " or ";
        s += render_prop(p.operands[i], sig, mine + 1);
      }
      return level > mine ? "(" + s + ")" : s;
    }
  }
  return "?";
}

}  // namespace detail

inline std::string render(const Term& t) { return detail::render_term(t, 0); }

/// Renders a proposition; with a signature, boolean measures print bare (`m` instead of `m = 1`).
inline std::string render(const Proposition& p, const Signature* sig = nullptr) {
  return detail::render_prop(p, sig, 1);
}

/// Deadline or duration with the largest unit that divides it exactly.
inline std::string render_duration(const Term& t) {
  if (t.is_constant()) {
    for (const auto& u : kTimeUnits)
      if (t.value != 0 && t.value % u.factor == 0) return std::to_string(t.value / u.factor) + " " + std::string(u.name);
    return std::to_string(t.value) + " seconds";
  }
  if (t.kind == Term::Kind::scale) {
    for (const auto& u : kTimeUnits)
      if (u.factor > 1 && t.value == u.factor) return detail::render_term(t.operands[0], 1) + " " + std::string(u.name);
  }
  return detail::render_term(t, 0) + " seconds";
}

inline std::string render(const Obligation& ob) {
  std::string s = ob.polarity == Polarity::negative ? "not " + ob.event : ob.event;
  if (!(ob.deadline.is_constant() && ob.deadline.value == 0)) s += " within " + render_duration(ob.deadline);
  return s;
}

inline std::string render(const CondObligation& c, const Signature* sig = nullptr) {
  if (c.guard.is_truth()) return render(c.obligation);
  return "if " + render(c.guard, sig) + " then " + render(c.obligation);
}

inline std::string render(const ObligationChain& oc, const Signature* sig = nullptr) {
  std::string s;
  for (std::size_t i = 0; i < oc.items.size(); ++i) {
    if (i) s += " otherwise ";
    s += render(oc.items[i], sig);
  }
  return s;
}

inline std::string render_trigger(const std::string& event, const Proposition& cond, const Signature* sig) {
  if (cond.is_truth()) return event;
  // The condition is rendered at `and` precedence so that a disjunction keeps its parentheses.
  return event + " and " + detail::render_prop(cond, sig, 2);
}

/// `when E [and P] then CHAIN`, without the rule id.
inline std::string render_body(const NormRule& r, const Signature* sig = nullptr) {
  return "when " + render_trigger(r.trigger_event, r.trigger_cond, sig) + " then " + render(r.chain, sig);
}

inline std::string render(const NormRule& r, const Signature* sig = nullptr) {
  return r.id.empty() ? render_body(r, sig) : r.id + " " + render_body(r, sig);
}

inline std::string render_body(const Fact& f, const Signature* sig = nullptr) {
  std::string s = "exists " + render_trigger(f.trigger_event, f.trigger_cond, sig);
  if (!f.chain.empty()) {
    if (f.mode == FactMode::negated)
      s += " while not (" + render(f.chain, sig) + ")";
    else
      s += " while " + render(f.chain, sig);
  }
  return s;
}

inline std::string render(const Fact& f, const Signature* sig = nullptr) {
  return f.id.empty() ? render_body(f, sig) : f.id + " " + render_body(f, sig);
}

/// Keyword syntax; negative relations carry a leading `!`.
inline std::string render(const Relation& r, const Signature* sig = nullptr) {
  std::string body;
  const std::string kw(kind_keyword(r.kind));
  if (is_event_kind(r.kind)) {
    body = r.event_a + " " + kw + " " + r.event_b;
  } else if (is_measure_kind(r.kind)) {
    body = detail::render_prop(r.prop_a, sig, 2) + " " + kw + " " + detail::render_prop(r.prop_b, sig, 2);
  } else {
    switch (r.kind) {
      case RelationKind::forbids: body = detail::render_prop(r.prop_a, sig, 2) + " forbids " + r.event_a; break;
      case RelationKind::induces: body = r.event_a + " induces " + detail::render_prop(r.prop_a, sig, 2); break;
      case RelationKind::when_then_until:
        body = "when " + r.event_a + " then " + detail::render_prop(r.prop_a, sig, 2) + " until " + r.event_b;
        break;
      case RelationKind::when_then_for:
        body = "when " + r.event_a + " then " + detail::render_prop(r.prop_a, sig, 2) + " for " + render_duration(r.duration);
        break;
      default: break;
    }
  }
  return r.positive() ? body : "! " + body;
}

/// Negation normal form with sorted, de-duplicated junction operands.
inline Proposition canonical(const Proposition& p) {
  using K = Proposition::Kind;
  auto sort_unique = [](std::vector<Proposition> ops) {
    std::vector<std::pair<std::string, Proposition>> keyed;
    for (auto& o : ops) keyed.emplace_back(render(o), std::move(o));
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    keyed.erase(std::unique(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
                keyed.end());
    std::vector<Proposition> out;
    for (auto& [k, o] : keyed) out.push_back(std::move(o));
    return out;
  };
  switch (p.kind) {
    case K::truth:
    case K::falsity:
    case K::equal:
    case K::greater_equal: return p;
    case K::conjunction:
    case K::disjunction: {
      std::vector<Proposition> ops;
      for (const auto& o : p.operands) ops.push_back(canonical(o));
      auto built = p.kind == K::conjunction ? Proposition::conjunction(std::move(ops))
                                            : Proposition::disjunction(std::move(ops));
      if (built.kind != K::conjunction && built.kind != K::disjunction) return built;
      built.operands = sort_unique(std::move(built.operands));
      if (built.operands.size() == 1) return built.operands.front();
      return built;
    }
    case K::negation: {
      const Proposition& inner = p.operands[0];
      switch (inner.kind) {
        case K::truth: return Proposition::falsity();
        case K::falsity: return Proposition::truth();
        case K::negation: return canonical(inner.operands[0]);
        case K::conjunction:
        case K::disjunction: {
          std::vector<Proposition> ops;
          for (const auto& o : inner.operands) ops.push_back(Proposition::negation(o));
          return canonical(inner.kind == K::conjunction ? Proposition::disjunction(std::move(ops))
                                                        : Proposition::conjunction(std::move(ops)));
        }
        default: return p;
      }
    }
  }
  return p;
}

/// Identity of a relation without its sign: `kind(operand, ...)`.
inline std::string atom_key(const Relation& r) {
  std::string s(kind_name(r.kind));
  s += "(";
  switch (r.kind) {
    case RelationKind::hypernym:
    case RelationKind::contradictory:
    case RelationKind::happens_before:
    case RelationKind::event_equal: s += r.event_a + "," + r.event_b; break;
    case RelationKind::imply:
    case RelationKind::mutually_exclusive:
    case RelationKind::opposite:
    case RelationKind::measure_equal: s += render(r.prop_a) + "," + render(r.prop_b); break;
    case RelationKind::forbids: s += render(r.prop_a) + "," + r.event_a; break;
    case RelationKind::induces: s += r.event_a + "," + render(r.prop_a); break;
    case RelationKind::when_then_until: s += r.event_a + "," + render(r.prop_a) + "," + r.event_b; break;
    case RelationKind::when_then_for: s += r.event_a + "," + render(r.prop_a) + "," + render(r.duration); break;
  }
  return s + ")";
}

/// Identity including the sign; sorts by (kind, operands) first.
inline std::string signed_key(const Relation& r) { return atom_key(r) + (r.positive() ? "+" : "-"); }

/// Short functional notation used in derivation logs: `hyp(a,b)` / `¬hyp(a,b)`.
inline std::string brief(const Relation& r) { return (r.positive() ? "" : "not ") + atom_key(r); }

}  // namespace sleec
