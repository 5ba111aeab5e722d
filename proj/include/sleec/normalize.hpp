#pragma once

// Expansion of surface rules (defeaters, fallbacks) into normalized rules, and the
// canonical text form of a normalized document.

#include "sleec/eval.hpp"
#include "sleec/model.hpp"
#include "sleec/parser.hpp"
#include "sleec/text.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sleec {

struct NormalizedDocument {
  Signature signature;
  Preemption preemption = Preemption::no_obligation;
  std::vector<NormRule> rules;
  std::vector<Relation> relations;
  std::vector<Fact> facts;

  const NormRule* find_rule(const std::string& id) const {
    for (const auto& r : rules)
      if (r.id == id) return &r;
    return nullptr;
  }
};

/// One expansion branch of a surface rule. `chain` is empty when the branch is preempted.
struct Branch {
  std::string id;
  Proposition condition;
  std::optional<ObligationChain> chain;
  int defeater = -1;  // index of the selecting defeater, -1 for the main response
};

namespace detail {

inline bool mentions_measure(const Term& t) {
  if (t.kind == Term::Kind::measure) return true;
  for (const auto& o : t.operands)
    if (mentions_measure(o)) return true;
  return false;
}

inline ObligationChain negated_response(const ObligationChain& oc) {
  ObligationChain out;
  CondObligation first = oc.items.front();
  first.obligation.polarity =
      first.obligation.polarity == Polarity::positive ? Polarity::negative : Polarity::positive;
  out.items.push_back(std::move(first));
  return out;
}

inline void check_deadlines(const ObligationChain& oc, const std::string& rule_id, SourceSpan span) {
  for (const auto& c : oc.items) {
    if (mentions_measure(c.obligation.deadline)) continue;
    if (eval_term(c.obligation.deadline, {}) < 0)
      throw ParseError(ParseError::Kind::semantic, "negative deadline in rule " + rule_id, 0, 0, span);
  }
}

}  // namespace detail

/// Later defeaters take precedence: defeater k is selected when d_k holds and no later one does.
inline std::vector<Branch> branch_conditions(const SurfaceRule& r, Preemption mode = Preemption::no_obligation) {
  std::vector<Branch> out;
  const std::size_t n = r.defeaters.size();
  auto none_after = [&](std::size_t k) {
    std::vector<Proposition> parts;
    for (std::size_t j = k; j < n; ++j) parts.push_back(Proposition::negation(r.defeaters[j].condition));
    return parts;
  };

  Branch main;
  main.id = r.id;
  std::vector<Proposition> parts{r.trigger_cond};
  for (auto& p : none_after(0)) parts.push_back(std::move(p));
  main.condition = Proposition::conjunction(std::move(parts));
  main.chain = r.response;
  out.push_back(std::move(main));

  for (std::size_t k = 0; k < n; ++k) {
    Branch b;
    b.id = r.id + "_u" + std::to_string(k + 1);
    b.defeater = static_cast<int>(k);
    std::vector<Proposition> cs{r.trigger_cond, r.defeaters[k].condition};
    for (auto& p : none_after(k + 1)) cs.push_back(std::move(p));
    b.condition = Proposition::conjunction(std::move(cs));
    if (r.defeaters[k].response) {
      b.chain = *r.defeaters[k].response;
    } else if (mode == Preemption::negated_response) {
      b.chain = detail::negated_response(r.response);
    }
    out.push_back(std::move(b));
  }
  return out;
}

inline NormalizedDocument normalize(const SurfaceDocument& doc) {
  NormalizedDocument out;
  out.signature = doc.signature;
  out.preemption = doc.preemption;
  out.relations = doc.relations;
  out.facts = doc.facts;
  std::set<std::string> ids;
  for (const auto& sr : doc.rules) {
    for (auto& b : branch_conditions(sr, doc.preemption)) {
      if (!b.chain) continue;
      detail::check_deadlines(*b.chain, b.id, sr.span);
      if (!ids.insert(b.id).second)
        throw ParseError(ParseError::Kind::semantic, "duplicate rule id '" + b.id + "'", 0, 0, sr.span);
      NormRule r;
      r.id = b.id;
      r.trigger_event = sr.trigger_event;
      r.trigger_cond = std::move(b.condition);
      r.chain = std::move(*b.chain);
      r.span = sr.span;
      out.rules.push_back(std::move(r));
    }
  }
  for (const auto& f : doc.facts) {
    if (!ids.insert(f.id).second)
      throw ParseError(ParseError::Kind::semantic, "duplicate id '" + f.id + "'", 0, 0, f.span);
    if (!f.chain.empty()) detail::check_deadlines(f.chain, f.id, f.span);
  }
  return out;
}

inline NormalizedDocument load_document(std::string_view text) { return normalize(parse(text)); }

/// Canonical normalized text; parses back to a structurally equal document.
inline std::string render(const NormalizedDocument& doc) {
  std::string s;
  const Signature* sig = &doc.signature;
  if (!doc.signature.empty() || !doc.signature.constants.empty()) {
    s += "def_start\n";
    for (const auto& e : doc.signature.events) s += "  event " + e + "\n";
    for (const auto& [m, sort] : doc.signature.measures)
      s += "  measure " + m + (sort == MeasureSort::boolean ? " : boolean\n" : " : numeric\n");
    for (const auto& [c, v] : doc.signature.constants) s += "  constant " + c + " = " + std::to_string(v) + "\n";
    if (doc.preemption == Preemption::negated_response) s += "  option preemption = negate\n";
    s += "def_end\n";
  }
  if (!doc.rules.empty()) {
    s += "rule_start\n";
    for (const auto& r : doc.rules) s += "  " + render(r, sig) + "\n";
    s += "rule_end\n";
  }
  if (!doc.relations.empty()) {
    s += "relation_start\n";
    for (const auto& r : doc.relations) s += "  " + render(r, sig) + "\n";
    s += "relation_end\n";
  }
  for (FactRole role : {FactRole::concern, FactRole::purpose}) {
    std::string block;
    for (const auto& f : doc.facts)
      if (f.role == role) block += "  " + render(f, sig) + "\n";
    if (block.empty()) continue;
    const std::string tag = role == FactRole::concern ? "concern" : "purpose";
    s += tag + "_start\n" + block + tag + "_end\n";
  }
  return s;
}

}  // namespace sleec
