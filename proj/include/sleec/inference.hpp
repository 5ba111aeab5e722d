#pragma once

// Horn inference rules over capability relations and the consistency filter that
// repairs candidate relation sets with follow-up queries.

#include "sleec/model.hpp"
#include "sleec/text.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace sleec {

/// Operand of a relation pattern: a variable, optionally negated (measure rules only).
struct PatternOperand {
  int var = 0;
  bool negated = false;
};

struct RelationPattern {
  RelationKind kind;
  PatternOperand a;
  PatternOperand b;
  Sign sign = Sign::positive;
};

struct InferenceRule {
  std::string name;
  std::vector<RelationPattern> premises;
  RelationPattern conclusion;

  bool derives_negative() const { return conclusion.sign == Sign::negative; }
};

namespace detail {

inline RelationPattern pat(RelationKind k, int a, int b, Sign s = Sign::positive, bool na = false, bool nb = false) {
  return RelationPattern{k, {a, na}, {b, nb}, s};
}

}  // namespace detail

/// The 25 rules. Variables 0, 1, 2 stand for a, b, c.
inline const std::vector<InferenceRule>& rule_catalog() {
  using detail::pat;
  using K = RelationKind;
  constexpr Sign N = Sign::negative;
  constexpr Sign P = Sign::positive;
  static const std::vector<InferenceRule> rules = {
      // events
      {"IP1-", {pat(K::contradictory, 0, 1)}, pat(K::hypernym, 0, 1, N)},
      {"IP2-", {pat(K::happens_before, 0, 1)}, pat(K::hypernym, 0, 1, N)},
      {"IPtrans+", {pat(K::hypernym, 0, 1), pat(K::hypernym, 1, 2)}, pat(K::hypernym, 0, 2)},
      {"IPEQ+", {pat(K::event_equal, 0, 1)}, pat(K::hypernym, 0, 1)},
      {"ME1-", {pat(K::hypernym, 0, 1)}, pat(K::contradictory, 0, 1, N)},
      {"MEcomm+", {pat(K::contradictory, 1, 0)}, pat(K::contradictory, 0, 1)},
      {"MEtrans+", {pat(K::hypernym, 0, 1), pat(K::contradictory, 1, 2)}, pat(K::contradictory, 0, 2)},
      {"EQIP+", {pat(K::hypernym, 0, 1), pat(K::hypernym, 1, 0)}, pat(K::event_equal, 0, 1)},
      {"EQcom+", {pat(K::event_equal, 0, 1)}, pat(K::event_equal, 1, 0)},
      {"HBtrans1+", {pat(K::happens_before, 0, 1), pat(K::happens_before, 1, 2)}, pat(K::happens_before, 0, 2)},
      {"HBtrans2+", {pat(K::happens_before, 0, 1), pat(K::hypernym, 2, 1)}, pat(K::happens_before, 0, 2)},
      {"HBtrans3+", {pat(K::hypernym, 1, 0), pat(K::happens_before, 1, 2)}, pat(K::happens_before, 0, 2)},
      // measure propositions
      {"MIP1-", {pat(K::mutually_exclusive, 0, 1)}, pat(K::imply, 0, 1, N)},
      {"MIPtrans+", {pat(K::imply, 0, 1), pat(K::imply, 1, 2)}, pat(K::imply, 0, 2)},
      {"IPEQ1+", {pat(K::measure_equal, 0, 1)}, pat(K::imply, 0, 1)},
      {"IPEQ2+", {pat(K::measure_equal, 0, 1)}, pat(K::imply, 0, 1, P, true, true)},
      {"MME1+", {pat(K::imply, 0, 1)}, pat(K::mutually_exclusive, 0, 1, N)},
      {"MMEcomm+", {pat(K::mutually_exclusive, 1, 0)}, pat(K::mutually_exclusive, 0, 1)},
      {"MMEtrans+", {pat(K::imply, 0, 1), pat(K::mutually_exclusive, 1, 2)}, pat(K::mutually_exclusive, 0, 2)},
      {"MEQIP+", {pat(K::imply, 0, 1), pat(K::imply, 1, 0)}, pat(K::measure_equal, 0, 1)},
      {"MEQOP+", {pat(K::opposite, 0, 1, P, false, true), pat(K::imply, 1, 0)}, pat(K::measure_equal, 0, 1)},
      {"MEQcom+", {pat(K::measure_equal, 0, 1)}, pat(K::measure_equal, 1, 0)},
      {"MOPEQ+", {pat(K::measure_equal, 0, 1, P, false, true)}, pat(K::opposite, 0, 1)},
      {"MOPcoms+", {pat(K::opposite, 1, 0)}, pat(K::opposite, 0, 1)},
      {"MOPME+", {pat(K::mutually_exclusive, 0, 1), pat(K::mutually_exclusive, 0, 1, P, true, true)},
       pat(K::opposite, 0, 1)},
  };
  return rules;
}

inline const InferenceRule& find_inference_rule(const std::string& name) {
  for (const auto& r : rule_catalog())
    if (r.name == name) return r;
  throw std::out_of_range("no inference rule named '" + name + "'");
}

/// Relation with canonical proposition operands, so that matching is syntactic.
inline Relation canonical(const Relation& r) {
  Relation out = r;
  out.prop_a = canonical(r.prop_a);
  out.prop_b = canonical(r.prop_b);
  return out;
}

/// One instantiation of a rule: conclusion plus the premises it used.
struct Derivation {
  std::string rule;
  Relation conclusion;
  std::vector<Relation> premises;
};

namespace detail {

// Bindings are either event names or canonical propositions, depending on the kind.
struct Binding {
  std::optional<std::string> event;
  std::optional<Proposition> prop;
};

using Bindings = std::map<int, Binding>;

inline bool bind_operand(Bindings& b, const PatternOperand& op, RelationKind k, const Relation& r, bool first) {
  Binding& slot = b[op.var];
  if (is_event_kind(k)) {
    const std::string& name = first ? r.event_a : r.event_b;
    if (slot.event) return *slot.event == name;
    slot.event = name;
    return true;
  }
  const Proposition& p = first ? r.prop_a : r.prop_b;
  Proposition value = op.negated ? canonical(Proposition::negation(p)) : canonical(p);
  if (slot.prop) return *slot.prop == value;
  slot.prop = std::move(value);
  return true;
}

inline Relation instantiate(const RelationPattern& pt, const Bindings& b) {
  if (is_event_kind(pt.kind))
    return Relation::events(pt.kind, *b.at(pt.a.var).event, *b.at(pt.b.var).event, pt.sign, Provenance::inferred);
  auto operand = [&](const PatternOperand& op) {
    const Proposition& p = *b.at(op.var).prop;
    return op.negated ? canonical(Proposition::negation(p)) : p;
  };
  return Relation::measures(pt.kind, operand(pt.a), operand(pt.b), pt.sign, Provenance::inferred);
}

inline bool reflexive(const Relation& r) {
  return is_event_kind(r.kind) ? r.event_a == r.event_b : render(r.prop_a) == render(r.prop_b);
}

inline void match(const InferenceRule& rule, std::size_t k, const std::vector<Relation>& pos, Bindings b,
                  std::vector<Relation>& used, std::vector<Derivation>& out) {
  if (k == rule.premises.size()) {
    Relation c = instantiate(rule.conclusion, b);
    if (reflexive(c)) return;
    out.push_back(Derivation{rule.name, std::move(c), used});
    return;
  }
  const RelationPattern& pt = rule.premises[k];
  for (const auto& r : pos) {
    if (r.kind != pt.kind) continue;
    Bindings next = b;
    if (!bind_operand(next, pt.a, pt.kind, r, true) || !bind_operand(next, pt.b, pt.kind, r, false)) continue;
    used.push_back(r);
    match(rule, k + 1, pos, std::move(next), used, out);
    used.pop_back();
  }
}

}  // namespace detail

/// All instantiations whose premises are positive members of `rels`, sorted by conclusion key.
/// Conclusions relating an operand to itself are dropped.
inline std::vector<Derivation> apply_rule(const InferenceRule& rule, const std::vector<Relation>& rels) {
  std::vector<Relation> pos;
  for (const auto& r : rels)
    if (r.positive() && !is_mixed_kind(r.kind)) pos.push_back(canonical(r));
  std::sort(pos.begin(), pos.end(), [](const Relation& a, const Relation& b) { return signed_key(a) < signed_key(b); });
  std::vector<Derivation> out;
  std::vector<Relation> used;
  detail::match(rule, 0, pos, {}, used, out);
  std::stable_sort(out.begin(), out.end(), [](const Derivation& a, const Derivation& b) {
    return signed_key(a.conclusion) < signed_key(b.conclusion);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Consistency filter

/// Answers follow-up queries. Returns the answered relations (either sign); queries left
/// out of the answer are treated as unanswered. Throwing marks the whole batch unanswered.
using FollowupOracle = std::function<std::vector<Relation>(const std::vector<Relation>&)>;

struct Flip {
  Relation original;              // the positive relation that was replaced
  std::string rule;               // rule whose conclusion forced the flip, or "local"
  std::vector<Relation> premises; // premises of that rule instance
  std::size_t iteration = 0;
};

struct FilterEvent {
  std::size_t iteration = 0;
  std::string phase;   // merge, local, negative, positive, followup
  std::string rule;
  std::string detail;
};

struct FilterOutcome {
  std::vector<Relation> accepted;
  std::vector<Flip> flipped;
  std::vector<Relation> followups_asked;
  std::vector<Relation> unanswered;
  std::size_t iterations = 0;
  bool complete = true;
  std::vector<FilterEvent> events;
  std::vector<Relation> closure;  // final Rel*
  // Derivation behind every relation that entered Rel* by inference or follow-up.
  std::map<std::string, Derivation> derived_by;
};

namespace detail {

class Filter {
public:
  Filter(const std::vector<Relation>& input, FollowupOracle oracle) : oracle_(std::move(oracle)) {
    for (const auto& r : input) {
      Relation c = canonical(r);
      if (is_mixed_kind(c.kind)) {
        passthrough_.push_back(c);
        continue;
      }
      original_.insert(signed_key(c));
      merge(c, "merge");
    }
  }

  FilterOutcome run() {
    std::vector<Relation> incoming;
    for (;;) {
      ++out_.iterations;
      for (auto& r : incoming) merge(r, "merge");
      incoming.clear();
      const auto old = signature_of_star();

      negative_pass();
      std::vector<Derivation> queries = positive_pass();
      if (old == signature_of_star() && queries.empty()) break;
      if (queries.empty()) continue;

      std::vector<Relation> batch;
      for (const auto& d : queries) {
        batch.push_back(d.conclusion);
        asked_.insert(atom_key(d.conclusion));
        out_.followups_asked.push_back(d.conclusion);
        pending_[atom_key(d.conclusion)] = d;
        log("followup", d.rule, "ask " + brief(d.conclusion));
      }
      std::vector<Relation> answers;
      try {
        answers = oracle_ ? oracle_(batch) : std::vector<Relation>{};
      } catch (const std::exception& e) {
        log("followup", "", std::string("oracle failed: ") + e.what());
        for (auto& q : batch) out_.unanswered.push_back(q);
        out_.complete = false;
        break;
      }
      std::map<std::string, Relation> by_key;
      for (auto& a : answers) {
        Relation c = canonical(a);
        if (!pending_.count(atom_key(c))) continue;
        if (c.provenance == Provenance::inferred) c.provenance = Provenance::llm;
        by_key.emplace(atom_key(c), c);
      }
      for (auto& q : batch) {
        auto it = by_key.find(atom_key(q));
        if (it == by_key.end()) {
          out_.unanswered.push_back(q);
          out_.complete = false;
          log("followup", "", "unanswered " + brief(q));
          continue;
        }
        out_.derived_by[signed_key(it->second)] = pending_.at(atom_key(q));
        incoming.push_back(it->second);
      }
    }

    for (const auto& [k, r] : star_) {
      out_.closure.push_back(r);
      if (original_.count(signed_key(r))) out_.accepted.push_back(r);
    }
    for (auto& r : passthrough_) out_.accepted.push_back(r);
    return std::move(out_);
  }

private:
  void log(const std::string& phase, const std::string& rule, const std::string& detail) {
    out_.events.push_back(FilterEvent{out_.iterations, phase, rule, detail});
  }

  std::vector<std::string> signature_of_star() const {
    std::vector<std::string> v;
    for (const auto& [k, r] : star_) v.push_back(signed_key(r));
    return v;
  }

  std::vector<Relation> snapshot() const {
    std::vector<Relation> v;
    for (const auto& [k, r] : star_) v.push_back(r);
    return v;
  }

  bool present(const Relation& r) const {
    auto it = star_.find(atom_key(r));
    return it != star_.end() && it->second.sign == r.sign;
  }

  void flip(Relation positive, const std::string& rule, const std::vector<Relation>& premises,
            const std::string& phase) {
    Relation neg = positive.negated();
    if (rule != "local") neg.provenance = Provenance::inferred;
    star_[atom_key(positive)] = neg;
    out_.flipped.push_back(Flip{positive, rule, premises, out_.iterations});
    log(phase, rule, "flip " + brief(positive));
  }

  // Union followed by local consistency: a negative always wins over its positive.
  void merge(const Relation& r, const std::string& phase) {
    auto it = star_.find(atom_key(r));
    if (it == star_.end()) {
      star_.emplace(atom_key(r), r);
      return;
    }
    if (it->second.sign == r.sign) {
      if (provenance_rank(r.provenance) > provenance_rank(it->second.provenance)) it->second.provenance = r.provenance;
      return;
    }
    if (it->second.positive()) {
      const Relation old = it->second;
      flip(old, "local", {r}, "local");
      it->second = r;
    }
    (void)phase;
  }

  void negative_pass() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& rule : rule_catalog()) {
        if (!rule.derives_negative()) continue;
        for (const auto& d : apply_rule(rule, snapshot())) {
          if (!premises_present(d)) continue;
          if (present(d.conclusion)) continue;
          const Relation positive = d.conclusion.negated();
          if (present(positive)) {
            flip(star_.at(atom_key(positive)), rule.name, d.premises, "negative");
          } else {
            star_.emplace(atom_key(d.conclusion), d.conclusion);
            log("negative", rule.name, "add " + brief(d.conclusion));
          }
          out_.derived_by[signed_key(d.conclusion)] = d;
          changed = true;
        }
      }
    }
  }

  std::vector<Derivation> positive_pass() {
    std::map<std::string, Derivation> queries;
    for (const auto& rule : rule_catalog()) {
      if (rule.derives_negative()) continue;
      for (const auto& d : apply_rule(rule, snapshot())) {
        if (!premises_present(d)) continue;
        if (present(d.conclusion)) continue;
        if (present(d.conclusion.negated())) {
          const Relation& victim = retraction_choice(d.premises);
          std::vector<Relation> reasons;
          for (const auto& p : d.premises)
            if (atom_key(p) != atom_key(victim)) reasons.push_back(p);
          reasons.push_back(d.conclusion.negated());
          flip(star_.at(atom_key(victim)), rule.name, reasons, "positive");
          continue;
        }
        const std::string key = atom_key(d.conclusion);
        if (asked_.count(key) || queries.count(key)) continue;
        queries.emplace(key, d);
        log("positive", rule.name, "query " + brief(d.conclusion));
      }
    }
    std::vector<Derivation> out;
    for (auto& [k, d] : queries) out.push_back(std::move(d));
    return out;
  }

  bool premises_present(const Derivation& d) const {
    return std::all_of(d.premises.begin(), d.premises.end(), [&](const Relation& p) { return present(p); });
  }

  // Lowest provenance first, then the lexicographically smallest key.
  const Relation& retraction_choice(const std::vector<Relation>& premises) const {
    const Relation* best = nullptr;
    for (const auto& p : premises) {
      const Relation& cur = star_.at(atom_key(p));
      if (!best) {
        best = &cur;
        continue;
      }
      const int rc = provenance_rank(cur.provenance), rb = provenance_rank(best->provenance);
      if (rc < rb || (rc == rb && signed_key(cur) < signed_key(*best))) best = &cur;
    }
    return *best;
  }

  FollowupOracle oracle_;
  std::map<std::string, Relation> star_;  // atom key -> relation in Rel*
  std::set<std::string> original_;        // signed keys of the input
  std::set<std::string> asked_;
  std::map<std::string, Derivation> pending_;
  std::vector<Relation> passthrough_;
  FilterOutcome out_;
};

}  // namespace detail

/// Filters a candidate relation set down to a consistent subset of itself.
/// Relations between events and measures have no rules and pass through unchanged.
inline FilterOutcome check_consistency(const std::vector<Relation>& rel, FollowupOracle oracle) {
  return detail::Filter(rel, std::move(oracle)).run();
}

struct ExplanationStep {
  std::string rule;
  std::vector<Relation> premises;
  Relation conclusion;
};

/// Derivation chain ending at the flip of `rel`: premises that were themselves derived
/// are explained first (depth-first, each at most once).
inline std::vector<ExplanationStep> explain_flip(const FilterOutcome& outcome, const Relation& rel) {
  const std::string key = atom_key(canonical(rel));
  const Flip* flip = nullptr;
  for (const auto& f : outcome.flipped)
    if (atom_key(f.original) == key) flip = &f;
  if (!flip) throw std::invalid_argument("relation " + brief(rel) + " was not flipped");

  std::vector<ExplanationStep> steps;
  std::set<std::string> seen;
  std::function<void(const Relation&)> visit = [&](const Relation& r) {
    const std::string k = signed_key(r);
    if (!seen.insert(k).second) return;
    auto it = outcome.derived_by.find(k);
    if (it == outcome.derived_by.end()) return;
    for (const auto& p : it->second.premises) visit(p);
    steps.push_back(ExplanationStep{it->second.rule, it->second.premises, it->second.conclusion});
  };
  for (const auto& p : flip->premises) visit(p);
  steps.push_back(ExplanationStep{flip->rule, flip->premises, flip->original.negated()});
  return steps;
}

inline std::string render(const ExplanationStep& s) {
  std::string out = s.rule + ": ";
  for (std::size_t i = 0; i < s.premises.size(); ++i) out += (i ? ", " : "") + brief(s.premises[i]);
  return out + " => " + brief(s.conclusion);
}

}  // namespace sleec
