#pragma once

// Well-formedness checks as bounded satisfiability queries, and the staged analysis plan.

#include "sleec/normalize.hpp"
#include "sleec/solver.hpp"
#include "sleec/text.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sleec {

enum class WfiKind { vacuous_conflict, situational_conflict, redundancy, insufficiency, over_restrictiveness };

inline std::string_view wfi_kind_name(WfiKind k) {
  switch (k) {
    case WfiKind::vacuous_conflict: return "vacuousConflict";
    case WfiKind::situational_conflict: return "situationalConflict";
    case WfiKind::redundancy: return "redundancy";
    case WfiKind::insufficiency: return "insufficiency";
    case WfiKind::over_restrictiveness: return "overRestrictiveness";
  }
  return "?";
}

inline std::optional<WfiKind> wfi_kind_from_cli(std::string_view s) {
  if (s == "vacuous") return WfiKind::vacuous_conflict;
  if (s == "situational") return WfiKind::situational_conflict;
  if (s == "redundancy") return WfiKind::redundancy;
  if (s == "insufficiency") return WfiKind::insufficiency;
  if (s == "restrictiveness") return WfiKind::over_restrictiveness;
  return std::nullopt;
}

/// Stage of the analysis plan a kind belongs to (1-based).
inline int stage_of(WfiKind k) {
  switch (k) {
    case WfiKind::vacuous_conflict: return 1;
    case WfiKind::situational_conflict: return 2;
    case WfiKind::insufficiency:
    case WfiKind::over_restrictiveness: return 3;
    case WfiKind::redundancy: return 4;
  }
  return 0;
}

enum class WfiVerdict { issue_found, clean, clean_up_to_bound, unknown };

inline std::string_view wfi_verdict_name(WfiVerdict v) {
  switch (v) {
    case WfiVerdict::issue_found: return "issueFound";
    case WfiVerdict::clean: return "clean";
    case WfiVerdict::clean_up_to_bound: return "cleanUpToBound";
    case WfiVerdict::unknown: return "unknown";
  }
  return "?";
}

class WfiError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct CoreEntry {
  std::string id;
  std::string text;
  std::optional<SourceSpan> span;
};

struct Diagnosis {
  WfiKind kind = WfiKind::vacuous_conflict;
  std::string subject;  // rule or fact id
  int stage = 1;
  WfiVerdict verdict = WfiVerdict::unknown;
  std::optional<Trace> witness;
  std::vector<CoreEntry> core;
  bool core_minimal = true;
  std::optional<SourceSpan> subject_span;
  std::string narrative;
  std::string budget_report;
  std::size_t max_states = 0;
  Seconds horizon = 0;
};

/// Everything a query needs: the document, the relations in force and the bound.
struct WfiContext {
  const NormalizedDocument& doc;
  std::vector<Relation> relations;
  Bound bound;
  Budget budget;
};

/// `exists trigger while not (chain)`: some trigger point whose chain is violated.
inline Fact negate_rule(const NormRule& r) {
  Fact f;
  f.id = "not_" + r.id;
  f.trigger_event = r.trigger_event;
  f.trigger_cond = r.trigger_cond;
  f.chain = r.chain;
  f.mode = FactMode::negated;
  f.role = FactRole::rule_negation;
  f.span = r.span;
  return f;
}

namespace detail {

inline std::string join_ids(const std::vector<CoreEntry>& core) {
  std::string s;
  for (const auto& c : core) s += (s.empty() ? "" : ", ") + c.id;
  return s.empty() ? "(no rule or relation)" : s;
}

inline std::vector<CoreEntry> core_entries(const WfiContext& ctx, const std::vector<std::string>& ids) {
  std::vector<CoreEntry> out;
  const Signature* sig = &ctx.doc.signature;
  for (const auto& id : ids) {
    if (const NormRule* r = ctx.doc.find_rule(id)) {
      out.push_back({id, render(*r, sig), r->span});
      continue;
    }
    for (const auto& rel : ctx.relations)
      if (constraint_id(rel) == id) out.push_back({id, render(rel, sig), rel.span});
  }
  return out;
}

inline Diagnosis start(const WfiContext& ctx, WfiKind kind, std::string subject, const EncodingProblem& p) {
  Diagnosis d;
  d.kind = kind;
  d.subject = std::move(subject);
  d.stage = stage_of(kind);
  d.max_states = p.max_states;
  d.horizon = p.horizon;
  if (const NormRule* r = ctx.doc.find_rule(d.subject)) d.subject_span = r->span;
  for (const auto& f : ctx.doc.facts)
    if (f.id == d.subject) d.subject_span = f.span;
  return d;
}

inline std::string bound_text(const EncodingProblem& p) {
  return "up to " + std::to_string(p.max_states) + " states and horizon " + std::to_string(p.horizon) + " s";
}

inline void set_core(Diagnosis& d, const WfiContext& ctx, const EncodingProblem& p, const SolveResult& r) {
  CoreResult c = minimize_core(p, r.core, ctx.budget);
  d.core = core_entries(ctx, c.core);
  d.core_minimal = c.minimal;
}

inline const NormRule& rule_or_throw(const WfiContext& ctx, const std::string& id) {
  const NormRule* r = ctx.doc.find_rule(id);
  if (!r) throw WfiError("no rule '" + id + "' in the document");
  return *r;
}

inline const Fact& fact_or_throw(const WfiContext& ctx, const std::string& id, FactRole role) {
  for (const auto& f : ctx.doc.facts)
    if (f.id == id) {
      if (f.role != role) throw WfiError("'" + id + "' is not a " + (role == FactRole::concern ? "concern" : "purpose"));
      return f;
    }
  throw WfiError("no fact '" + id + "' in the document");
}

inline bool unknown(Diagnosis& d, const SolveResult& r) {
  if (r.verdict != Verdict::unknown) return false;
  d.verdict = WfiVerdict::unknown;
  d.budget_report = r.budget_report;
  d.narrative = "Solver budget exhausted: " + r.budget_report + ".";
  return true;
}

}  // namespace detail

inline Diagnosis check_vacuous_conflict(const WfiContext& ctx, const std::string& rule_id) {
  const NormRule& r = detail::rule_or_throw(ctx, rule_id);
  Fact trigger;
  trigger.id = "trigger_" + r.id;
  trigger.trigger_event = r.trigger_event;
  trigger.trigger_cond = r.trigger_cond;
  EncodingProblem p = encode(ctx.doc.signature, ctx.doc.rules, ctx.relations, {trigger}, ctx.bound);
  Diagnosis d = detail::start(ctx, WfiKind::vacuous_conflict, r.id, p);
  SolveResult res = solve(p, ctx.budget);
  if (detail::unknown(d, res)) return d;
  if (res.verdict == Verdict::unsat) {
    d.verdict = WfiVerdict::issue_found;
    detail::set_core(d, ctx, p, res);
    d.narrative = "No trace (" + detail::bound_text(p) + ") triggers " + r.id +
                  " while respecting all rules and relations. Conflicting set: " + detail::join_ids(d.core) + ".";
  } else {
    d.verdict = WfiVerdict::clean_up_to_bound;
    d.witness = res.witness;
    d.narrative = r.id + " can be triggered without conflict (" + detail::bound_text(p) + ").";
  }
  return d;
}

inline Diagnosis check_situational_conflict(const WfiContext& ctx, const std::string& rule_id) {
  const NormRule& r = detail::rule_or_throw(ctx, rule_id);
  EncodingProblem p = encode(ctx.doc.signature, ctx.doc.rules, ctx.relations, {}, ctx.bound);
  Diagnosis d = detail::start(ctx, WfiKind::situational_conflict, r.id, p);
  SolveResult res = solve_situational(p, r.id, ctx.budget);
  if (detail::unknown(d, res)) return d;
  if (res.verdict == Verdict::sat) {
    d.verdict = WfiVerdict::issue_found;
    d.witness = res.witness;
    d.narrative = "After the witness history, which ends by triggering " + r.id +
                  ", no continuation respects all rules and relations (" + detail::bound_text(p) + ").";
  } else {
    d.verdict = WfiVerdict::clean_up_to_bound;
    d.narrative = "No history triggering " + r.id + " is a dead end (" + detail::bound_text(p) + ").";
  }
  return d;
}

inline Diagnosis check_redundancy(const WfiContext& ctx, const std::string& rule_id) {
  const NormRule& r = detail::rule_or_throw(ctx, rule_id);
  std::vector<NormRule> others;
  for (const auto& o : ctx.doc.rules)
    if (o.id != r.id) others.push_back(o);
  EncodingProblem p = encode(ctx.doc.signature, others, ctx.relations, {negate_rule(r)}, ctx.bound);
  Diagnosis d = detail::start(ctx, WfiKind::redundancy, r.id, p);
  SolveResult res = solve(p, ctx.budget);
  if (detail::unknown(d, res)) return d;
  if (res.verdict == Verdict::unsat) {
    d.verdict = WfiVerdict::issue_found;
    detail::set_core(d, ctx, p, res);
    d.narrative = r.id + " is implied by " + detail::join_ids(d.core) + " (" + detail::bound_text(p) + ").";
  } else {
    d.verdict = WfiVerdict::clean_up_to_bound;
    d.witness = res.witness;
    d.narrative = "The witness breaks " + r.id + " while respecting the other rules and relations.";
  }
  return d;
}

inline Diagnosis check_insufficiency(const WfiContext& ctx, const std::string& fact_id) {
  const Fact& f = detail::fact_or_throw(ctx, fact_id, FactRole::concern);
  EncodingProblem p = encode(ctx.doc.signature, ctx.doc.rules, ctx.relations, {f}, ctx.bound);
  Diagnosis d = detail::start(ctx, WfiKind::insufficiency, f.id, p);
  SolveResult res = solve(p, ctx.budget);
  if (detail::unknown(d, res)) return d;
  if (res.verdict == Verdict::sat) {
    d.verdict = WfiVerdict::issue_found;
    d.witness = res.witness;
    d.narrative = "Concern " + f.id + " is realizable while respecting all rules and relations (see witness).";
  } else {
    d.verdict = WfiVerdict::clean_up_to_bound;
    detail::set_core(d, ctx, p, res);
    d.narrative = "Concern " + f.id + " is blocked by " + detail::join_ids(d.core) + " (" + detail::bound_text(p) + ").";
  }
  return d;
}

inline Diagnosis check_over_restrictiveness(const WfiContext& ctx, const std::string& fact_id) {
  const Fact& f = detail::fact_or_throw(ctx, fact_id, FactRole::purpose);
  EncodingProblem p = encode(ctx.doc.signature, ctx.doc.rules, ctx.relations, {f}, ctx.bound);
  Diagnosis d = detail::start(ctx, WfiKind::over_restrictiveness, f.id, p);
  SolveResult res = solve(p, ctx.budget);
  if (detail::unknown(d, res)) return d;
  if (res.verdict == Verdict::unsat) {
    d.verdict = WfiVerdict::issue_found;
    detail::set_core(d, ctx, p, res);
    d.narrative = "Purpose " + f.id + " cannot be realized (" + detail::bound_text(p) + "). Blocking set: " +
                  detail::join_ids(d.core) + ".";
  } else {
    d.verdict = WfiVerdict::clean;
    d.witness = res.witness;
    d.narrative = "Purpose " + f.id + " is realizable (see witness).";
  }
  return d;
}

inline Diagnosis check(const WfiContext& ctx, WfiKind kind, const std::string& subject) {
  switch (kind) {
    case WfiKind::vacuous_conflict: return check_vacuous_conflict(ctx, subject);
    case WfiKind::situational_conflict: return check_situational_conflict(ctx, subject);
    case WfiKind::redundancy: return check_redundancy(ctx, subject);
    case WfiKind::insufficiency: return check_insufficiency(ctx, subject);
    case WfiKind::over_restrictiveness: return check_over_restrictiveness(ctx, subject);
  }
  throw WfiError("unknown check");
}

/// All checks of one stage. `skip` lists rules left out of the situational stage.
inline std::vector<Diagnosis> run_stage(const WfiContext& ctx, int stage, const std::set<std::string>& skip = {}) {
  std::vector<Diagnosis> out;
  switch (stage) {
    case 1:
      for (const auto& r : ctx.doc.rules) out.push_back(check_vacuous_conflict(ctx, r.id));
      break;
    case 2:
      for (const auto& r : ctx.doc.rules)
        if (!skip.count(r.id)) out.push_back(check_situational_conflict(ctx, r.id));
      break;
    case 3:
      for (const auto& f : ctx.doc.facts) {
        if (f.role == FactRole::concern) out.push_back(check_insufficiency(ctx, f.id));
        if (f.role == FactRole::purpose) out.push_back(check_over_restrictiveness(ctx, f.id));
      }
      break;
    case 4:
      for (const auto& r : ctx.doc.rules) out.push_back(check_redundancy(ctx, r.id));
      break;
    default: throw WfiError("stage must be 1..4");
  }
  return out;
}

inline bool has_issue(const std::vector<Diagnosis>& ds) {
  for (const auto& d : ds)
    if (d.verdict == WfiVerdict::issue_found) return true;
  return false;
}

struct PlanResult {
  std::vector<Diagnosis> diagnoses;
  int stages_run = 0;
  std::optional<int> blocked_after;  // stage whose issues withheld the later stages
};

/// Runs the stages in order. A stage with issues withholds the later ones unless `force`.
/// Forced situational checks skip rules already found vacuously conflicting.
inline PlanResult run_plan(const WfiContext& ctx, bool force = false, int last_stage = 4) {
  PlanResult out;
  std::set<std::string> vacuous;
  for (int stage = 1; stage <= last_stage; ++stage) {
    std::vector<Diagnosis> ds = run_stage(ctx, stage, vacuous);
    if (stage == 1)
      for (const auto& d : ds)
        if (d.verdict == WfiVerdict::issue_found) vacuous.insert(d.subject);
    const bool issues = has_issue(ds);
    for (auto& d : ds) out.diagnoses.push_back(std::move(d));
    out.stages_run = stage;
    if (issues && !force && stage < last_stage) {
      out.blocked_after = stage;
      break;
    }
  }
  return out;
}

// ---- JSON export ----

inline nlohmann::json to_json(const Trace& tr) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : tr.states()) {
    nlohmann::json row;
    row["time"] = s.time;
    row["events"] = std::vector<std::string>(s.events.begin(), s.events.end());
    row["measures"] = s.valuation;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Trace trace_from_json(const nlohmann::json& j) {
  std::vector<State> states;
  for (const auto& row : j) {
    State s;
    s.time = row.at("time").get<Seconds>();
    for (const auto& e : row.at("events")) s.events.insert(e.get<std::string>());
    s.valuation = row.at("measures").get<std::map<std::string, Value>>();
    states.push_back(std::move(s));
  }
  return Trace(std::move(states));
}

inline nlohmann::json span_json(const std::optional<SourceSpan>& s) {
  if (!s) return nullptr;
  return {{"begin", s->begin}, {"end", s->end}};
}

inline nlohmann::json to_json(const Diagnosis& d) {
  nlohmann::json j;
  j["kind"] = wfi_kind_name(d.kind);
  j["subject"] = d.subject;
  j["stage"] = d.stage;
  j["verdict"] = wfi_verdict_name(d.verdict);
  j["subjectSpan"] = span_json(d.subject_span);
  j["witness"] = d.witness ? to_json(*d.witness) : nlohmann::json(nullptr);
  nlohmann::json core = nlohmann::json::array();
  for (const auto& c : d.core) core.push_back({{"id", c.id}, {"text", c.text}, {"span", span_json(c.span)}});
  j["core"] = core;
  j["coreMinimal"] = d.core_minimal;
  j["narrative"] = d.narrative;
  j["bound"] = {{"states", d.max_states}, {"horizon", d.horizon}};
  if (!d.budget_report.empty()) j["budget"] = d.budget_report;
  return j;
}

/// Human-readable report line block for one diagnosis.
inline std::string render(const Diagnosis& d) {
  std::string s = "[stage " + std::to_string(d.stage) + "] " + std::string(wfi_kind_name(d.kind)) + " " + d.subject +
                  ": " + std::string(wfi_verdict_name(d.verdict)) + "\n  " + d.narrative + "\n";
  for (const auto& c : d.core) s += "  core " + c.id + ": " + c.text + "\n";
  if (d.witness) {
    s += "  witness:\n";
    for (const auto& st : d.witness->states()) {
      s += "    t=" + std::to_string(st.time) + " {";
      bool first = true;
      for (const auto& e : st.events) {
        s += (first ? "" : ", ") + e;
        first = false;
      }
      s += "}";
      for (const auto& [m, v] : st.valuation) s += " " + m + "=" + std::to_string(v);
      s += "\n";
    }
  }
  return s;
}

}  // namespace sleec
