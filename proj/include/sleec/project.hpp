#pragma once

// Review project: document, candidate relations with stakeholder verdicts, analysis history.
// Persisted as one pretty-printed JSON file, replaced atomically on every save.

#include "sleec/normalize.hpp"
#include "sleec/parser.hpp"
#include "sleec/sanitize.hpp"
#include "sleec/solver.hpp"
#include "sleec/wfi.hpp"

#include "json.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sleec {

class ProjectError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class RelationOrigin { candidate, stakeholder };

struct ProjectRelation {
  std::string id;
  std::string text;  // keyword syntax, parses against the document signature
  RelationOrigin origin = RelationOrigin::candidate;
  bool filtered = true;  // survived the consistency filter (always true for stakeholder-added)
  std::string justification;
  std::string verdict = "pending";  // pending | accept | reject
  std::string note;
};

struct HistoryEntry {
  int stage = 1;
  std::uint64_t revision = 0;
  std::string timestamp;
  nlohmann::json diagnoses = nlohmann::json::array();
};

struct ProjectState {
  std::string document_path;
  std::string document_text;
  std::uint64_t revision = 0;  // bumped by every change that can alter an analysis
  std::vector<ProjectRelation> relations;
  std::vector<HistoryEntry> history;
  Bound bound;

  ProjectRelation* find(const std::string& id) {
    for (auto& r : relations)
      if (r.id == id) return &r;
    return nullptr;
  }

  NormalizedDocument document() const { return load_document(document_text); }

  /// Document relations plus every accepted project relation.
  std::vector<Relation> relations_in_force(const NormalizedDocument& doc) const {
    std::vector<Relation> out = doc.relations;
    for (const auto& r : relations)
      if (r.verdict == "accept") out.push_back(parse_relation(r.text, doc.signature));
    return out;
  }
};

inline std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// ---- JSON ----

inline nlohmann::json to_json(const ProjectRelation& r) {
  return {{"id", r.id},
          {"relation", r.text},
          {"origin", r.origin == RelationOrigin::candidate ? "candidate" : "stakeholder"},
          {"filtered", r.filtered},
          {"justification", r.justification},
          {"verdict", r.verdict},
          {"note", r.note}};
}

inline nlohmann::json to_json(const ProjectState& p) {
  nlohmann::json j;
  j["document"] = {{"path", p.document_path}, {"text", p.document_text}};
  try {
    j["document"]["normalized"] = render(p.document());
  } catch (const std::exception& e) {
    j["document"]["error"] = e.what();
  }
  j["revision"] = p.revision;
  j["relations"] = nlohmann::json::array();
  for (const auto& r : p.relations) j["relations"].push_back(to_json(r));
  j["history"] = nlohmann::json::array();
  for (const auto& h : p.history)
    j["history"].push_back({{"stage", h.stage}, {"revision", h.revision}, {"timestamp", h.timestamp}, {"diagnoses", h.diagnoses}});
  j["bound"] = {{"states", p.bound.max_states}, {"horizon", p.bound.horizon}};
  return j;
}

inline ProjectState project_from_json(const nlohmann::json& j) {
  ProjectState p;
  try {
    p.document_path = j.at("document").at("path").get<std::string>();
    p.document_text = j.at("document").at("text").get<std::string>();
    p.revision = j.at("revision").get<std::uint64_t>();
    for (const auto& r : j.at("relations")) {
      ProjectRelation pr;
      pr.id = r.at("id").get<std::string>();
      pr.text = r.at("relation").get<std::string>();
      pr.origin = r.at("origin").get<std::string>() == "stakeholder" ? RelationOrigin::stakeholder : RelationOrigin::candidate;
      pr.filtered = r.at("filtered").get<bool>();
      pr.justification = r.value("justification", "");
      pr.verdict = r.at("verdict").get<std::string>();
      pr.note = r.value("note", "");
      p.relations.push_back(std::move(pr));
    }
    for (const auto& h : j.at("history"))
      p.history.push_back({h.at("stage").get<int>(), h.at("revision").get<std::uint64_t>(),
                           h.at("timestamp").get<std::string>(), h.at("diagnoses")});
    p.bound.max_states = j.at("bound").at("states").get<std::size_t>();
    p.bound.horizon = j.at("bound").at("horizon").get<Seconds>();
  } catch (const nlohmann::json::exception& e) {
    throw ProjectError(std::string("corrupt project file: ") + e.what());
  }
  return p;
}

inline std::string serialize(const ProjectState& p) { return to_json(p).dump(2) + "\n"; }

inline ProjectState load_project(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProjectError("cannot open project '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j = nlohmann::json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw ProjectError("corrupt project file '" + path + "': not JSON");
  return project_from_json(j);
}

/// Write to a sibling temp file, then rename over the target.
inline void save_project(const ProjectState& p, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ProjectError("cannot write '" + tmp + "'");
    out << serialize(p);
    if (!out.flush()) throw ProjectError("short write to '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ProjectError("cannot replace '" + path + "': " + ec.message());
}

// ---- transitions ----

inline ProjectState new_project(const std::string& document_path, const std::string& text) {
  load_document(text);  // reject unparsable documents up front
  ProjectState p;
  p.document_path = document_path;
  p.document_text = text;
  return p;
}

/// Replaces the candidate list with the positive relations of a sanitize outcome.
/// Stakeholder-added relations and verdicts on relations that survive are kept.
inline void set_candidates(ProjectState& p, const SanitizeReport& rep, const Signature& sig) {
  std::map<std::string, ProjectRelation> old;
  for (const auto& r : p.relations)
    if (r.origin == RelationOrigin::candidate) old[r.text] = r;
  std::vector<ProjectRelation> next;
  auto add = [&](const Relation& r, bool filtered) {
    ProjectRelation pr;
    pr.text = render(r, &sig);
    pr.filtered = filtered;
    auto jt = rep.justification.find(signed_key(canonical(r)));
    if (jt != rep.justification.end()) pr.justification = jt->second;
    auto it = old.find(pr.text);
    if (it != old.end() && (filtered || it->second.verdict != "accept")) {
      pr.verdict = it->second.verdict;
      pr.note = it->second.note;
    }
    next.push_back(std::move(pr));
  };
  for (const auto& r : rep.filter.accepted)
    if (r.positive()) add(r, true);
  for (const auto& f : rep.filter.flipped) add(f.original, false);
  std::size_t n = 0;
  for (auto& r : next) r.id = "c" + std::to_string(++n);
  for (const auto& r : p.relations)
    if (r.origin == RelationOrigin::stakeholder) next.push_back(r);
  p.relations = std::move(next);
  ++p.revision;
}

inline void set_verdict(ProjectState& p, const std::string& id, const std::string& verdict, const std::string& note) {
  ProjectRelation* r = p.find(id);
  if (!r) throw ProjectError("no relation '" + id + "'");
  if (verdict != "accept" && verdict != "reject" && verdict != "pending")
    throw ProjectError("verdict must be accept, reject or pending");
  if (verdict == "accept" && !r->filtered)
    throw ProjectError("relation '" + id + "' was removed by the consistency filter and cannot be accepted");
  r->verdict = verdict;
  r->note = note;
  ++p.revision;
}

/// Stakeholder-added relations are accepted on entry.
inline const ProjectRelation& add_relation(ProjectState& p, const std::string& text, const std::string& note) {
  NormalizedDocument doc = p.document();
  Relation rel = parse_relation(text, doc.signature);
  ProjectRelation pr;
  pr.text = render(rel, &doc.signature);
  for (const auto& r : p.relations)
    if (r.text == pr.text) throw ProjectError("relation already present as '" + r.id + "'");
  std::size_t n = 0;
  for (const auto& r : p.relations)
    if (r.origin == RelationOrigin::stakeholder) ++n;
  pr.id = "s" + std::to_string(n + 1);
  pr.origin = RelationOrigin::stakeholder;
  pr.verdict = "accept";
  pr.note = note;
  p.relations.push_back(std::move(pr));
  ++p.revision;
  return p.relations.back();
}

inline void replace_document(ProjectState& p, const std::string& text) {
  load_document(text);
  p.document_text = text;
  ++p.revision;
}

/// Latest analysis of `stage` at the current revision, if any.
inline const HistoryEntry* latest(const ProjectState& p, int stage) {
  for (auto it = p.history.rbegin(); it != p.history.rend(); ++it)
    if (it->stage == stage && it->revision == p.revision) return &*it;
  return nullptr;
}

inline bool entry_has_issue(const HistoryEntry& h) {
  for (const auto& d : h.diagnoses)
    if (d.value("verdict", "") == wfi_verdict_name(WfiVerdict::issue_found)) return true;
  return false;
}

/// Empty when `stage` may run now, otherwise the reason it may not.
inline std::string gate_refusal(const ProjectState& p, int stage) {
  static const char* names[] = {"", "vacuous conflicts", "situational conflicts",
                                "insufficiency and over-restrictiveness", "redundancy"};
  if (stage < 1 || stage > 4) return "stage must be 1, 2, 3 or 4";
  for (int s = 1; s < stage; ++s) {
    const HistoryEntry* h = latest(p, s);
    if (!h)
      return std::string("stage ") + std::to_string(s) + " (" + names[s] + ") has not been analysed for the current revision; " +
             "stages run in order";
    if (entry_has_issue(*h))
      return std::string("stage ") + std::to_string(s) + " (" + names[s] + ") has unresolved issues; " + names[s] +
             " must be resolved before stage " + std::to_string(stage);
  }
  return "";
}

/// Runs one stage against a snapshot. The gate is the caller's business.
inline HistoryEntry analyze(const ProjectState& p, int stage, const Budget& budget = {}) {
  NormalizedDocument doc = p.document();
  WfiContext ctx{doc, p.relations_in_force(doc), p.bound, budget};
  HistoryEntry e;
  e.stage = stage;
  e.revision = p.revision;
  e.timestamp = utc_now();
  for (const auto& d : run_stage(ctx, stage)) e.diagnoses.push_back(to_json(d));
  return e;
}

}  // namespace sleec
