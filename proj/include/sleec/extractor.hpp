#pragma once

// Candidate relation extraction through a language-model provider: prompt construction,
// verdict-record parsing, providers (stub, scripted, replay, recording) and follow-ups.

#include "sleec/inference.hpp"
#include "sleec/model.hpp"
#include "sleec/text.hpp"

#include "json.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sleec {

class ProviderError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ExtractError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The one operation every model client offers.
class Provider {
public:
  virtual ~Provider() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

inline std::string sha256_hex(const std::string& text) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

// ---- prompts ----

/// The eight relation kinds proposed by the model.
inline const std::vector<RelationKind>& extracted_kinds() {
  static const std::vector<RelationKind> kinds{
      RelationKind::hypernym,     RelationKind::contradictory,      RelationKind::happens_before,
      RelationKind::event_equal,  RelationKind::imply,              RelationKind::mutually_exclusive,
      RelationKind::opposite,     RelationKind::measure_equal};
  return kinds;
}

inline bool symmetric_for_queries(RelationKind k) {
  return k == RelationKind::contradictory || k == RelationKind::event_equal || k == RelationKind::mutually_exclusive ||
         k == RelationKind::opposite || k == RelationKind::measure_equal;
}

struct PromptBundle {
  RelationKind kind = RelationKind::hypernym;
  std::string grammar_excerpt;
  std::string symbol_listing;
  std::string definition;
  std::string illustration;
  std::string output_schema;
  std::vector<std::pair<std::string, std::string>> pairs;

  std::string text() const;
};

namespace detail {

inline const char* kGrammar =
    "rule     := 'when' event ['and' prop] 'then' response\n"
    "response := oblig ['otherwise' response]\n"
    "oblig    := ['not'] event ['within' duration] | 'if' prop 'then' oblig\n"
    "prop     := measure | 'not' prop | prop 'and' prop | prop 'or' prop | term ('=' | '>=') term\n"
    "fact     := 'exists' event ['and' prop] ['while' ['not'] '(' response ')']\n"
    "Events are capitalised (MeetingUser); measures are lower case (patientStressed).";

inline const char* kSchema =
    "Answer with one JSON object per listed pair, fields in exactly this order:\n"
    "{\"kind\": \"<relation kind>\", \"source\": \"<first symbol>\", \"target\": \"<second symbol>\",\n"
    " \"justification\": \"<your reasoning, written before the verdict>\", \"verdict\": \"positive\" | \"negative\"}\n"
    "Put all objects in one JSON array. Text outside the array is ignored.";

struct KindText {
  const char* definition;
  const char* illustration;
};

inline KindText kind_text(RelationKind k) {
  switch (k) {
    case RelationKind::hypernym:
      return {"hypernym(X, Y): every occurrence of X is at the same time an occurrence of Y; X is a special case of Y.",
              "hypernym(SendEmail, NotifyUser): sending an email to the user is one way of notifying them."};
    case RelationKind::contradictory:
      return {"isContradictoryWith(X, Y): X and Y can never occur at the same time point.",
              "isContradictoryWith(TurnOnLight, TurnOffLight): the light cannot be switched on and off at once."};
    case RelationKind::happens_before:
      return {"happensBefore(X, Y): whenever Y occurs, X must already have occurred at some strictly earlier "
              "time point. Ask yourself: before any occurrence of Y, has there necessarily been an occurrence of X?",
              "happensBefore(CreateForm, ShowForm): a form can only be shown once it has been created."};
    case RelationKind::event_equal:
      return {"eventEqual(X, Y): X and Y always occur together; they name the same happening.",
              "eventEqual(GreetUser, SayHello): greeting the user and saying hello are the same event."};
    case RelationKind::imply:
      return {"imply(p, q): at every time point where p holds, q holds as well.",
              "imply(userAsleep, userInBed): a sleeping user is in bed."};
    case RelationKind::mutually_exclusive:
      return {"mutuallyExclusive(p, q): p and q never hold at the same time point.",
              "mutuallyExclusive(doorOpen, doorLocked): an open door is not locked."};
    case RelationKind::opposite:
      return {"opposite(p, q): at every time point exactly one of p and q holds.",
              "opposite(lightOn, lightOff): the light is either on or off."};
    case RelationKind::measure_equal:
      return {"measureEqual(p, q): p holds exactly when q holds.",
              "measureEqual(userPresent, userInRoom): the user is present exactly when in the room."};
    default: return {"", ""};
  }
}

inline std::string symbol_listing(const Signature& sig) {
  std::string s = "Events:";
  bool first = true;
  for (const auto& e : sig.events) {
    s += (first ? " " : ", ") + e;
    first = false;
  }
  if (first) s += " (none)";
  s += "\nMeasures:";
  first = true;
  for (const auto& [m, sort] : sig.measures) {
    s += (first ? " " : ", ") + m + (sort == MeasureSort::boolean ? " (boolean)" : " (numeric)");
    first = false;
  }
  if (first) s += " (none)";
  return s;
}

inline std::string prompt_text(const PromptBundle& b, const std::string& task) {
  std::string s = "You are reviewing normative requirements written in SLEEC.\n" + task + "\n\n## Grammar\n" +
                  b.grammar_excerpt + "\n\n## Symbols\n" + b.symbol_listing + "\n\n## Relation\nRelation kind: " +
                  std::string(kind_name(b.kind)) + "\nDefinition: " + b.definition + "\nIllustration: " +
                  b.illustration + "\n\n## Pairs\n";
  for (const auto& [a, c] : b.pairs) s += "- " + a + ", " + c + "\n";
  if (b.pairs.empty()) s += "(none)\n";
  s += "\n## Output\n" + b.output_schema + "\n";
  return s;
}

}  // namespace detail

inline std::string PromptBundle::text() const {
  return detail::prompt_text(*this, "For each pair below, decide whether the relation holds in the domain.");
}

/// One bundle per extracted kind, symbols in lexicographic order. Asymmetric kinds list both
/// orientations of every pair; symmetric kinds list each unordered pair once.
/// Measure kinds range over boolean measures.
inline std::vector<PromptBundle> build_prompts(const Signature& sig) {
  if (sig.events.empty() && sig.measures.empty()) throw ExtractError("empty signature: nothing to ask about");
  std::vector<std::string> events(sig.events.begin(), sig.events.end());
  std::vector<std::string> bools;
  for (const auto& [m, sort] : sig.measures)
    if (sort == MeasureSort::boolean) bools.push_back(m);
  std::vector<PromptBundle> out;
  for (RelationKind k : extracted_kinds()) {
    PromptBundle b;
    b.kind = k;
    b.grammar_excerpt = detail::kGrammar;
    b.symbol_listing = detail::symbol_listing(sig);
    auto t = detail::kind_text(k);
    b.definition = t.definition;
    b.illustration = t.illustration;
    b.output_schema = detail::kSchema;
    const auto& syms = is_event_kind(k) ? events : bools;
    for (const auto& a : syms)
      for (const auto& c : syms) {
        if (a == c) continue;
        if (symmetric_for_queries(k) && c < a) continue;
        b.pairs.emplace_back(a, c);
      }
    out.push_back(std::move(b));
  }
  return out;
}

/// Operands of an extracted relation as plain symbol names.
inline std::pair<std::string, std::string> relation_symbols(const Relation& r) {
  auto sym = [](const Proposition& p) -> std::string {
    if (p.kind == Proposition::Kind::equal && p.terms.size() == 2 && p.terms[0].kind == Term::Kind::measure &&
        p.terms[1].is_constant() && p.terms[1].value == 1)
      return p.terms[0].measure;
    return render(p);
  };
  if (is_event_kind(r.kind)) return {r.event_a, r.event_b};
  return {sym(r.prop_a), sym(r.prop_b)};
}

/// Confirmation question for one derived relation.
inline std::string followup_prompt(const Relation& r, const Signature& sig) {
  PromptBundle b;
  b.kind = r.kind;
  b.grammar_excerpt = detail::kGrammar;
  b.symbol_listing = detail::symbol_listing(sig);
  auto t = detail::kind_text(r.kind);
  b.definition = t.definition;
  b.illustration = t.illustration;
  b.output_schema = detail::kSchema;
  b.pairs.push_back(relation_symbols(r));
  return detail::prompt_text(b, "Earlier answers imply the relation below. Confirm whether it really holds.");
}

// ---- verdict records ----

struct VerdictRecord {
  std::string kind;
  std::string source;
  std::string target;
  std::string verdict;
  std::string justification;
};

struct ParsedResponse {
  std::vector<VerdictRecord> records;
  std::vector<std::string> warnings;
};

namespace detail {

// Balanced top-level {...} substrings, honouring string literals.
inline std::vector<std::string> json_objects(const std::string& text) {
  std::vector<std::string> out;
  int depth = 0;
  bool in_str = false, esc = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_str) {
      if (esc) esc = false;
      else if (c == '\\') esc = true;
      else if (c == '"') in_str = false;
      continue;
    }
    if (c == '"' && depth > 0) in_str = true;
    else if (c == '{') {
      if (depth++ == 0) start = i;
    } else if (c == '}' && depth > 0) {
      if (--depth == 0) out.push_back(text.substr(start, i - start + 1));
    }
  }
  return out;
}

}  // namespace detail

/// Extracts verdict records from raw model output; prose around the JSON is ignored.
inline ParsedResponse parse_response(const std::string& raw) {
  ParsedResponse out;
  std::size_t n = 0;
  for (const auto& obj : detail::json_objects(raw)) {
    ++n;
    nlohmann::json j = nlohmann::json::parse(obj, nullptr, false);
    const std::string where = "record " + std::to_string(n);
    if (j.is_discarded() || !j.is_object()) {
      out.warnings.push_back(where + ": not valid JSON");
      continue;
    }
    auto str = [&](const char* key) -> std::optional<std::string> {
      if (!j.contains(key) || !j[key].is_string()) return std::nullopt;
      return j[key].get<std::string>();
    };
    VerdictRecord r;
    auto kind = str("kind"), source = str("source"), target = str("target"), verdict = str("verdict");
    if (!kind || !source || !target) {
      out.warnings.push_back(where + ": missing kind, source or target");
      continue;
    }
    if (!verdict) {
      out.warnings.push_back(where + ": missing verdict for " + *kind + "(" + *source + "," + *target + ")");
      continue;
    }
    if (*verdict != "positive" && *verdict != "negative") {
      out.warnings.push_back(where + ": verdict must be positive or negative, got '" + *verdict + "'");
      continue;
    }
    r.kind = *kind;
    r.source = *source;
    r.target = *target;
    r.verdict = *verdict;
    r.justification = str("justification").value_or("");
    if (r.verdict == "positive" && r.justification.empty()) {
      out.warnings.push_back(where + ": positive verdict without justification");
      continue;
    }
    const auto jpos = obj.find("\"justification\""), vpos = obj.find("\"verdict\"");
    if (jpos == std::string::npos || vpos < jpos) out.warnings.push_back(where + ": verdict given before justification");
    out.records.push_back(std::move(r));
  }
  return out;
}

/// Maps a record onto a signed relation (provenance llm). nullopt with a reason when it does not resolve.
inline std::optional<Relation> to_relation(const VerdictRecord& r, const Signature& sig, std::string* why = nullptr) {
  auto fail = [&](std::string m) -> std::optional<Relation> {
    if (why) *why = std::move(m);
    return std::nullopt;
  };
  std::optional<RelationKind> kind = kind_from_name(r.kind);
  const bool events = sig.has_event(r.source) && sig.has_event(r.target);
  const bool measures = sig.has_measure(r.source) && sig.has_measure(r.target);
  if (r.kind == "equal") kind = events ? RelationKind::event_equal : RelationKind::measure_equal;
  if (!kind || std::find(extracted_kinds().begin(), extracted_kinds().end(), *kind) == extracted_kinds().end())
    return fail("unknown relation kind '" + r.kind + "'");
  if (r.source == r.target) return fail("reflexive pair " + r.source);
  const Sign sign = r.verdict == "positive" ? Sign::positive : Sign::negative;
  if (is_event_kind(*kind)) {
    if (!events) return fail("'" + r.source + "' or '" + r.target + "' is not a declared event");
    return Relation::events(*kind, r.source, r.target, sign, Provenance::llm);
  }
  if (!measures || !sig.is_boolean(r.source) || !sig.is_boolean(r.target))
    return fail("'" + r.source + "' or '" + r.target + "' is not a declared boolean measure");
  return Relation::measures(*kind, Proposition::holds(r.source), Proposition::holds(r.target), sign, Provenance::llm);
}

// ---- providers ----

/// Answers through a plain function. Handy in tests.
class StubProvider : public Provider {
public:
  explicit StubProvider(std::function<std::string(const std::string&)> f) : f_(std::move(f)) {}
  std::string complete(const std::string& prompt) override { return f_(prompt); }

private:
  std::function<std::string(const std::string&)> f_;
};

/// Answers from a verdict table keyed by `kind(source,target)`; unlisted pairs are negative.
/// Symmetric kinds match either orientation.
/// Reads the pairs from the prompt itself, so it works for extraction and follow-ups alike.
class ScriptedProvider : public Provider {
public:
  using Table = std::map<std::string, std::string>;

  explicit ScriptedProvider(Table answers) : answers_(std::move(answers)) {}

  static ScriptedProvider from_json(const nlohmann::json& j) { return ScriptedProvider(j.get<Table>()); }

  std::string complete(const std::string& prompt) override {
    std::istringstream in(prompt);
    std::string line, kind;
    bool pairs = false;
    nlohmann::json arr = nlohmann::json::array();
    while (std::getline(in, line)) {
      if (line.rfind("Relation kind: ", 0) == 0) kind = line.substr(15);
      if (line.rfind("## ", 0) == 0) pairs = line == "## Pairs";
      if (!pairs || line.rfind("- ", 0) != 0) continue;
      const auto comma = line.find(", ");
      const std::string a = line.substr(2, comma - 2), b = line.substr(comma + 2);
      auto it = answers_.find(kind + "(" + a + "," + b + ")");
      auto k = kind_from_name(kind);
      if (it == answers_.end() && k && symmetric_for_queries(*k)) it = answers_.find(kind + "(" + b + "," + a + ")");
      const std::string v = it == answers_.end() ? "negative" : it->second;
      arr.push_back({{"kind", kind}, {"source", a}, {"target", b},
                     {"justification", "Scripted answer for " + kind + "(" + a + "," + b + ")."}, {"verdict", v}});
    }
    return "Here are my answers.\n" + arr.dump(2) + "\n";
  }

private:
  Table answers_;
};

struct ArchiveEntry {
  std::string hash;
  std::string prompt;
  std::string response;
  std::string timestamp;
};

inline std::vector<ArchiveEntry> read_archive(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProviderError("cannot open archive '" + path + "'");
  std::vector<ArchiveEntry> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ProviderError(path + ":" + std::to_string(n) + ": malformed archive entry");
    out.push_back({j.value("hash", ""), j.value("prompt", ""), j.value("response", ""), j.value("timestamp", "")});
  }
  return out;
}

/// Serves archived responses by request hash; never contacts a model.
class ReplayProvider : public Provider {
public:
  explicit ReplayProvider(const std::string& path) {
    for (auto& e : read_archive(path)) responses_[e.hash] = std::move(e.response);
  }

  std::string complete(const std::string& prompt) override {
    auto it = responses_.find(sha256_hex(prompt));
    if (it == responses_.end()) throw ProviderError("no archived response for request " + sha256_hex(prompt));
    return it->second;
  }

  std::size_t size() const { return responses_.size(); }

private:
  std::map<std::string, std::string> responses_;
};

/// Forwards to another provider and appends every exchange to an archive file.
class RecordingProvider : public Provider {
public:
  RecordingProvider(Provider& inner, std::string path) : inner_(inner), path_(std::move(path)) {}

  std::string complete(const std::string& prompt) override {
    std::string response = inner_.complete(prompt);
    nlohmann::json j{{"hash", sha256_hex(prompt)}, {"prompt", prompt}, {"response", response}, {"timestamp", now()}};
    std::lock_guard<std::mutex> lock(mu_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw ProviderError("cannot append to archive '" + path_ + "'");
    out << j.dump() << "\n";
    return response;
  }

private:
  static std::string now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
  }

  Provider& inner_;
  std::string path_;
  std::mutex mu_;
};

// ---- extraction ----

struct ExtractionResult {
  std::vector<Relation> candidates;  // sorted by signed key
  std::vector<VerdictRecord> records;
  std::vector<std::string> warnings;
};

namespace detail {

// Runs `prompts` through the provider with at most `limit` calls in flight. Results keep prompt order.
inline std::vector<std::string> complete_all(Provider& p, const std::vector<std::string>& prompts, std::size_t limit) {
  std::vector<std::string> out(prompts.size());
  limit = std::max<std::size_t>(limit, 1);
  for (std::size_t i = 0; i < prompts.size(); i += limit) {
    std::vector<std::future<std::string>> batch;
    for (std::size_t k = i; k < std::min(prompts.size(), i + limit); ++k)
      batch.push_back(std::async(limit == 1 ? std::launch::deferred : std::launch::async,
                                 [&p, &prompts, k] { return p.complete(prompts[k]); }));
    for (std::size_t k = 0; k < batch.size(); ++k) out[i + k] = batch[k].get();
  }
  return out;
}

inline void absorb(ExtractionResult& res, const ParsedResponse& parsed, const Signature& sig,
                   std::map<std::string, Relation>& by_key, const std::string& label) {
  for (const auto& w : parsed.warnings) res.warnings.push_back(label + ": " + w);
  for (const auto& rec : parsed.records) {
    std::string why;
    auto rel = to_relation(rec, sig, &why);
    if (!rel) {
      res.warnings.push_back(label + ": skipped " + rec.kind + "(" + rec.source + "," + rec.target + "): " + why);
      continue;
    }
    const std::string key = signed_key(*rel);
    if (by_key.count(key)) {
      res.warnings.push_back(label + ": duplicate answer for " + key);
      continue;
    }
    res.records.push_back(rec);
    by_key.emplace(key, std::move(*rel));
  }
}

}  // namespace detail

/// Queries the provider once per relation kind and collects the answers as candidates.
inline ExtractionResult extract(const Signature& sig, Provider& provider, std::size_t concurrency = 1) {
  std::vector<PromptBundle> bundles = build_prompts(sig);
  std::vector<std::string> prompts;
  for (const auto& b : bundles) prompts.push_back(b.text());
  std::vector<std::string> raw = detail::complete_all(provider, prompts, concurrency);
  ExtractionResult res;
  std::map<std::string, Relation> by_key;
  for (std::size_t i = 0; i < bundles.size(); ++i)
    detail::absorb(res, parse_response(raw[i]), sig, by_key, std::string(kind_name(bundles[i].kind)));
  for (auto& [k, r] : by_key) res.candidates.push_back(std::move(r));
  return res;
}

/// One confirmation question per query. Answers come back in signed-key order.
/// Any transport failure aborts with the list of unanswered queries.
inline std::vector<Relation> answer_followups(const std::vector<Relation>& queries, const Signature& sig,
                                              Provider& provider, std::vector<std::string>* warnings = nullptr,
                                              std::size_t concurrency = 1) {
  if (queries.empty()) return {};
  std::vector<std::string> prompts;
  for (const auto& q : queries) prompts.push_back(followup_prompt(q, sig));
  std::vector<std::string> raw;
  try {
    raw = detail::complete_all(provider, prompts, concurrency);
  } catch (const std::exception& e) {
    std::string list;
    for (const auto& q : queries) list += (list.empty() ? "" : ", ") + brief(q);
    throw ProviderError(std::string(e.what()) + "; unanswered: " + list);
  }
  ExtractionResult res;
  std::map<std::string, Relation> by_key;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    ParsedResponse parsed = parse_response(raw[i]);
    // keep only the answer about the asked relation
    ParsedResponse mine;
    mine.warnings = parsed.warnings;
    for (const auto& rec : parsed.records) {
      auto rel = to_relation(rec, sig);
      if (rel && atom_key(*rel) == atom_key(queries[i])) mine.records.push_back(rec);
      else mine.warnings.push_back("answer about an unasked relation ignored");
    }
    detail::absorb(res, mine, sig, by_key, "followup " + brief(queries[i]));
  }
  if (warnings)
    for (auto& w : res.warnings) warnings->push_back(std::move(w));
  std::vector<Relation> out;
  for (auto& [k, r] : by_key) out.push_back(std::move(r));
  return out;
}

/// Adapter for check_consistency.
inline FollowupOracle followup_oracle(const Signature& sig, Provider& provider, std::vector<std::string>* warnings = nullptr) {
  return [&sig, &provider, warnings](const std::vector<Relation>& qs) {
    return answer_followups(qs, sig, provider, warnings);
  };
}

}  // namespace sleec
