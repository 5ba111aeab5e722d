#pragma once

// Extraction followed by the consistency filter, with a deterministic JSON report.

#include "sleec/extractor.hpp"
#include "sleec/inference.hpp"
#include "sleec/normalize.hpp"

#include "json.hpp"

namespace sleec {

struct SanitizeReport {
  ExtractionResult extraction;
  FilterOutcome filter;
  std::vector<std::string> followup_warnings;
  std::map<std::string, std::string> justification;  // signed key -> model justification
};

inline SanitizeReport sanitize(const Signature& sig, Provider& provider, std::size_t concurrency = 1) {
  SanitizeReport rep;
  rep.extraction = extract(sig, provider, concurrency);
  for (const auto& rec : rep.extraction.records)
    if (auto r = to_relation(rec, sig)) rep.justification[signed_key(canonical(*r))] = rec.justification;
  rep.filter = check_consistency(rep.extraction.candidates, followup_oracle(sig, provider, &rep.followup_warnings));
  return rep;
}

namespace detail {

inline nlohmann::json relation_list(const std::vector<Relation>& rs, const Signature& sig) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : rs) a.push_back(render(r, &sig));
  return a;
}

}  // namespace detail

inline nlohmann::json to_json(const SanitizeReport& rep, const Signature& sig) {
  nlohmann::json j;
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& r : rep.extraction.candidates) {
    auto it = rep.justification.find(signed_key(canonical(r)));
    cands.push_back({{"relation", render(r, &sig)},
                     {"kind", kind_name(r.kind)},
                     {"verdict", r.positive() ? "positive" : "negative"},
                     {"justification", it == rep.justification.end() ? "" : it->second}});
  }
  j["candidates"] = std::move(cands);
  j["accepted"] = detail::relation_list(rep.filter.accepted, sig);
  nlohmann::json flips = nlohmann::json::array();
  for (const auto& f : rep.filter.flipped)
    flips.push_back({{"relation", render(f.original, &sig)},
                     {"rule", f.rule},
                     {"premises", detail::relation_list(f.premises, sig)},
                     {"iteration", f.iteration}});
  j["flipped"] = std::move(flips);
  j["followups"] = detail::relation_list(rep.filter.followups_asked, sig);
  j["unanswered"] = detail::relation_list(rep.filter.unanswered, sig);
  j["complete"] = rep.filter.complete;
  j["iterations"] = rep.filter.iterations;
  std::vector<std::string> warnings = rep.extraction.warnings;
  warnings.insert(warnings.end(), rep.followup_warnings.begin(), rep.followup_warnings.end());
  j["warnings"] = warnings;
  return j;
}

/// Accepted positive relations as a block that can be pasted into the document.
inline std::string accepted_block(const SanitizeReport& rep, const Signature& sig) {
  std::string s = "relation_start\n";
  for (const auto& r : rep.filter.accepted)
    if (r.positive()) s += "  " + render(r, &sig) + "\n";
  return s + "relation_end\n";
}

}  // namespace sleec
