#pragma once

// SMT-LIB v2 (QF_LIA) export of a bounded problem, and verdict ingestion from an external solver.
// State i exists iff i < n. Per state: timestamp t_i, one Bool per event, one Int per measure.

#include "sleec/solver.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace sleec {

namespace detail::smt {

inline std::string all(const std::vector<std::string>& xs) {
  if (xs.empty()) return "true";
  if (xs.size() == 1) return xs[0];
  std::string s = "(and";
  for (const auto& x : xs) s += " " + x;
  return s + ")";
}

inline std::string any(const std::vector<std::string>& xs) {
  if (xs.empty()) return "false";
  if (xs.size() == 1) return xs[0];
  std::string s = "(or";
  for (const auto& x : xs) s += " " + x;
  return s + ")";
}

inline std::string num(long long v) { return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v); }

class Writer {
public:
  explicit Writer(const EncodingProblem& p) : p_(p), k_(p.max_states) {}

  std::string text() const {
    std::string s = "(set-logic QF_LIA)\n(declare-fun n () Int)\n";
    for (std::size_t i = 0; i < k_; ++i) {
      s += "(declare-fun " + t(i) + " () Int)\n";
      for (const auto& e : p_.signature.events) s += "(declare-fun " + ev(i, e) + " () Bool)\n";
      for (const auto& [m, sort] : p_.signature.measures) s += "(declare-fun " + ms(i, m) + " () Int)\n";
    }
    auto assert_ = [&](const std::string& f) { s += "(assert " + f + ")\n"; };
    assert_("(and (<= 0 n) (<= n " + std::to_string(k_) + "))");
    for (std::size_t i = 0; i < k_; ++i) {
      std::vector<std::string> wf{"(<= 0 " + t(i) + ")", "(<= " + t(i) + " " + std::to_string(p_.horizon) + ")"};
      if (i + 1 < k_) wf.push_back("(=> " + act(i + 1) + " (< " + t(i) + " " + t(i + 1) + "))");
      for (const auto& [m, sort] : p_.signature.measures) {
        auto d = p_.domains.find(m);
        if (d == p_.domains.end()) {
          wf.push_back("(= " + ms(i, m) + " 0)");
          continue;
        }
        std::vector<std::string> alts;
        for (Value v : d->second) alts.push_back("(= " + ms(i, m) + " " + num(v) + ")");
        wf.push_back(any(alts));
      }
      assert_(all(wf));
    }
    for (const auto& r : p_.rules) {
      s += "; rule " + r.id + "\n";
      std::vector<std::string> xs;
      for (std::size_t i = 0; i < k_; ++i)
        xs.push_back("(=> (and " + act(i) + " " + trig(i, r.trigger_event, r.trigger_cond) + ") " +
                     chain_fulfilled(r.chain, 0, i) + ")");
      assert_(all(xs));
    }
    for (const auto& r : p_.relations) {
      s += "; relation " + signed_key(r) + "\n";
      const std::string f = relation(r);
      assert_(r.positive() ? f : "(not " + f + ")");
    }
    for (const auto& f : p_.facts) {
      s += "; fact " + f.id + "\n";
      std::vector<std::string> xs;
      for (std::size_t i = 0; i < k_; ++i) {
        std::string body = f.chain.empty() ? "true"
                           : f.mode == FactMode::asserted ? chain_fulfilled(f.chain, 0, i)
                                                          : chain_violated(f.chain, 0, i);
        xs.push_back("(and " + act(i) + " " + trig(i, f.trigger_event, f.trigger_cond) + " " + body + ")");
      }
      assert_(any(xs));
    }
    s += "(check-sat)\n";
    return s;
  }

private:
  static std::string t(std::size_t i) { return "t_" + std::to_string(i); }
  static std::string ev(std::size_t i, const std::string& e) { return "e_" + std::to_string(i) + "_" + e; }
  static std::string ms(std::size_t i, const std::string& m) { return "m_" + std::to_string(i) + "_" + m; }
  static std::string act(std::size_t i) { return "(< " + std::to_string(i) + " n)"; }

  std::string term(const Term& x, std::size_t i) const {
    switch (x.kind) {
      case Term::Kind::constant: return num(x.value);
      case Term::Kind::measure: return ms(i, x.measure);
      case Term::Kind::negate: return "(- " + term(x.operands[0], i) + ")";
      case Term::Kind::sum: return "(+ " + term(x.operands[0], i) + " " + term(x.operands[1], i) + ")";
      case Term::Kind::scale: return "(* " + num(x.value) + " " + term(x.operands[0], i) + ")";
    }
    return "0";
  }

  std::string prop(const Proposition& q, std::size_t i) const {
    using K = Proposition::Kind;
    switch (q.kind) {
      case K::truth: return "true";
      case K::falsity: return "false";
      case K::equal: return "(= " + term(q.terms[0], i) + " " + term(q.terms[1], i) + ")";
      case K::greater_equal: return "(>= " + term(q.terms[0], i) + " " + term(q.terms[1], i) + ")";
      case K::negation: return "(not " + prop(q.operands[0], i) + ")";
      case K::conjunction:
      case K::disjunction: {
        std::vector<std::string> xs;
        for (const auto& o : q.operands) xs.push_back(prop(o, i));
        return q.kind == K::conjunction ? all(xs) : any(xs);
      }
    }
    return "false";
  }

  std::string trig(std::size_t i, const std::string& e, const Proposition& c) const {
    return "(and " + ev(i, e) + " " + prop(c, i) + ")";
  }

  std::string end(const Obligation& ob, std::size_t j) const {
    const std::string d = term(ob.deadline, j);
    return "(+ " + t(j) + " (ite (< " + d + " 0) 0 " + d + "))";
  }

  // Positive: no occurrence before k while the window is open, and k reaches the deadline
  // without a matching occurrence at exactly the deadline. Negative: first occurrence in window.
  std::string violated_at(const Obligation& ob, std::size_t j, std::size_t k) const {
    const std::string w = end(ob, j);
    std::vector<std::string> xs{act(k)};
    for (std::size_t l = j; l < k; ++l) {
      if (ob.polarity == Polarity::positive) xs.push_back("(< " + t(l) + " " + w + ")");
      xs.push_back("(not " + ev(l, ob.event) + ")");
    }
    if (ob.polarity == Polarity::positive) {
      xs.push_back("(or (> " + t(k) + " " + w + ") (and (= " + t(k) + " " + w + ") (not " + ev(k, ob.event) + ")))");
    } else {
      xs.push_back(ev(k, ob.event));
      xs.push_back("(<= " + t(k) + " " + w + ")");
    }
    return all(xs);
  }

  std::string fulfilled(const Obligation& ob, std::size_t j) const {
    if (ob.polarity == Polarity::negative) {
      std::vector<std::string> xs;
      for (std::size_t k = j; k < k_; ++k) xs.push_back(violated_at(ob, j, k));
      return "(not " + any(xs) + ")";
    }
    const std::string w = end(ob, j);
    std::vector<std::string> xs;
    for (std::size_t k = j; k < k_; ++k)
      xs.push_back("(and " + act(k) + " " + ev(k, ob.event) + " (<= " + t(k) + " " + w + "))");
    return any(xs);
  }

  std::string chain_fulfilled(const ObligationChain& oc, std::size_t m, std::size_t j) const {
    const CondObligation& c = oc.items[m];
    std::string inner = fulfilled(c.obligation, j);
    if (m + 1 < oc.size()) {
      std::vector<std::string> xs{inner};
      for (std::size_t k = j; k < k_; ++k)
        xs.push_back("(and " + violated_at(c.obligation, j, k) + " " + chain_fulfilled(oc, m + 1, k) + ")");
      inner = any(xs);
    }
    return "(or (not " + prop(c.guard, j) + ") " + inner + ")";
  }

  std::string chain_violated(const ObligationChain& oc, std::size_t m, std::size_t j) const {
    const CondObligation& c = oc.items[m];
    std::vector<std::string> xs;
    for (std::size_t k = j; k < k_; ++k) {
      std::string v = violated_at(c.obligation, j, k);
      if (m + 1 < oc.size()) v = "(and " + v + " " + chain_violated(oc, m + 1, k) + ")";
      xs.push_back(v);
    }
    return "(and " + prop(c.guard, j) + " " + any(xs) + ")";
  }

  std::string every(const std::function<std::string(std::size_t)>& f) const {
    std::vector<std::string> xs;
    for (std::size_t i = 0; i < k_; ++i) xs.push_back("(=> " + act(i) + " " + f(i) + ")");
    return all(xs);
  }

  std::string relation(const Relation& r) const {
    const std::string& a = r.event_a;
    const std::string& b = r.event_b;
    switch (r.kind) {
      case RelationKind::hypernym:
        return every([&](std::size_t i) { return "(=> " + ev(i, a) + " " + ev(i, b) + ")"; });
      case RelationKind::contradictory:
        return every([&](std::size_t i) { return "(not (and " + ev(i, a) + " " + ev(i, b) + "))"; });
      case RelationKind::event_equal:
        return every([&](std::size_t i) { return "(= " + ev(i, a) + " " + ev(i, b) + ")"; });
      case RelationKind::happens_before:
        return every([&](std::size_t i) {
          std::vector<std::string> before;
          for (std::size_t l = 0; l < i; ++l) before.push_back(ev(l, a));
          return "(=> " + ev(i, b) + " " + any(before) + ")";
        });
      case RelationKind::imply:
        return every([&](std::size_t i) { return "(=> " + prop(r.prop_a, i) + " " + prop(r.prop_b, i) + ")"; });
      case RelationKind::mutually_exclusive:
        return every([&](std::size_t i) { return "(not (and " + prop(r.prop_a, i) + " " + prop(r.prop_b, i) + "))"; });
      case RelationKind::opposite:
        return every([&](std::size_t i) { return "(distinct " + prop(r.prop_a, i) + " " + prop(r.prop_b, i) + ")"; });
      case RelationKind::measure_equal:
        return every([&](std::size_t i) { return "(= " + prop(r.prop_a, i) + " " + prop(r.prop_b, i) + ")"; });
      case RelationKind::forbids:
        return every([&](std::size_t i) { return "(=> " + ev(i, a) + " (not " + prop(r.prop_a, i) + "))"; });
      case RelationKind::induces:
        return every([&](std::size_t i) { return "(=> " + ev(i, a) + " " + prop(r.prop_a, i) + ")"; });
      case RelationKind::when_then_until:
        // state k is covered by a trigger i <= k when no e_b occurs in [i, k]
        return every([&](std::size_t k) {
          std::vector<std::string> cover;
          for (std::size_t i = 0; i <= k; ++i) {
            std::vector<std::string> xs{ev(i, a)};
            for (std::size_t l = i; l <= k; ++l) xs.push_back("(not " + ev(l, b) + ")");
            cover.push_back(all(xs));
          }
          return "(=> " + any(cover) + " " + prop(r.prop_a, k) + ")";
        });
      case RelationKind::when_then_for:
        return every([&](std::size_t k) {
          std::vector<std::string> cover;
          for (std::size_t i = 0; i <= k; ++i) {
            const std::string d = term(r.duration, i);
            cover.push_back("(and " + ev(i, a) + " (< " + t(k) + " (+ " + t(i) + " (ite (< " + d + " 0) 0 " + d +
                            "))))");
          }
          return "(=> " + any(cover) + " " + prop(r.prop_a, k) + ")";
        });
    }
    return "true";
  }

  const EncodingProblem& p_;
  std::size_t k_;
};

}  // namespace detail::smt

/// SMT-LIB v2 text whose models are exactly the bounded models of `p` (up to the timestamp grid).
inline std::string export_smt(const EncodingProblem& p) { return detail::smt::Writer(p).text(); }

/// Reads `sat` / `unsat` / `unknown` from the first line of solver output.
inline std::optional<Verdict> parse_verdict_line(const std::string& out) {
  const std::string line = out.substr(0, out.find('\n'));
  if (line == "sat") return Verdict::sat;
  if (line == "unsat") return Verdict::unsat;
  if (line == "unknown") return Verdict::unknown;
  return std::nullopt;
}

/// Path of an external solver binary: $SLEEC_SMT_SOLVER, else `z3` on PATH. Empty when none.
inline std::string find_external_solver() {
  if (const char* env = std::getenv("SLEEC_SMT_SOLVER"); env && *env) return env;
  const char* path = std::getenv("PATH");
  if (!path) return {};
  std::string dirs = path;
  std::size_t pos = 0;
  while (pos <= dirs.size()) {
    std::size_t next = dirs.find(':', pos);
    if (next == std::string::npos) next = dirs.size();
    std::filesystem::path cand = std::filesystem::path(dirs.substr(pos, next - pos)) / "z3";
    std::error_code ec;
    if (!cand.parent_path().empty() && std::filesystem::is_regular_file(cand, ec)) return cand.string();
    pos = next + 1;
  }
  return {};
}

/// Runs the external solver on exported text. nullopt when it could not be run or answered oddly.
inline std::optional<Verdict> run_external_solver(const std::string& smt, const std::string& binary) {
  if (binary.empty()) return std::nullopt;
  auto file = std::filesystem::temp_directory_path() /
              ("sleec-" + std::to_string(std::hash<std::string>{}(smt)) + ".smt2");
  {
    std::ofstream out(file);
    out << smt;
  }
  std::string cmd = "\"" + binary + "\" -smt2 \"" + file.string() + "\" 2>&1";
  std::string output;
  if (FILE* pipe = popen(cmd.c_str(), "r")) {
    char buf[512];
    while (fgets(buf, sizeof buf, pipe)) output += buf;
    pclose(pipe);
  }
  std::filesystem::remove(file);
  return parse_verdict_line(output);
}

}  // namespace sleec
