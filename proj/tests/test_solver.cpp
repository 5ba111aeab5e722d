#include "oracles.hpp"
#include "problem_gen.hpp"
#include "support.hpp"

#include "sleec/normalize.hpp"
#include "sleec/solver.hpp"

#include <gtest/gtest.h>

using namespace sleec;
using namespace sleec::testing;

namespace {

EncodingProblem from_doc(const NormalizedDocument& d, std::vector<Fact> facts, Bound b = {}) {
  return encode(d.signature, d.rules, d.relations, facts, b);
}

bool brute_sat(const EncodingProblem& p, const oracle::Grid& g) {
  bool found = false;
  oracle::enumerate(g, [&](const Trace& tr) {
    found = is_model(p, tr);
    return !found;
  });
  return found;
}

}  // namespace

TEST(Solver, EmptyDocumentHasEmptyModel) {
  EncodingProblem p = encode({}, {}, {}, {});
  SolveResult r = solve(p);
  ASSERT_EQ(r.verdict, Verdict::sat);
  EXPECT_TRUE(r.witness->empty());
}

TEST(Solver, VacuousSetWithTriggerIsUnsat) {
  NormalizedDocument d = load_document(read_sample("samples/vacuous.sleec"));
  EncodingProblem p = from_doc(d, {exists("F", "A")});
  EXPECT_EQ(p.grid, 18000);
  SolveResult r = solve(p);
  ASSERT_EQ(r.verdict, Verdict::unsat);
  CoreResult core = minimize_core(p, r.core);
  EXPECT_TRUE(core.minimal);
  EXPECT_EQ(core.core, (std::vector<std::string>{"R1", "R2", "R3"}));
}

TEST(Solver, DaisyRuleWitness) {
  NormalizedDocument d = load_document(read_sample("samples/daisy.sleec"));
  const NormRule* r16 = d.find_rule("Rule16");
  ASSERT_NE(r16, nullptr);
  Fact f = exists("F", "MeetingUser", parse_proposition("not patientStressed", d.signature));
  EncodingProblem p = encode(d.signature, {*r16}, {}, {f});
  SolveResult r = solve(p);
  ASSERT_EQ(r.verdict, Verdict::sat);
  const Trace& w = *r.witness;
  std::optional<Seconds> meet, exam;
  for (const auto& s : w.states()) {
    if (!meet && s.has("MeetingUser") && s.valuation.at("patientStressed") == 0) meet = s.time;
    if (meet && !exam && s.has("ExaminingPatient")) exam = s.time;
  }
  ASSERT_TRUE(meet && exam);
  EXPECT_LE(*exam - *meet, 1800);
}

TEST(Solver, SingleStateBoundForcesUnsat) {
  NormalizedDocument d = load_document(
      "def_start event A event B def_end\n"
      "rule_start R1 when A then B within 60 seconds rule_end\n"
      "relation_start A isContradictoryWith B relation_end\n");
  EncodingProblem p = from_doc(d, {exists("F", "A")}, Bound{1, 0});
  EXPECT_EQ(solve(p).verdict, Verdict::unsat);
  EncodingProblem wider = from_doc(d, {exists("F", "A")}, Bound{2, 0});
  EXPECT_EQ(solve(wider).verdict, Verdict::sat);
}

TEST(Solver, ZeroBoundWithFactIsAnError) {
  NormalizedDocument d = load_document("def_start event A def_end\n");
  EXPECT_THROW(from_doc(d, {exists("F", "A")}, Bound{0, 0}), SolveError);
}

TEST(Solver, BudgetExhaustionIsUnknown) {
  NormalizedDocument d = load_document(read_sample("samples/vacuous.sleec"));
  EncodingProblem p = from_doc(d, {exists("F", "A")});
  SolveResult r = solve(p, Budget{3, std::chrono::milliseconds(10'000)});
  EXPECT_EQ(r.verdict, Verdict::unknown);
  EXPECT_NE(r.budget_report.find("node budget"), std::string::npos);
}

TEST(Solver, AgreesWithExhaustiveEnumeration) {
  ProblemGen gen(11);
  int sat = 0, unsat = 0;
  for (int trial = 0; trial < 600; ++trial) {
    const std::size_t k = 1 + gen.pick(3);
    EncodingProblem p = gen.problem(k, 5);
    oracle::Grid g{{"A", "B"}, {"m"}, k, 5};
    SolveResult r = solve(p);
    ASSERT_NE(r.verdict, Verdict::unknown);
    const bool expect = brute_sat(p, g);
    ASSERT_EQ(r.verdict == Verdict::sat, expect) << "trial " << trial;
    (expect ? sat : unsat)++;
    if (r.witness) EXPECT_TRUE(is_model(p, *r.witness));
  }
  EXPECT_GT(sat, 50);
  EXPECT_GT(unsat, 50);
}

TEST(Solver, CoresAreDeletionMinimal) {
  ProblemGen gen(23);
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 60; ++trial) {
    EncodingProblem p = gen.problem(3, 5);
    SolveResult r = solve(p);
    if (r.verdict != Verdict::unsat) continue;
    CoreResult c = minimize_core(p, r.core);
    ASSERT_TRUE(c.minimal);
    oracle::Grid g{{"A", "B"}, {"m"}, 3, 5};
    std::set<std::string> keep(c.core.begin(), c.core.end());
    EXPECT_FALSE(brute_sat(p.restricted(keep), g));
    for (const auto& id : c.core) {
      std::set<std::string> less = keep;
      less.erase(id);
      EXPECT_TRUE(brute_sat(p.restricted(less), g)) << "trial " << trial << " drop " << id;
    }
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(Solver, SituationalConflictNeedsHistory) {
  NormalizedDocument d = load_document(read_sample("samples/situational.sleec"));
  EncodingProblem p = from_doc(d, {});
  SolveResult r = solve_situational(p, "R2");
  ASSERT_EQ(r.verdict, Verdict::sat);
  const auto& st = r.witness->states();
  ASSERT_EQ(st.size(), 2u);
  EXPECT_TRUE(st[0].has("A"));
  EXPECT_EQ(st[1].events, (std::set<std::string>{"B"}));
  EXPECT_LE(st[1].time + 18000, st[0].time + 36000);

  EncodingProblem alone = p.restricted({"R2"});
  EXPECT_EQ(solve_situational(alone, "R2").verdict, Verdict::unsat);
}
