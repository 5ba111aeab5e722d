#include "problem_gen.hpp"
#include "support.hpp"

#include "sleec/normalize.hpp"
#include "sleec/smt.hpp"

#include <gtest/gtest.h>

using namespace sleec;
using namespace sleec::testing;

namespace {

bool balanced(const std::string& s) {
  int depth = 0;
  for (char c : s) {
    depth += c == '(' ? 1 : c == ')' ? -1 : 0;
    if (depth < 0) return false;
  }
  return depth == 0;
}

}  // namespace

TEST(Smt, EmptyProblemExport) {
  std::string s = export_smt(encode({}, {}, {}, {}));
  EXPECT_EQ(s.rfind("(set-logic QF_LIA)", 0), 0u);
  EXPECT_NE(s.find("(check-sat)"), std::string::npos);
  EXPECT_TRUE(balanced(s));
}

TEST(Smt, ExportIsStable) {
  NormalizedDocument d = load_document(read_sample("samples/daisy.sleec"));
  EncodingProblem p = encode(d.signature, d.rules, d.relations, {}, Bound{3, 0});
  EXPECT_EQ(export_smt(p), export_smt(p));
  EXPECT_TRUE(balanced(export_smt(p)));
}

TEST(Smt, VerdictLine) {
  EXPECT_EQ(parse_verdict_line("sat\n"), Verdict::sat);
  EXPECT_EQ(parse_verdict_line("unsat\n(error)"), Verdict::unsat);
  EXPECT_EQ(parse_verdict_line("unknown"), Verdict::unknown);
  EXPECT_EQ(parse_verdict_line("(error \"x\")\n"), std::nullopt);
}

TEST(Smt, ExternalSolverAgreesOnSamples) {
  const std::string z3 = find_external_solver();
  if (z3.empty()) GTEST_SKIP() << "no external solver installed";
  NormalizedDocument vc = load_document(read_sample("samples/vacuous.sleec"));
  EncodingProblem unsat = encode(vc.signature, vc.rules, {}, {exists("F", "A")});
  EXPECT_EQ(run_external_solver(export_smt(unsat), z3), Verdict::unsat);

  NormalizedDocument d = load_document(read_sample("samples/daisy.sleec"));
  Fact f = exists("F", "MeetingUser", parse_proposition("not patientStressed", d.signature));
  EncodingProblem sat = encode(d.signature, {*d.find_rule("Rule16")}, {}, {f});
  EXPECT_EQ(run_external_solver(export_smt(sat), z3), Verdict::sat);
}

TEST(Smt, ExternalSolverAgreesOnRandomCorpus) {
  const std::string z3 = find_external_solver();
  if (z3.empty()) GTEST_SKIP() << "no external solver installed";
  ProblemGen gen(11);
  for (int trial = 0; trial < 150; ++trial) {
    EncodingProblem p = gen.problem(1 + gen.pick(3), 5);
    SolveResult mine = solve(p);
    ASSERT_EQ(run_external_solver(export_smt(p), z3), mine.verdict) << "trial " << trial << "\n" << export_smt(p);
  }
}
