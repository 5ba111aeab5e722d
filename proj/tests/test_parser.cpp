#include "sleec/parser.hpp"
#include "sleec/text.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace sleec;

namespace {

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(SLEEC_SOURCE_DIR) + "/" + rel);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kHeader = R"(
def_start
  event A
  event B
  event C
  measure p
  measure q : boolean
  measure n : numeric
  constant limit = 4
def_end
)";

ParseError parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e;
  }
  throw std::runtime_error("expected a parse error for: " + text);
}

}  // namespace

TEST(Parse, DaisyRules) {
  const std::string text = slurp("samples/daisy.sleec");
  SurfaceDocument doc = parse(text);
  ASSERT_EQ(doc.rules.size(), 4u);
  EXPECT_EQ(doc.signature.events.size(), 4u);

  const SurfaceRule& r16 = doc.rules[2];
  EXPECT_EQ(r16.id, "Rule16");
  EXPECT_EQ(r16.trigger_event, "MeetingUser");
  ASSERT_EQ(r16.defeaters.size(), 1u);
  EXPECT_EQ(r16.defeaters[0].condition, Proposition::holds("patientStressed"));
  EXPECT_FALSE(r16.defeaters[0].response.has_value());
  ASSERT_EQ(r16.response.size(), 1u);
  EXPECT_EQ(r16.response.items[0].obligation.deadline, Term::constant(1800));

  const SurfaceRule& r19 = doc.rules[3];
  ASSERT_EQ(r19.defeaters.size(), 2u);
  EXPECT_EQ(r19.defeaters[0].condition, Proposition::holds("userDirectsOtherwise"));
  EXPECT_EQ(r19.defeaters[1].condition, Proposition::holds("medicalEmergency"));
  EXPECT_EQ(r19.response.items[0].obligation.polarity, Polarity::negative);
  EXPECT_EQ(r19.trigger_cond, Proposition::holds("patientXReligion"));
}

TEST(Parse, SpansCoverSurfaceRule) {
  const std::string text = slurp("samples/daisy.sleec");
  SurfaceDocument doc = parse(text);
  const SourceSpan sp = doc.rules[2].span;
  const std::string body = text.substr(sp.begin, sp.end - sp.begin);
  EXPECT_EQ(body.rfind("Rule16", 0), 0u);
  EXPECT_EQ(body.substr(body.size() - std::string("patientStressed").size()), "patientStressed");
  const SourceSpan d = doc.rules[2].defeaters[0].span;
  EXPECT_EQ(text.substr(d.begin, d.end - d.begin), "unless patientStressed");
}

TEST(Parse, MissingTriggerEvent) {
  ParseError e = parse_error(std::string(kHeader) + "rule_start\n  when then B\nrule_end\n");
  EXPECT_EQ(e.kind(), ParseError::Kind::syntax);
  EXPECT_EQ(e.line(), 12u);
  EXPECT_EQ(e.column(), 8u);
  EXPECT_TRUE(e.expected().count("event"));
}

TEST(Parse, UndeclaredSymbol) {
  const std::string text = std::string(kHeader) + "rule_start\n  when A then Zed\nrule_end\n";
  ParseError e = parse_error(text);
  EXPECT_EQ(e.kind(), ParseError::Kind::undeclared);
  EXPECT_EQ(text.substr(e.span().begin, e.span().end - e.span().begin), "Zed");
  EXPECT_EQ(parse_error(std::string(kHeader) + "rule_start when A and zz then B rule_end").kind(),
            ParseError::Kind::undeclared);
}

TEST(Parse, NonBooleanCondition) {
  ParseError e = parse_error(std::string(kHeader) + "rule_start when A then B unless n rule_end");
  EXPECT_EQ(e.kind(), ParseError::Kind::semantic);
  EXPECT_NE(std::string(e.what()).find("non-boolean"), std::string::npos);
}

TEST(Parse, DeclarationErrors) {
  EXPECT_THROW(parse("def_start event a def_end"), ParseError);
  EXPECT_THROW(parse("def_start measure Speed def_end"), ParseError);
  EXPECT_THROW(parse("def_start event A measure A def_end"), ParseError);
  EXPECT_THROW(parse("def_start event A"), ParseError);
  EXPECT_THROW(parse("rule_start when A then B rule_end"), ParseError);
}

TEST(Parse, TermsAndComparisons) {
  SurfaceDocument doc = parse(std::string(kHeader) +
                              "rule_start\n"
                              "  when A and n >= limit + 1 or not (p and q) then B within 2 * n minutes\n"
                              "  when A and (n + 1) = 3 then B within limit hours otherwise C within -n seconds\n"
                              "rule_end\n");
  ASSERT_EQ(doc.rules.size(), 2u);
  EXPECT_EQ(doc.rules[0].id, "R1");
  EXPECT_EQ(doc.rules[1].id, "R2");
  EXPECT_EQ(render(doc.rules[0].trigger_cond, &doc.signature), "n >= 4 + 1 or not (p and q)");
  EXPECT_EQ(doc.rules[0].response.items[0].obligation.deadline,
            Term::scale(60, Term::scale(2, Term::measure_ref("n"))));
  EXPECT_EQ(doc.rules[1].response.items[0].obligation.deadline, Term::constant(4 * 3600));
  EXPECT_EQ(doc.rules[1].response.items[1].obligation.deadline, Term::negate(Term::measure_ref("n")));
  EXPECT_EQ(render(doc.rules[1].trigger_cond, &doc.signature), "n + 1 = 3");
}

TEST(Parse, GuardsFallbacksAndDefeaterResponses) {
  SurfaceDocument doc = parse(std::string(kHeader) +
                              "rule_start\n"
                              "  when A then if p then B within 3 seconds otherwise not C\n"
                              "    unless q then C within 1 minute\n"
                              "rule_end\n");
  const SurfaceRule& r = doc.rules.at(0);
  ASSERT_EQ(r.response.size(), 2u);
  EXPECT_EQ(r.response.items[0].guard, Proposition::holds("p"));
  ASSERT_TRUE(r.defeaters.at(0).response.has_value());
  EXPECT_EQ(r.defeaters[0].response->items[0].obligation.deadline, Term::constant(60));
  EXPECT_THROW(parse(std::string(kHeader) + "rule_start when A then not B otherwise C rule_end"), ParseError);
}

TEST(Parse, Relations) {
  SurfaceDocument doc = parse(std::string(kHeader) +
                              "relation_start\n"
                              "  A hypernym B\n"
                              "  ! A isContradictoryWith C\n"
                              "  A happensBefore B\n"
                              "  B equal C\n"
                              "  p imply q\n"
                              "  p mutuallyExclusive not q\n"
                              "  p oppositeTo q\n"
                              "  n >= 2 equal p\n"
                              "  p forbids A\n"
                              "  A induces q\n"
                              "  when A then p until B\n"
                              "  when A then q for 10 minutes\n"
                              "relation_end\n");
  ASSERT_EQ(doc.relations.size(), 12u);
  const RelationKind kinds[] = {RelationKind::hypernym,        RelationKind::contradictory,
                                RelationKind::happens_before,  RelationKind::event_equal,
                                RelationKind::imply,           RelationKind::mutually_exclusive,
                                RelationKind::opposite,        RelationKind::measure_equal,
                                RelationKind::forbids,         RelationKind::induces,
                                RelationKind::when_then_until, RelationKind::when_then_for};
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(doc.relations[i].kind, kinds[i]) << i;
    EXPECT_EQ(doc.relations[i].provenance, Provenance::stakeholder);
    // Rendering parses back to the same relation.
    Relation back = parse_relation(render(doc.relations[i], &doc.signature), doc.signature);
    EXPECT_EQ(signed_key(back), signed_key(doc.relations[i])) << render(doc.relations[i], &doc.signature);
  }
  EXPECT_EQ(doc.relations[1].sign, Sign::negative);
  EXPECT_EQ(doc.relations[11].duration, Term::constant(600));
}

TEST(Parse, Facts) {
  SurfaceDocument doc = parse(std::string(kHeader) +
                              "concern_start\n"
                              "  exists A while not (B within 5 seconds)\n"
                              "  Unsafe exists A and p while n >= 1\n"
                              "concern_end\n"
                              "purpose_start\n"
                              "  exists B while C within 2 seconds\n"
                              "  exists C while not (p)\n"
                              "purpose_end\n");
  ASSERT_EQ(doc.facts.size(), 4u);
  EXPECT_EQ(doc.facts[0].id, "C1");
  EXPECT_EQ(doc.facts[0].mode, FactMode::negated);
  EXPECT_EQ(doc.facts[1].id, "Unsafe");
  EXPECT_TRUE(doc.facts[1].chain.empty());
  EXPECT_EQ(render(doc.facts[1].trigger_cond, &doc.signature), "p and n >= 1");
  EXPECT_EQ(doc.facts[2].id, "P1");
  EXPECT_EQ(doc.facts[2].role, FactRole::purpose);
  EXPECT_EQ(doc.facts[2].mode, FactMode::asserted);
  EXPECT_EQ(render(doc.facts[3].trigger_cond, &doc.signature), "not p");
}

TEST(Parse, CommentsAndOptions) {
  SurfaceDocument doc = parse("// leading\ndef_start event A // trailing\n option preemption = negate def_end");
  EXPECT_EQ(doc.preemption, Preemption::negated_response);
  EXPECT_TRUE(doc.rules.empty());
  EXPECT_NO_THROW(parse(""));
}
