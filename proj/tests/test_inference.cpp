#include "sleec/inference.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace sleec;

namespace {

using K = RelationKind;

Relation ev(K k, const char* a, const char* b, Sign s = Sign::positive) { return Relation::events(k, a, b, s); }
Relation hyp(const char* a, const char* b) { return ev(K::hypernym, a, b); }
Relation con(const char* a, const char* b) { return ev(K::contradictory, a, b); }
Relation hb(const char* a, const char* b) { return ev(K::happens_before, a, b); }
Proposition m(const char* name) { return Proposition::holds(name); }

std::set<std::string> keys(const std::vector<Relation>& rs) {
  std::set<std::string> out;
  for (const auto& r : rs) out.insert(signed_key(r));
  return out;
}

std::vector<Relation> conclusions(const std::vector<Derivation>& ds) {
  std::vector<Relation> out;
  for (const auto& d : ds) out.push_back(d.conclusion);
  return out;
}

FollowupOracle yes_oracle() {
  return [](const std::vector<Relation>& qs) { return qs; };
}

FollowupOracle hash_oracle(unsigned salt) {
  return [salt](const std::vector<Relation>& qs) {
    std::vector<Relation> out;
    for (const auto& q : qs) {
      std::uint32_t h = 2166136261u ^ salt;
      for (char c : atom_key(q)) h = (h ^ static_cast<unsigned char>(c)) * 16777619u;
      out.push_back(h % 3 == 0 ? q : q.negated());
    }
    return out;
  };
}

// Full closure by forward chaining without any repair: positives derive from positives,
// derived negatives are collected alongside.
std::set<std::string> closure_keys(const std::vector<Relation>& rels) {
  std::vector<Relation> all;
  std::set<std::string> ks;
  for (const auto& r : rels)
    if (ks.insert(signed_key(canonical(r))).second) all.push_back(canonical(r));
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& rule : rule_catalog())
      for (const auto& d : apply_rule(rule, all))
        if (ks.insert(signed_key(d.conclusion)).second) {
          all.push_back(d.conclusion);
          grew = true;
        }
  }
  return ks;
}

bool has_witness(const std::set<std::string>& ks) {
  for (const auto& k : ks)
    if (k.back() == '+' && ks.count(k.substr(0, k.size() - 1) + "-")) return true;
  return false;
}

}  // namespace

TEST(Catalog, ContainsExactlyTheRules) {
  const std::set<std::string> expected = {
      "IP1-",      "IP2-",     "IPtrans+",  "IPEQ+",   "ME1-",    "MEcomm+",  "MEtrans+", "EQIP+",    "EQcom+",
      "HBtrans1+", "HBtrans2+", "HBtrans3+", "MIP1-",   "MIPtrans+", "IPEQ1+", "IPEQ2+",   "MME1+",    "MMEcomm+",
      "MMEtrans+", "MEQIP+",   "MEQOP+",    "MEQcom+", "MOPEQ+",  "MOPcoms+", "MOPME+"};
  std::set<std::string> names;
  for (const auto& r : rule_catalog()) {
    names.insert(r.name);
    EXPECT_EQ(r.derives_negative(), r.name.back() == '-' || r.name == "MME1+") << r.name;
  }
  EXPECT_EQ(names, expected);
  EXPECT_EQ(rule_catalog().size(), 25u);
}

TEST(ApplyRule, Examples) {
  auto d = apply_rule(find_inference_rule("IPtrans+"), {hyp("a", "b"), hyp("b", "c")});
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(signed_key(d[0].conclusion), signed_key(hyp("a", "c")));
  EXPECT_EQ(d[0].conclusion.provenance, Provenance::inferred);

  EXPECT_EQ(keys(conclusions(apply_rule(find_inference_rule("MEcomm+"), {con("a", "b")}))),
            keys({con("b", "a")}));
  EXPECT_TRUE(apply_rule(find_inference_rule("IPtrans+"), {hyp("a", "b")}).empty());
  // Negative premises never fire.
  EXPECT_TRUE(apply_rule(find_inference_rule("IP2-"), {hb("a", "b").negated()}).empty());
}

TEST(ApplyRule, NegatedMeasureOperands) {
  auto eq = Relation::measures(K::measure_equal, m("p"), Proposition::negation(m("q")));
  auto d = apply_rule(find_inference_rule("MOPEQ+"), {eq});
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(atom_key(d[0].conclusion), "opposite(p = 1,q = 1)");

  auto d2 = apply_rule(find_inference_rule("IPEQ2+"), {Relation::measures(K::measure_equal, m("p"), m("q"))});
  ASSERT_EQ(d2.size(), 1u);
  EXPECT_EQ(atom_key(d2[0].conclusion), "imply(not p = 1,not q = 1)");

  auto me1 = Relation::measures(K::mutually_exclusive, m("p"), m("q"));
  auto me2 = Relation::measures(K::mutually_exclusive, Proposition::negation(m("p")), Proposition::negation(m("q")));
  // Both orientations of the premise pair match: ops(p,q) and ops(not p,not q).
  auto d3 = apply_rule(find_inference_rule("MOPME+"), {me1, me2});
  ASSERT_EQ(d3.size(), 2u);
  EXPECT_EQ(atom_key(d3[0].conclusion), "opposite(not p = 1,not q = 1)");
  EXPECT_EQ(atom_key(d3[1].conclusion), "opposite(p = 1,q = 1)");
}

TEST(CheckConsistency, HypernymVersusHappensBefore) {
  FilterOutcome out = check_consistency({hyp("a", "b"), hb("a", "b")}, yes_oracle());
  EXPECT_EQ(keys(out.accepted), keys({hb("a", "b")}));
  ASSERT_EQ(out.flipped.size(), 1u);
  EXPECT_EQ(out.flipped[0].rule, "IP2-");

  auto steps = explain_flip(out, hyp("a", "b"));
  ASSERT_EQ(steps.size(), 1u);
  EXPECT_EQ(steps[0].rule, "IP2-");
  EXPECT_EQ(keys(steps[0].premises), keys({hb("a", "b")}));
  EXPECT_THROW(explain_flip(out, hb("a", "b")), std::invalid_argument);
}

TEST(CheckConsistency, EmptySet) {
  FilterOutcome out = check_consistency({}, yes_oracle());
  EXPECT_TRUE(out.accepted.empty());
  EXPECT_TRUE(out.flipped.empty());
  EXPECT_TRUE(out.followups_asked.empty());
}

// Hand execution of the filter on {hyp(a,b), con(b,c), hyp(a,c)} with an oracle that
// confirms every follow-up:
//  1. negatives: IP1- gives not hyp(b,c); ME1- gives not con(a,b) and not con(a,c).
//     positives: MEcomm+ asks con(c,b); MEtrans+ derives con(a,c), which clashes with
//     not con(a,c), so the premise hyp(a,b) (smallest key, same provenance) is flipped.
//  2. con(c,b) confirmed; IP1- gives not hyp(c,b); MEtrans+ on hyp(a,c), con(c,b)
//     derives con(a,b), which clashes with not con(a,b): hyp(a,c) is flipped.
//  3. nothing changes.
TEST(CheckConsistency, ThreeRelationHandExecution) {
  FilterOutcome out = check_consistency({hyp("a", "b"), con("b", "c"), hyp("a", "c")}, yes_oracle());
  EXPECT_EQ(keys(out.accepted), keys({con("b", "c")}));
  ASSERT_EQ(out.flipped.size(), 2u);
  EXPECT_EQ(signed_key(out.flipped[0].original), signed_key(hyp("a", "b")));
  EXPECT_EQ(out.flipped[0].rule, "MEtrans+");
  EXPECT_EQ(signed_key(out.flipped[1].original), signed_key(hyp("a", "c")));
  EXPECT_EQ(out.flipped[1].rule, "MEtrans+");
  EXPECT_EQ(keys(out.followups_asked), keys({con("c", "b")}));
  EXPECT_EQ(out.iterations, 3u);

  auto steps = explain_flip(out, hyp("a", "c"));
  ASSERT_GE(steps.size(), 2u);
  EXPECT_EQ(steps.front().rule, "MEcomm+");
  EXPECT_EQ(steps.back().rule, "MEtrans+");
}

TEST(CheckConsistency, OracleFailureGivesPartialOutcome) {
  FollowupOracle broken = [](const std::vector<Relation>&) -> std::vector<Relation> {
    throw std::runtime_error("provider unavailable");
  };
  FilterOutcome out = check_consistency({hyp("a", "b"), hyp("b", "c")}, broken);
  EXPECT_FALSE(out.complete);
  EXPECT_EQ(keys(out.unanswered), keys({hyp("a", "c")}));
  EXPECT_EQ(keys(out.accepted), keys({hyp("a", "b"), hyp("b", "c")}));
  for (const auto& r : out.closure) EXPECT_NE(signed_key(r), signed_key(hyp("a", "c")));
}

TEST(CheckConsistency, NegativeInputWinsLocally) {
  Relation stake = hyp("a", "b");
  stake.provenance = Provenance::stakeholder;
  FilterOutcome out = check_consistency({stake, hyp("a", "b").negated()}, yes_oracle());
  EXPECT_EQ(keys(out.accepted), keys({hyp("a", "b").negated()}));
  ASSERT_EQ(out.flipped.size(), 1u);
  EXPECT_EQ(out.flipped[0].rule, "local");
}

TEST(CheckConsistency, MixedRelationsPassThrough) {
  Relation f;
  f.kind = K::forbids;
  f.prop_a = m("p");
  f.event_a = "A";
  FilterOutcome out = check_consistency({f}, yes_oracle());
  EXPECT_EQ(keys(out.accepted), keys({f}));
}

TEST(CheckConsistency, RandomizedProperties) {
  std::mt19937 rng(1234);
  const std::vector<std::string> events = {"a", "b", "c", "d"};
  const std::vector<Proposition> props = {m("p"), m("q"), Proposition::negation(m("p")), m("r")};
  std::uniform_int_distribution<int> pick4(0, 3), pick8(0, 7), count(0, 8);
  std::bernoulli_distribution negative(0.2);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Relation> input;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      const int k = pick8(rng);
      Relation r = k < 4 ? Relation::events(static_cast<K>(k), events[pick4(rng)], events[pick4(rng)])
                         : Relation::measures(static_cast<K>(k), props[pick4(rng)], props[pick4(rng)]);
      if (negative(rng)) r = r.negated();
      input.push_back(r);
    }
    FilterOutcome out = check_consistency(input, hash_oracle(trial));
    ASSERT_TRUE(out.complete);

    // accepted is a subset of the input
    const auto in_keys = keys([&] {
      std::vector<Relation> c;
      for (auto& r : input) c.push_back(canonical(r));
      return c;
    }());
    for (const auto& k : keys(out.accepted)) EXPECT_TRUE(in_keys.count(k)) << k;

    // no inconsistency witness derivable from the accepted set
    EXPECT_FALSE(has_witness(closure_keys(out.accepted))) << "trial " << trial;

    // each atom flips at most once; the universe here is finite and small
    std::set<std::string> flipped;
    for (const auto& f : out.flipped) EXPECT_TRUE(flipped.insert(atom_key(f.original)).second);
    EXPECT_LE(out.iterations, out.closure.size() + 2);

    // negative rules reach their fixpoint before any positive rule fires in an iteration
    std::map<std::size_t, bool> positive_seen;
    for (const auto& e : out.events) {
      if (e.phase == "positive") positive_seen[e.iteration] = true;
      if (e.phase == "negative") EXPECT_FALSE(positive_seen[e.iteration]) << "trial " << trial;
    }
  }
}

TEST(Soundness, EveryRuleOnNonDegenerateSets) {
  for (const auto& rule : rule_catalog()) {
    auto rep = oracle::check_soundness(rule);
    EXPECT_TRUE(rep.sound) << rule.name << ": " << rep.counterexample;
    EXPECT_GT(rep.traces, 0u);
  }
}

TEST(Soundness, DetectsAnUnsoundRule) {
  // hyp(a,b) => hyp(b,a) does not follow.
  InferenceRule bogus{"bogus+", {detail::pat(K::hypernym, 0, 1)}, detail::pat(K::hypernym, 1, 0)};
  EXPECT_FALSE(oracle::check_soundness(bogus).sound);
  // con(a,b) => not hb(a,b) fails too: a before b, never together.
  InferenceRule bogus2{"bogus-", {detail::pat(K::contradictory, 0, 1)},
                       detail::pat(K::happens_before, 0, 1, Sign::negative)};
  EXPECT_FALSE(oracle::check_soundness(bogus2).sound);
}
