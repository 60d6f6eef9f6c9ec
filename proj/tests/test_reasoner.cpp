#include <gtest/gtest.h>

#include <set>
#include <string>
#include <vector>

#include "modus/errors.hpp"
#include "modus/reasoner.hpp"
#include "modus/strategies.hpp"
#include "support/oracles.hpp"

using namespace modus;

namespace {

Theory theory_of(std::vector<std::string> lines) { return parse_theory(lines, {}, "t"); }

Statement st(const std::string& s) { return parse_statement(s); }

std::vector<std::string> conclusions(const InferenceTrace& trace) {
  std::vector<std::string> out;
  for (const auto& s : trace.steps) out.push_back(render(s.conclusion.atom));
  return out;
}

const std::vector<std::string> kChain{"Charlie is blue.", "If someone is blue then they are kind.",
                                      "Kind people are white."};

}  // namespace

TEST(Bindings, EntityOrderThenPositions) {
  auto t = theory_of({"Chris is blue.", "Steve is blue.", "If someone is blue then they are quiet."});
  FactStore store(t);
  auto b = applicable_bindings(t.rules[0], store);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0].substitution, Entity::proper("Chris"));
  EXPECT_EQ(b[0].premise_facts, std::vector<std::string>{"sent1"});
  EXPECT_EQ(b[1].substitution, Entity::proper("Steve"));
  EXPECT_EQ(b, oracle::bindings(t.rules[0], store, t));
}

TEST(Bindings, ConjunctivePremises) {
  auto t = theory_of({"All smart, young things are nice.", "Dave is red.", "Bob is smart.",
                      "Bob is young."});
  FactStore store(t);
  auto b = applicable_bindings(t.rules[0], store);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].substitution, Entity::proper("Bob"));
  EXPECT_EQ(b[0].premise_facts, (std::vector<std::string>{"sent3", "sent4"}));
}

TEST(Bindings, NegatedPremiseNeedsExplicitNegativeFact) {
  auto t = theory_of({"Chris is red.", "If someone is not red then they are kind."});
  FactStore store(t);
  EXPECT_TRUE(applicable_bindings(t.rules[0], store).empty());
}

TEST(Bindings, MatchBruteForceOnRandomTheories) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto t = oracle::random_theory(seed);
    FactStore store(t);
    for (const auto& r : t.rules)
      ASSERT_EQ(applicable_bindings(r, store), oracle::bindings(r, store, t)) << "seed " << seed;
  }
}

TEST(Compose, SubstitutesVariable) {
  auto t = theory_of({"If someone is blue then they are quiet.", "All smart, young things are nice.",
                      "big people are young."});
  EXPECT_EQ(render(compose(t.rules[0], {Entity::proper("Chris"), {"x"}})), "Chris is quiet.");
  EXPECT_EQ(render(compose(t.rules[1], {Entity::proper("Bob"), {"x", "y"}})), "Bob is nice.");
  EXPECT_EQ(render(compose(t.rules[2], {Entity::proper("Oliver"), {"x"}})), "Oliver is young.");
  EXPECT_THROW(compose(t.rules[0], {std::nullopt, {"x"}}), Error);
}

TEST(Step, DerivesAndRejectsDuplicates) {
  auto t = theory_of({"Chris is blue.", "If someone is blue then they are quiet."});
  FactStore store(t);
  auto binding = applicable_bindings(t.rules[0], store).at(0);
  auto one = step(store, t, SelectionDecision::go(0, binding));
  ASSERT_TRUE(one);
  EXPECT_EQ(one->conclusion.id, "int1");
  EXPECT_EQ(render(one->conclusion.atom), "Chris is quiet.");
  EXPECT_EQ(one->step_index, 1);
  try {
    step(store, t, SelectionDecision::go(0, binding));
    FAIL();
  } catch (const StepError& e) {
    EXPECT_EQ(e.kind(), StepError::Kind::DuplicateConclusion);
  }
}

TEST(Step, StopLeavesStoreUnchanged) {
  auto t = theory_of({"Chris is blue."});
  FactStore store(t);
  EXPECT_FALSE(step(store, t, SelectionDecision::stop()));
  EXPECT_EQ(store.entries().size(), 1u);
}

TEST(Step, StaleBindingRejected) {
  auto t = theory_of({"Chris is blue.", "If someone is blue then they are quiet."});
  FactStore store(t);
  try {
    step(store, t, SelectionDecision::go(0, {Entity::proper("Steve"), {"sent1"}}));
    FAIL();
  } catch (const StepError& e) {
    EXPECT_EQ(e.kind(), StepError::Kind::StaleDecision);
  }
  EXPECT_THROW(step(store, t, SelectionDecision::go(5, {})), StepError);
}

TEST(Run, GoalDirectedChain) {
  auto t = theory_of(kChain);
  GoalDirectedStrategy goal;
  auto trace = run(t, st("Charlie is white."), goal);
  EXPECT_EQ(conclusions(trace), (std::vector<std::string>{"Charlie is kind.", "Charlie is white."}));
  EXPECT_EQ(trace.stop_reason, StopReason::GoalReached);
  EXPECT_EQ(trace.composer_calls, 2);
  auto v = solve(t, st("Charlie is white."), trace);
  EXPECT_EQ(v.label, Label::True);
  ASSERT_TRUE(v.proof);
  EXPECT_EQ(v.proof->canonical_form(), "(sent2 & sent1) -> int1 ; (sent3 & int1) -> hypothesis");
  EXPECT_EQ(v.proof->depth(), 2);
}

TEST(Run, UnrelatedStatementHitsFixpoint) {
  auto t = theory_of(kChain);
  GoalDirectedStrategy goal;
  auto g = run(t, st("Bob is red."), goal);
  EXPECT_TRUE(g.steps.empty());
  EXPECT_EQ(g.stop_reason, StopReason::StrategyStop);
  ExhaustiveStrategy ex;
  auto e = run(t, st("Bob is red."), ex);
  EXPECT_EQ(e.stop_reason, StopReason::Fixpoint);
  EXPECT_EQ(e.composer_calls, 2);
  EXPECT_EQ(solve(t, st("Bob is red."), e).label, Label::Unknown);
  EXPECT_FALSE(solve(t, st("Bob is red."), e).proof);
}

TEST(Run, BudgetCapsSteps) {
  auto t = theory_of(kChain);
  GoalDirectedStrategy goal;
  auto trace = run(t, st("Charlie is white."), goal, 1);
  EXPECT_EQ(trace.steps.size(), 1u);
  EXPECT_EQ(trace.stop_reason, StopReason::BudgetExhausted);
  EXPECT_EQ(solve(t, st("Charlie is white."), trace).label, Label::Unknown);
  EXPECT_THROW(run(t, st("Charlie is white."), goal, -1), Error);
  EXPECT_EQ(run(t, st("Charlie is white."), goal, 0).composer_calls, 0);
}

TEST(Solve, GivenFactIsDepthZero) {
  auto t = theory_of({"Bob is big.", "Anne is red.", "If someone is red then they are big.",
                      "Charlie is white."});
  ExhaustiveStrategy ex;
  auto v = solve(t, st("Charlie is white."), run(t, st("Charlie is white."), ex));
  EXPECT_EQ(v.label, Label::True);
  EXPECT_EQ(v.proof->canonical_form(), "sent4 -> hypothesis");
  EXPECT_EQ(v.proof->depth(), 0);
}

TEST(Solve, NegationGivesFalseWithProofOfNegation) {
  auto t = theory_of({"Charlie is blue.", "If someone is blue then they are not white."});
  GoalDirectedStrategy goal;
  auto v = solve(t, st("Charlie is white."), run(t, st("Charlie is white."), goal));
  EXPECT_EQ(v.label, Label::False);
  ASSERT_TRUE(v.proof);
  EXPECT_TRUE(v.proof->negated_hypothesis());
  EXPECT_EQ(v.proof->canonical_form(), "(sent2 & sent1) -> hypothesis");
  auto check = check_proof(t, *v.proof, negated(st("Charlie is white.").atom));
  EXPECT_TRUE(check.valid) << check.error;
}

TEST(Solve, ConjunctiveStepListsFactsAscending) {
  auto t = theory_of({"Bob is young.", "All smart, young things are nice.", "Bob is smart."});
  ExhaustiveStrategy ex;
  auto v = solve(t, st("Bob is nice."), run(t, st("Bob is nice."), ex));
  EXPECT_EQ(v.proof->canonical_form(), "(sent2 & sent1 sent3) -> hypothesis");
}

TEST(Solve, ContradictionFlagged) {
  auto t = theory_of({"Bob is big.", "If someone is big then they are red.",
                      "If someone is big then they are not red."});
  ExhaustiveStrategy ex;
  auto trace = run(t, st("Bob is red."), ex);
  EXPECT_TRUE(trace.contradiction);
  EXPECT_EQ(solve(t, st("Bob is red."), trace).label, Label::True);
  EXPECT_EQ(solve(t, st("Bob is not red."), trace).label, Label::True);
}

TEST(StitchProof, MissingTargetThrows) {
  auto t = theory_of(kChain);
  EXPECT_THROW(stitch_proof(t, InferenceTrace{}, st("Bob is red.").atom), ProofError);
}

// Random theories: the exhaustive fixpoint is the naive closure, labels
// agree between strategies and the oracle, goal-directed work is a subset of
// exhaustive work, and every proof checks.
TEST(Properties, StrategiesAgreeWithOracleOnRandomTheories) {
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    auto t = oracle::random_theory(seed);
    const auto closure = oracle::closure(t);
    ExhaustiveStrategy ex;
    GoalDirectedStrategy goal;
    for (std::uint64_t q = 0; q < 4; ++q) {
      Statement s{oracle::random_statement(seed * 31 + q)};
      auto et = run(t, s, ex);
      std::set<Atom> derived;
      for (const auto& f : t.facts) derived.insert(f.atom);
      for (const auto& k : et.steps) derived.insert(k.conclusion.atom);
      ASSERT_EQ(derived, closure) << "seed " << seed;
      ASSERT_EQ(et.steps.size(), closure.size() - FactStore(t).entries().size());

      auto gt = run(t, s, goal);
      ASSERT_LE(gt.composer_calls, et.composer_calls);
      for (const auto& k : gt.steps) ASSERT_TRUE(closure.count(k.conclusion.atom));

      auto ev = solve(t, s, et);
      auto gv = solve(t, s, gt);
      const auto want = oracle::label(t, s.atom);
      if (!et.contradiction) {
        ASSERT_EQ(ev.label, want) << "seed " << seed << " " << render(s);
        ASSERT_EQ(gv.label, want) << "seed " << seed << " " << render(s);
      }
      for (const auto* v : {&ev, &gv}) {
        ASSERT_EQ(v->label == Label::Unknown, !v->proof.has_value());
        if (!v->proof) continue;
        const Atom proven = v->proof->negated_hypothesis() ? negated(s.atom) : s.atom;
        auto check = check_proof(t, *v->proof, proven);
        ASSERT_TRUE(check.valid) << check.error << " seed " << seed;
        auto reparsed = parse_proof(v->proof->canonical_form());
        ASSERT_EQ(reparsed.canonical_form(), v->proof->canonical_form());
      }
    }
  }
}

TEST(Properties, TraceIsCausallyOrdered) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto t = oracle::random_theory(seed);
    ExhaustiveStrategy ex;
    auto trace = run(t, Statement{oracle::random_statement(seed)}, ex);
    std::set<std::string> known;
    for (const auto& f : t.facts) known.insert(f.id);
    for (const auto& k : trace.steps) {
      for (const auto& id : k.fact_ids) ASSERT_TRUE(known.count(id)) << id;
      known.insert(k.conclusion.id);
    }
  }
}
