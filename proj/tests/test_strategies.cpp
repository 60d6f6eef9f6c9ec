#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "modus/strategies.hpp"
#include "support/oracles.hpp"

using namespace modus;

namespace {

Theory theory_of(std::vector<std::string> lines) { return parse_theory(lines, {}, "t"); }

}  // namespace

TEST(Exhaustive, CanonicalOrder) {
  auto t = theory_of({"Chris is blue.", "Steve is blue.", "If someone is blue then they are quiet."});
  FactStore store(t);
  auto d = exhaustive_select(store, t);
  ASSERT_FALSE(d.is_stop());
  EXPECT_EQ(d.proceed->binding.substitution, Entity::proper("Chris"));
  step(store, t, d);
  d = exhaustive_select(store, t);
  EXPECT_EQ(d.proceed->binding.substitution, Entity::proper("Steve"));
  step(store, t, d);
  EXPECT_TRUE(exhaustive_select(store, t).is_stop());
}

TEST(Exhaustive, NoRulesStops) {
  auto t = theory_of({"Chris is blue."});
  FactStore store(t);
  EXPECT_TRUE(exhaustive_select(store, t).is_stop());
}

TEST(Cone, BackwardClosure) {
  auto t = theory_of({"If someone is blue then they are quiet.", "If someone is quiet then they are cold."});
  auto quiet = relevance_cone(t, parse_statement("Chris is quiet."));
  EXPECT_EQ(quiet.relevant_rules, std::set<std::string>{"sent1"});
  auto cold = relevance_cone(t, parse_statement("Chris is cold."));
  EXPECT_EQ(cold.relevant_rules, (std::set<std::string>{"sent1", "sent2"}));
  auto none = relevance_cone(t, parse_statement("Chris is red."));
  EXPECT_TRUE(none.relevant_rules.empty());
}

TEST(Cone, IncludesNegation) {
  auto t = theory_of({"If someone is blue then they are not quiet."});
  EXPECT_EQ(relevance_cone(t, parse_statement("Chris is quiet.")).relevant_rules.size(), 1u);
}

TEST(Cone, GroundSubjectsAreRespected) {
  auto t = theory_of({"If Bob is blue then Bob is quiet.", "If Anne is red then Anne is blue."});
  auto cone = relevance_cone(t, parse_statement("Chris is quiet."));
  EXPECT_TRUE(cone.relevant_rules.empty());
  cone = relevance_cone(t, parse_statement("Bob is quiet."));
  EXPECT_EQ(cone.relevant_rules, std::set<std::string>{"sent1"});
}

TEST(GoalDirected, StopsWhenGoalKnown) {
  auto t = theory_of({"Chris is quiet.", "If someone is blue then they are quiet."});
  auto s = parse_statement("Chris is quiet.");
  FactStore store(t);
  EXPECT_TRUE(goal_directed_select(store, t, s, relevance_cone(t, s)).is_stop());
}

TEST(GoalDirected, PrefersConeRules) {
  auto t = theory_of({"Chris is blue.", "If someone is blue then they are red.",
                      "If someone is blue then they are quiet."});
  auto s = parse_statement("Chris is quiet.");
  FactStore store(t);
  auto d = goal_directed_select(store, t, s, relevance_cone(t, s));
  ASSERT_FALSE(d.is_stop());
  EXPECT_EQ(d.proceed->rule_index, 1u);
}

TEST(GoalDirected, ConeFixpointStops) {
  auto t = theory_of({"Chris is red.", "If someone is blue then they are quiet."});
  auto s = parse_statement("Chris is quiet.");
  FactStore store(t);
  EXPECT_TRUE(goal_directed_select(store, t, s, relevance_cone(t, s)).is_stop());
}

TEST(Names, RoundTrip) {
  EXPECT_EQ(strategy_from_string("goal"), StrategyKind::GoalDirected);
  EXPECT_EQ(strategy_from_string("exhaustive"), StrategyKind::Exhaustive);
  EXPECT_FALSE(strategy_from_string("beam"));
  EXPECT_EQ(make_strategy(StrategyKind::GoalDirected)->name(), "goal");
}

TEST(Properties, ConeIsClosedUnderBackwardExpansion) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto t = oracle::random_theory(seed);
    auto cone = relevance_cone(t, Statement{oracle::random_statement(seed)});
    for (const auto& r : t.rules) {
      if (!cone.relevant_rules.count(r.id)) continue;
      for (const auto& p : r.premises) {
        AtomPattern want{p.predicate, p.polarity, std::nullopt};
        if (!is_variable(p.subject)) want.subject = std::get<Entity>(p.subject);
        ASSERT_TRUE(cone.relevant_atom_patterns.count(want));
      }
    }
  }
}

TEST(Properties, ShuffledSelectionKeepsLabelsAndIsSeeded) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto t = oracle::random_theory(seed);
    Statement s{oracle::random_statement(seed)};
    ExhaustiveStrategy plain;
    auto base = solve(t, s, run(t, s, plain));
    for (auto kind : {StrategyKind::Exhaustive, StrategyKind::GoalDirected}) {
      auto a = make_strategy(kind, seed);
      auto b = make_strategy(kind, seed);
      auto ta = run(t, s, *a);
      auto tb = run(t, s, *b);
      ASSERT_EQ(ta.composer_calls, tb.composer_calls);
      for (std::size_t i = 0; i < ta.steps.size(); ++i)
        ASSERT_EQ(ta.steps[i].conclusion.atom, tb.steps[i].conclusion.atom);
      if (!ta.contradiction) ASSERT_EQ(solve(t, s, ta).label, base.label);
    }
  }
}
