#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "modus/datagen.hpp"
#include "modus/errors.hpp"
#include "modus/strategies.hpp"
#include "modus/vocabulary.hpp"
#include "support/oracles.hpp"

using namespace modus;

namespace {

Theory theory_of(std::vector<std::string> lines) { return parse_theory(lines, {}, "t"); }

Atom atom(const std::string& s) { return parse_statement(s).atom; }

std::string dump(const Instance& in) {
  std::string out = in.theory.id + "\n";
  for (const auto& l : in.theory.lines()) out += l + "\n";
  for (const auto& q : in.questions) {
    out += q.id + " " + render(q.statement) + " " + std::string(to_string(q.gold.label)) + " " +
           (q.gold.depth ? std::to_string(*q.gold.depth) : "N/A");
    for (const auto& p : q.gold.proofs) out += " | " + p;
    out += "\n";
  }
  return out;
}

// Every consistent proof: one derivation chosen per derived atom, expanded
// from the target. Feasible only for small theories.
std::set<std::string> brute_force_proofs(const Theory& t, const Closure& c, const Atom& target,
                                         bool negated_target, bool& too_big) {
  std::vector<Atom> derived;
  for (const auto& [a, ds] : c.derivations)
    if (!c.given.contains(a)) derived.push_back(a);
  std::size_t combos = 1;
  for (const auto& a : derived) {
    combos *= c.derivations.at(a).size();
    if (combos > 20000) {
      too_big = true;
      return {};
    }
  }
  std::map<Atom, std::string> ids;
  for (const auto& f : t.facts) ids.emplace(f.atom, f.id);
  std::set<std::string> out;
  std::vector<std::size_t> choice(derived.size(), 0);
  while (true) {
    Provenance prov;
    for (const auto& [a, id] : ids) prov.emplace(a, id);
    for (std::size_t i = 0; i < derived.size(); ++i) prov.emplace(derived[i], c.derivations.at(derived[i])[choice[i]]);
    try {
      out.insert(build_proof(target, prov, negated_target).canonical_form());
    } catch (const ProofError&) {
    }
    std::size_t i = 0;
    for (; i < derived.size(); ++i) {
      if (++choice[i] < c.derivations.at(derived[i]).size()) break;
      choice[i] = 0;
    }
    if (i == derived.size()) break;
  }
  return out;
}

}  // namespace

TEST(ParseDepths, Forms) {
  EXPECT_EQ(parse_depths("0..3"), (std::vector<std::optional<int>>{0, 1, 2, 3}));
  EXPECT_EQ(parse_depths("3"), (std::vector<std::optional<int>>{3}));
  EXPECT_EQ(parse_depths("0,1,5"), (std::vector<std::optional<int>>{0, 1, 5}));
  EXPECT_EQ(parse_depths("U"), (std::vector<std::optional<int>>{std::nullopt}));
  EXPECT_EQ(parse_depths("1..2,U"), (std::vector<std::optional<int>>{1, 2, std::nullopt}));
  EXPECT_THROW(parse_depths("x"), GenerationError);
  EXPECT_THROW(parse_depths("3..1"), GenerationError);
  EXPECT_THROW(parse_depths(""), GenerationError);
}

TEST(Closure, TwoChain) {
  auto t = theory_of({"Chris is blue.", "If someone is blue then they are quiet.",
                      "If someone is quiet then they are cold."});
  auto c = gold_closure(t);
  EXPECT_EQ(c.conclusion_count(), 2u);
  EXPECT_EQ(c.derivations.at(atom("Chris is quiet.")).size(), 1u);
  EXPECT_EQ(c.derivations.at(atom("Chris is cold.")).size(), 1u);
  EXPECT_EQ(c.min_depth.at(atom("Chris is quiet.")), 1);
  EXPECT_EQ(c.min_depth.at(atom("Chris is cold.")), 2);
  EXPECT_FALSE(c.contradiction);
}

TEST(Closure, NoRules) {
  auto t = theory_of({"Chris is blue.", "Bob is red."});
  auto c = gold_closure(t);
  EXPECT_EQ(c.atoms, c.given);
  EXPECT_TRUE(c.derivations.empty());
}

TEST(Closure, RuleConcludingGivenFact) {
  auto t = theory_of({"Chris is blue.", "Chris is quiet.", "If someone is blue then they are quiet."});
  auto c = gold_closure(t);
  EXPECT_EQ(c.atoms.size(), 2u);
  EXPECT_EQ(c.derivations.at(atom("Chris is quiet.")).size(), 1u);
}

TEST(Closure, FlagsContradiction) {
  auto t = theory_of({"Bob is big.", "If someone is big then they are not big."});
  EXPECT_TRUE(gold_closure(t).contradiction);
}

TEST(Closure, MatchesNaiveOracle) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto t = oracle::random_theory(seed);
    auto c = gold_closure(t);
    ASSERT_EQ(c.atoms, oracle::closure(t)) << seed;
    ASSERT_EQ(c.min_depth, oracle::min_depths(t)) << seed;
  }
}

TEST(AssignGold, Examples) {
  auto t = theory_of({"Chris is blue.", "If someone is blue then they are quiet.",
                      "If someone is quiet then they are cold.", "Anne is not red."});
  auto c = gold_closure(t);
  auto cold = assign_gold(t, c, parse_statement("Chris is cold."));
  EXPECT_EQ(cold.label, Label::True);
  EXPECT_EQ(cold.depth, 2);
  EXPECT_EQ(cold.proofs, std::vector<std::string>{"(sent2 & sent1) -> int1 ; (sent3 & int1) -> hypothesis"});

  auto white = assign_gold(t, c, parse_statement("Chris is white."));
  EXPECT_EQ(white.label, Label::Unknown);
  EXPECT_FALSE(white.depth);
  EXPECT_TRUE(white.proofs.empty());

  auto red = assign_gold(t, c, parse_statement("Anne is red."));
  EXPECT_EQ(red.label, Label::False);
  EXPECT_EQ(red.depth, 0);
  EXPECT_EQ(red.proofs, std::vector<std::string>{"sent4 -> hypothesis"});
}

TEST(AssignGold, AlternativeProofsSortedByDepth) {
  auto t = theory_of({"Bob is big.", "If someone is big then they are red.",
                      "If someone is red then they are kind.", "If someone is big then they are kind."});
  auto g = assign_gold(t, gold_closure(t), parse_statement("Bob is kind."));
  EXPECT_EQ(g.depth, 1);
  EXPECT_EQ(g.proofs, (std::vector<std::string>{
                          "(sent4 & sent1) -> hypothesis",
                          "(sent2 & sent1) -> int1 ; (sent3 & int1) -> hypothesis"}));
}

TEST(AssignGold, TruncatesAtCap) {
  auto t = theory_of({"Bob is big.", "Bob is red.", "If someone is big then they are kind.",
                      "If someone is red then they are kind.", "If someone is kind then they are cold.",
                      "If someone is big then they are cold."});
  auto g = assign_gold(t, gold_closure(t), parse_statement("Bob is cold."), 2);
  EXPECT_TRUE(g.truncated);
  EXPECT_EQ(g.proofs.size(), 2u);
  EXPECT_EQ(g.depth, 1);
  EXPECT_FALSE(assign_gold(t, gold_closure(t), parse_statement("Bob is cold.")).truncated);
}

TEST(AssignGold, ProofSetMatchesBruteForce) {
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    auto t = oracle::random_theory(seed);
    auto c = gold_closure(t);
    if (c.contradiction) continue;
    const auto depths = oracle::min_depths(t);
    for (const auto& target : c.atoms) {
      auto g = assign_gold(t, c, Statement{target});
      ASSERT_EQ(g.label, Label::True);
      ASSERT_EQ(g.depth, depths.at(target));
      for (const auto& p : g.proofs) {
        auto check = check_proof(t, parse_proof(p), target);
        ASSERT_TRUE(check.valid) << check.error;
      }
      bool too_big = false;
      auto want = brute_force_proofs(t, c, target, false, too_big);
      if (too_big || g.truncated) continue;
      ASSERT_EQ(std::set<std::string>(g.proofs.begin(), g.proofs.end()), want) << seed;
      ++compared;
    }
  }
  EXPECT_GT(compared, 1000);
}

TEST(Generate, DepthZeroAsksAGivenFact) {
  GenConfig cfg;
  auto in = generate_instance(cfg, 0, 0, 11);
  const auto& q = in.questions.front();
  EXPECT_EQ(q.gold.label, Label::True);
  EXPECT_EQ(q.gold.depth, 0);
  auto lines = in.theory.lines();
  EXPECT_NE(std::find(lines.begin(), lines.end(), render(q.statement)), lines.end());
}

TEST(Generate, TargetDepthAndLabelsMatchOracle) {
  GenConfig cfg;
  for (int d = 0; d <= 5; ++d) {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      auto in = generate_instance(cfg, d, 0, seed * 100 + d);
      const auto depths = oracle::min_depths(in.theory);
      const auto closure = oracle::closure(in.theory);
      bool goal_found = false;
      std::set<Label> labels;
      for (const auto& q : in.questions) {
        ASSERT_EQ(q.gold.label, oracle::label(in.theory, q.statement.atom));
        labels.insert(q.gold.label);
        if (q.gold.label == Label::Unknown) {
          ASSERT_FALSE(q.gold.depth);
          continue;
        }
        const Atom proven = q.gold.label == Label::True ? q.statement.atom : negated(q.statement.atom);
        ASSERT_EQ(q.gold.depth, depths.at(proven));
        if (q.gold.depth == d) goal_found = true;
      }
      EXPECT_TRUE(goal_found);
      EXPECT_EQ(labels.size(), 3u);
      for (const auto& a : closure) ASSERT_FALSE(closure.contains(negated(a)));
    }
  }
}

TEST(Generate, UnprovableTarget) {
  GenConfig cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto in = generate_instance(cfg, std::nullopt, 0, seed);
    int unknown = 0;
    for (const auto& q : in.questions) unknown += q.gold.label == Label::Unknown;
    EXPECT_GE(unknown, 3);
  }
}

TEST(Generate, SeedDeterminism) {
  GenConfig cfg;
  cfg.target_depths = parse_depths("0..5,U");
  cfg.theories = 21;
  cfg.seed = 99;
  auto a = generate_dataset(cfg);
  auto b = generate_dataset(cfg);
  auto c = generate_dataset(cfg, 4);
  ASSERT_EQ(a.size(), 21u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(dump(a[i]), dump(b[i]));
    EXPECT_EQ(dump(a[i]), dump(c[i]));
  }
  cfg.seed = 100;
  EXPECT_NE(dump(generate_dataset(cfg)[3]), dump(a[3]));
}

TEST(Generate, InvalidConfigRejected) {
  GenConfig cfg;
  cfg.entities = {3, 1};
  EXPECT_THROW(generate_instance(cfg, 1, 0, 0), GenerationError);
  cfg = {};
  cfg.attributes = {"big"};
  cfg.relation_probability = 0.0;
  cfg.names = {"Anne"};
  cfg.entities = {1, 1};
  cfg.proper_name_probability = 1.0;
  cfg.max_retries = 3;
  EXPECT_THROW(generate_instance(cfg, 5, 0, 0), GenerationError);
}

TEST(Generate, GoalDirectedTraceLengthEqualsDepth) {
  GenConfig cfg;
  cfg.target_depths = parse_depths("1..5");
  cfg.theories = 40;
  cfg.seed = 5;
  for (const auto& in : generate_dataset(cfg)) {
    for (const auto& q : in.questions) {
      if (q.gold.label != Label::True) continue;
      GoalDirectedStrategy goal;
      auto trace = run(in.theory, q.statement, goal);
      EXPECT_EQ(trace.composer_calls, *q.gold.depth) << q.id;
    }
  }
}

TEST(SampleSentences, RoundTrip) {
  auto lines = sample_sentences(3, 2000);
  ASSERT_EQ(lines.size(), 2000u);
  std::set<std::string> forms;
  for (const auto& l : lines) {
    ASSERT_EQ(render(parse_sentence(l, 0)), l);
    forms.insert(l.substr(0, 3));
  }
  EXPECT_GT(forms.size(), 5u);
}

TEST(Perturb, SubjectModeRenamesEveryName) {
  auto t = theory_of({"Charlie is blue.", "If someone is blue then they are kind.", "The cat likes Charlie."});
  Instance in{t, {{"t-q1", parse_statement("Charlie is kind."), {}}}};
  in.questions[0].gold = assign_gold(t, gold_closure(t), in.questions[0].statement);
  auto set = perturb(in, PerturbMode::Subject, 1, 5);
  ASSERT_EQ(set.variants.size(), 5u);
  for (const auto& v : set.variants) {
    const auto& name = v.mapping.subjects.at("Charlie");
    const auto pool = vocab::robust_names();
    EXPECT_NE(std::find(pool.begin(), pool.end(), name), pool.end());
    EXPECT_TRUE(v.mapping.attributes.empty());
    EXPECT_EQ(v.instance.theory.lines()[0], name + " is blue.");
    EXPECT_EQ(v.instance.questions[0].id, "t-v" + std::to_string(v.index) + "-q1");
    EXPECT_EQ(v.instance.questions[0].gold, in.questions[0].gold);
    EXPECT_TRUE(v.mapping.subjects.contains("cat"));
  }
}

TEST(Perturb, AttributeModeAndInverse) {
  GenConfig cfg;
  auto in = generate_instance(cfg, 3, 0, 8);
  for (auto mode : {PerturbMode::Subject, PerturbMode::Attribute, PerturbMode::Both}) {
    auto set = perturb(in, mode, 2, 5);
    for (const auto& v : set.variants) {
      ASSERT_TRUE(v.mapping.injective());
      if (mode != PerturbMode::Subject) {
        const auto pool = vocab::robust_attributes();
        for (const auto& [from, to] : v.mapping.attributes)
          EXPECT_NE(std::find(pool.begin(), pool.end(), to), pool.end());
      }
      auto inv = v.mapping.inverse();
      auto back = inv.apply(v.instance.theory);
      back.id = in.theory.id;
      EXPECT_EQ(back.lines(), in.theory.lines());
      for (std::size_t i = 0; i < in.questions.size(); ++i) {
        EXPECT_EQ(inv.apply(v.instance.questions[i].statement), in.questions[i].statement);
        EXPECT_EQ(oracle::label(v.instance.theory, v.instance.questions[i].statement.atom),
                  in.questions[i].gold.label);
      }
      std::vector<std::string> text;
      for (const auto& l : v.instance.theory.lines()) text.push_back(inv.apply_text(l));
      EXPECT_EQ(text, in.theory.lines());
    }
  }
}

TEST(Perturb, PoolExhausted) {
  std::vector<std::string> lines;
  for (int i = 0; i < 19; ++i) lines.push_back("Name" + std::string(1, static_cast<char>('a' + i)) + " is big.");
  Instance in{theory_of(lines), {}};
  EXPECT_THROW(perturb(in, PerturbMode::Subject, 1, 1), PoolExhaustedError);
  EXPECT_NO_THROW(perturb(in, PerturbMode::Attribute, 1, 1));
}

TEST(RenamingMap, NonInjectiveHasNoInverse) {
  RenamingMap m{PerturbMode::Subject, {{"Anne", "Paul"}, {"Bob", "Paul"}}, {}};
  EXPECT_FALSE(m.injective());
  EXPECT_THROW(m.inverse(), MappingError);
}

TEST(TrainingRecords, CountsFollowGoldSteps) {
  auto t = theory_of({"Chris is blue.", "If someone is blue then they are quiet.",
                      "If someone is quiet then they are cold."});
  auto c = gold_closure(t);
  Instance in{t, {}};
  for (auto s : {"Chris is cold.", "Chris is white."}) {
    Statement st = parse_statement(s);
    in.questions.push_back({std::string("t-") + s, st, assign_gold(t, c, st)});
  }
  auto rec = emit_training_records(in);
  EXPECT_EQ(rec.rs.size(), 2u + 1u + 1u);
  EXPECT_EQ(rec.fs.size(), 2u);
  EXPECT_EQ(rec.kc.size(), 2u);
  EXPECT_EQ(rec.rs[0].label, 1);
  EXPECT_EQ(rec.rs[1].label, 2);
  EXPECT_EQ(rec.rs[2].label, 0);
  EXPECT_EQ(rec.rs[2].facts.back(), "Chris is cold.");
  EXPECT_EQ(rec.rs[3].label, 0);
  EXPECT_EQ(rec.kc[0].rule, "If someone is blue then they are quiet.");
  EXPECT_EQ(rec.kc[0].facts, std::vector<std::string>{"Chris is blue."});
  EXPECT_EQ(rec.kc[0].conclusion, "Chris is quiet.");
  EXPECT_EQ(rec.fs[1].label, std::vector<int>{1});
}

TEST(TrainingRecords, ConjunctiveStepSelectsTwoFacts) {
  auto t = theory_of({"Bob is smart.", "Bob is young.", "All smart, young things are nice."});
  Statement st = parse_statement("Bob is nice.");
  Instance in{t, {{"q", st, assign_gold(t, gold_closure(t), st)}}};
  auto rec = emit_training_records(in);
  ASSERT_EQ(rec.fs.size(), 1u);
  EXPECT_EQ(rec.fs[0].label, (std::vector<int>{0, 1}));
  EXPECT_EQ(rec.kc[0].conclusion, "Bob is nice.");
}
