#include "modus/strategies.hpp"

#include "modus/random.hpp"

namespace modus {

bool AtomPattern::matches(const Atom& atom) const {
  if (atom.predicate != predicate || atom.polarity != polarity) return false;
  if (!subject || is_variable(atom.subject)) return true;
  return std::get<Entity>(atom.subject) == *subject;
}

bool RelevanceCone::covers(const Atom& atom) const {
  for (const auto& p : relevant_atom_patterns) {
    if (p.matches(atom)) return true;
  }
  return false;
}

namespace {

AtomPattern pattern_of(const Atom& atom) {
  AtomPattern p{atom.predicate, atom.polarity, std::nullopt};
  if (!is_variable(atom.subject)) p.subject = std::get<Entity>(atom.subject);
  return p;
}

// Two patterns unify when predicate and polarity agree and the subjects are
// equal or either is a wildcard.
bool unifies(const AtomPattern& a, const AtomPattern& b) {
  if (a.predicate != b.predicate || a.polarity != b.polarity) return false;
  return !a.subject || !b.subject || *a.subject == *b.subject;
}

struct Candidate {
  std::size_t rule_index;
  Binding binding;
};

// First novel binding per candidate rule, in rule order.
template <class Filter>
std::vector<Candidate> first_novel_per_rule(const FactStore& store, const Theory& theory,
                                            Filter&& admit, bool stop_at_first) {
  std::vector<Candidate> out;
  for (std::size_t r = 0; r < theory.rules.size(); ++r) {
    const Rule& rule = theory.rules[r];
    if (!admit(rule, nullptr)) continue;
    for (auto& b : applicable_bindings(rule, store)) {
      Atom c = compose(rule, b);
      if (store.contains(c) || !admit(rule, &c)) continue;
      out.push_back({r, std::move(b)});
      break;
    }
    if (stop_at_first && !out.empty()) break;
  }
  return out;
}

SelectionDecision choose(std::vector<Candidate> candidates, std::optional<std::uint64_t> shuffle,
                         std::mt19937_64& rng) {
  if (candidates.empty()) return SelectionDecision::stop();
  std::size_t pick = shuffle ? uniform_index(rng, candidates.size()) : 0;
  return SelectionDecision::go(candidates[pick].rule_index, std::move(candidates[pick].binding));
}

}  // namespace

RelevanceCone relevance_cone(const Theory& theory, const Statement& statement) {
  RelevanceCone cone;
  cone.relevant_atom_patterns.insert(pattern_of(statement.atom));
  cone.relevant_atom_patterns.insert(pattern_of(negated(statement.atom)));
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& rule : theory.rules) {
      if (cone.relevant_rules.contains(rule.id)) continue;
      const auto head = pattern_of(rule.conclusion);
      bool hit = false;
      for (const auto& p : cone.relevant_atom_patterns) {
        if (unifies(head, p)) {
          hit = true;
          break;
        }
      }
      if (!hit) continue;
      cone.relevant_rules.insert(rule.id);
      for (const auto& premise : rule.premises) cone.relevant_atom_patterns.insert(pattern_of(premise));
      grew = true;
    }
  }
  return cone;
}

SelectionDecision exhaustive_select(const FactStore& store, const Theory& theory) {
  std::mt19937_64 unused;
  return choose(first_novel_per_rule(
                    store, theory, [](const Rule&, const Atom*) { return true; }, true),
                std::nullopt, unused);
}

SelectionDecision goal_directed_select(const FactStore& store, const Theory& theory,
                                       const Statement& statement, const RelevanceCone& cone) {
  if (store.contains(statement.atom) || store.contains(negated(statement.atom)))
    return SelectionDecision::stop();
  std::mt19937_64 unused;
  return choose(first_novel_per_rule(
                    store, theory,
                    [&](const Rule& rule, const Atom* conclusion) {
                      if (!cone.relevant_rules.contains(rule.id)) return false;
                      return conclusion == nullptr || cone.covers(*conclusion);
                    },
                    true),
                std::nullopt, unused);
}

std::string_view to_string(StrategyKind kind) {
  return kind == StrategyKind::Exhaustive ? "exhaustive" : "goal";
}

std::optional<StrategyKind> strategy_from_string(std::string_view name) {
  if (name == "exhaustive") return StrategyKind::Exhaustive;
  if (name == "goal") return StrategyKind::GoalDirected;
  return std::nullopt;
}

ExhaustiveStrategy::ExhaustiveStrategy(std::optional<std::uint64_t> shuffle_seed)
    : shuffle_seed_(shuffle_seed) {}

void ExhaustiveStrategy::prepare(const Theory&, const Statement&) {
  if (shuffle_seed_) rng_.seed(*shuffle_seed_);
}

SelectionDecision ExhaustiveStrategy::select(const FactStore& store, const Theory& theory,
                                             const Statement&) {
  if (!shuffle_seed_) return exhaustive_select(store, theory);
  return choose(first_novel_per_rule(
                    store, theory, [](const Rule&, const Atom*) { return true; }, false),
                shuffle_seed_, rng_);
}

GoalDirectedStrategy::GoalDirectedStrategy(std::optional<std::uint64_t> shuffle_seed)
    : shuffle_seed_(shuffle_seed) {}

void GoalDirectedStrategy::prepare(const Theory& theory, const Statement& statement) {
  cone_ = relevance_cone(theory, statement);
  if (shuffle_seed_) rng_.seed(*shuffle_seed_);
}

SelectionDecision GoalDirectedStrategy::select(const FactStore& store, const Theory& theory,
                                               const Statement& statement) {
  if (!shuffle_seed_) return goal_directed_select(store, theory, statement, cone_);
  if (store.contains(statement.atom) || store.contains(negated(statement.atom)))
    return SelectionDecision::stop();
  return choose(first_novel_per_rule(
                    store, theory,
                    [&](const Rule& rule, const Atom* conclusion) {
                      if (!cone_.relevant_rules.contains(rule.id)) return false;
                      return conclusion == nullptr || cone_.covers(*conclusion);
                    },
                    false),
                shuffle_seed_, rng_);
}

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, std::optional<std::uint64_t> shuffle_seed) {
  if (kind == StrategyKind::Exhaustive) return std::make_unique<ExhaustiveStrategy>(shuffle_seed);
  return std::make_unique<GoalDirectedStrategy>(shuffle_seed);
}

}  // namespace modus
