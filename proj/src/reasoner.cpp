#include "modus/reasoner.hpp"

#include <algorithm>
#include <functional>
#include <limits>

#include "modus/errors.hpp"

namespace modus {

// ---------------------------------------------------------------------------
// FactStore

FactStore::FactStore(const Theory& theory) {
  std::vector<const Fact*> given;
  for (const auto& f : theory.facts) given.push_back(&f);
  std::stable_sort(given.begin(), given.end(), [](const Fact* a, const Fact* b) {
    return sentence_number(a->id).value_or(0) < sentence_number(b->id).value_or(0);
  });
  for (const Fact* f : given) {
    auto [it, fresh] = by_atom_.emplace(f->atom, entries_.size());
    if (fresh) {
      by_id_.emplace(f->id, entries_.size());
      entries_.push_back(*f);
    } else {
      by_id_.emplace(f->id, it->second);
    }
  }
  given_count_ = entries_.size();
  auto entities = theory.entities();
  for (std::size_t i = 0; i < entities.size(); ++i) entity_rank_.emplace(entities[i], i);
}

const Fact* FactStore::find(const Atom& atom) const {
  auto it = by_atom_.find(atom);
  return it == by_atom_.end() ? nullptr : &entries_[it->second];
}

const Fact* FactStore::find_id(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

std::size_t FactStore::position(std::string_view id) const { return by_id_.find(id)->second; }

std::size_t FactStore::entity_rank(const Entity& entity) const {
  auto it = entity_rank_.find(entity);
  return it == entity_rank_.end() ? std::numeric_limits<std::size_t>::max() : it->second;
}

const Fact& FactStore::add_derived(Atom atom, int step_index) {
  Fact fact{"int" + std::to_string(step_index), std::move(atom), step_index};
  by_atom_.emplace(fact.atom, entries_.size());
  by_id_.emplace(fact.id, entries_.size());
  entries_.push_back(std::move(fact));
  return entries_.back();
}

// ---------------------------------------------------------------------------
// Bindings

namespace {

bool unify(const Atom& premise, const Atom& fact, std::optional<Entity>& subst) {
  if (premise.polarity != fact.polarity || premise.predicate != fact.predicate) return false;
  const auto& subject = std::get<Entity>(fact.subject);
  if (!is_variable(premise.subject)) return std::get<Entity>(premise.subject) == subject;
  if (subst) return *subst == subject;
  subst = subject;
  return true;
}

Atom substitute(const Atom& atom, const std::optional<Entity>& subst) {
  if (!is_variable(atom.subject)) return atom;
  if (!subst) throw Error("substitution leaves the rule variable free");
  Atom out = atom;
  out.subject = *subst;
  return out;
}

}  // namespace

std::vector<Binding> applicable_bindings(const Rule& rule, const FactStore& store) {
  struct Candidate {
    std::optional<Entity> subst;
    std::vector<std::size_t> positions;
  };
  std::vector<Candidate> found;
  const auto facts = store.entries();
  std::vector<std::size_t> chosen;
  std::function<void(std::size_t, const std::optional<Entity>&)> search =
      [&](std::size_t i, const std::optional<Entity>& subst) {
        if (i == rule.premises.size()) {
          if (rule.has_variable() && !subst) return;
          found.push_back({subst, chosen});
          return;
        }
        for (std::size_t pos = 0; pos < facts.size(); ++pos) {
          auto s = subst;
          if (!unify(rule.premises[i], facts[pos].atom, s)) continue;
          chosen.push_back(pos);
          search(i + 1, s);
          chosen.pop_back();
        }
      };
  search(0, std::nullopt);

  std::stable_sort(found.begin(), found.end(), [&](const Candidate& a, const Candidate& b) {
    const auto ra = a.subst ? store.entity_rank(*a.subst) : 0;
    const auto rb = b.subst ? store.entity_rank(*b.subst) : 0;
    if (ra != rb) return ra < rb;
    return a.positions < b.positions;
  });

  std::vector<Binding> out;
  out.reserve(found.size());
  for (auto& c : found) {
    Binding b{std::move(c.subst), {}};
    for (auto pos : c.positions) b.premise_facts.push_back(facts[pos].id);
    out.push_back(std::move(b));
  }
  return out;
}

bool binding_applies(const Rule& rule, const Binding& binding, const FactStore& store) {
  if (binding.premise_facts.size() != rule.premises.size()) return false;
  if (rule.has_variable() != binding.substitution.has_value()) return false;
  std::optional<Entity> subst = binding.substitution;
  for (std::size_t i = 0; i < rule.premises.size(); ++i) {
    const Fact* f = store.find_id(binding.premise_facts[i]);
    if (f == nullptr || !unify(rule.premises[i], f->atom, subst)) return false;
  }
  return subst == binding.substitution;
}

Atom compose(const Rule& rule, const Binding& binding) {
  return substitute(rule.conclusion, binding.substitution);
}

// ---------------------------------------------------------------------------
// Pipeline

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::GoalReached: return "GoalReached";
    case StopReason::Fixpoint: return "Fixpoint";
    case StopReason::BudgetExhausted: return "BudgetExhausted";
    case StopReason::StrategyStop: return "StrategyStop";
  }
  return "Fixpoint";
}

std::optional<StopReason> stop_reason_from_string(std::string_view text) {
  for (auto r : {StopReason::GoalReached, StopReason::Fixpoint, StopReason::BudgetExhausted,
                 StopReason::StrategyStop}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::True: return "true";
    case Label::False: return "false";
    case Label::Unknown: return "unknown";
  }
  return "unknown";
}

std::optional<Label> label_from_string(std::string_view text) {
  if (text == "true") return Label::True;
  if (text == "false") return Label::False;
  if (text == "unknown") return Label::Unknown;
  return std::nullopt;
}

std::optional<OneHopStep> step(FactStore& store, const Theory& theory,
                               const SelectionDecision& decision) {
  if (decision.is_stop()) return std::nullopt;
  const auto& proceed = *decision.proceed;
  if (proceed.rule_index >= theory.rules.size())
    throw StepError(StepError::Kind::StaleDecision, "decision names a rule outside the theory");
  const Rule& rule = theory.rules[proceed.rule_index];
  if (!binding_applies(rule, proceed.binding, store))
    throw StepError(StepError::Kind::StaleDecision,
                    "binding for " + rule.id + " does not hold in the current store");
  Atom conclusion = compose(rule, proceed.binding);
  if (store.contains(conclusion))
    throw StepError(StepError::Kind::DuplicateConclusion,
                    "'" + render(conclusion) + "' is already known");
  const int index = static_cast<int>(store.derived_count()) + 1;
  const Fact& added = store.add_derived(std::move(conclusion), index);
  return OneHopStep{rule.id, proceed.binding.premise_facts, added, index};
}

InferenceTrace run(const Theory& theory, const Statement& statement, Strategy& strategy,
                   std::optional<int> budget) {
  if (budget && *budget < 0) throw Error("budget must be non-negative");
  strategy.prepare(theory, statement);
  FactStore store(theory);
  InferenceTrace trace;
  const Atom refutation = negated(statement.atom);
  while (true) {
    if (strategy.goal_directed() && (store.contains(statement.atom) || store.contains(refutation))) {
      trace.stop_reason = StopReason::GoalReached;
      break;
    }
    if (budget && trace.composer_calls >= *budget) {
      trace.stop_reason = StopReason::BudgetExhausted;
      break;
    }
    auto decision = strategy.select(store, theory, statement);
    auto one = step(store, theory, decision);
    if (!one) {
      trace.stop_reason = strategy.goal_directed() ? StopReason::StrategyStop : StopReason::Fixpoint;
      break;
    }
    ++trace.composer_calls;
    if (store.contains(negated(one->conclusion.atom))) trace.contradiction = true;
    trace.steps.push_back(std::move(*one));
  }
  return trace;
}

namespace {

Provenance trace_provenance(const Theory& theory, const InferenceTrace& trace) {
  Provenance prov;
  std::map<std::string, Atom, std::less<>> atoms_by_id;
  std::vector<const Fact*> given;
  for (const auto& f : theory.facts) given.push_back(&f);
  std::stable_sort(given.begin(), given.end(), [](const Fact* a, const Fact* b) {
    return sentence_number(a->id).value_or(0) < sentence_number(b->id).value_or(0);
  });
  for (const Fact* f : given) {
    prov.emplace(f->atom, f->id);
    atoms_by_id.emplace(f->id, f->atom);
  }
  for (const auto& s : trace.steps) {
    Derivation d{s.rule_id, {}};
    for (const auto& id : s.fact_ids) {
      auto it = atoms_by_id.find(id);
      if (it == atoms_by_id.end())
        throw ProofError("trace step " + std::to_string(s.step_index) + " uses unknown fact " + id);
      d.premises.push_back(it->second);
    }
    prov.emplace(s.conclusion.atom, std::move(d));
    atoms_by_id.emplace(s.conclusion.id, s.conclusion.atom);
  }
  return prov;
}

}  // namespace

ProofGraph stitch_proof(const Theory& theory, const InferenceTrace& trace, const Atom& target,
                        bool negated) {
  auto prov = trace_provenance(theory, trace);
  if (!prov.contains(target)) throw ProofError("'" + render(target) + "' is neither given nor derived");
  return build_proof(target, prov, negated);
}

Verdict solve(const Theory& theory, const Statement& statement, const InferenceTrace& trace) {
  auto prov = trace_provenance(theory, trace);
  if (prov.contains(statement.atom)) return {Label::True, build_proof(statement.atom, prov, false)};
  const Atom refutation = negated(statement.atom);
  if (prov.contains(refutation)) return {Label::False, build_proof(refutation, prov, true)};
  return {Label::Unknown, std::nullopt};
}

}  // namespace modus
