#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "modus/language.hpp"
#include "modus/proof.hpp"

namespace modus {

// Given facts followed by derived conclusions, indexed by atom and by id.
// Derived facts are named "int<step>".
class FactStore {
 public:
  explicit FactStore(const Theory& theory);

  std::span<const Fact> entries() const { return entries_; }
  const Fact* find(const Atom& atom) const;
  const Fact* find_id(std::string_view id) const;
  bool contains(const Atom& atom) const { return find(atom) != nullptr; }
  // Position of a fact in entries(); precondition: the id exists.
  std::size_t position(std::string_view id) const;
  // Order of first mention in the theory. Entities never mentioned sort last.
  std::size_t entity_rank(const Entity& entity) const;
  std::size_t derived_count() const { return entries_.size() - given_count_; }

  const Fact& add_derived(Atom atom, int step_index);

 private:
  std::vector<Fact> entries_;
  std::map<Atom, std::size_t> by_atom_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::map<Entity, std::size_t> entity_rank_;
  std::size_t given_count_ = 0;
};

// A substitution for the rule variable (empty for ground rules) together
// with the facts matched by each premise, in premise order.
struct Binding {
  std::optional<Entity> substitution;
  std::vector<std::string> premise_facts;

  bool operator==(const Binding&) const = default;
};

// Every binding that satisfies all premises, ordered by the rank of the
// substituted entity and then by matched fact positions. Bindings whose
// conclusion is already known are included.
std::vector<Binding> applicable_bindings(const Rule& rule, const FactStore& store);

bool binding_applies(const Rule& rule, const Binding& binding, const FactStore& store);

// Ground conclusion of `rule` under `binding`. Throws modus::Error when the
// substitution leaves the variable free.
Atom compose(const Rule& rule, const Binding& binding);

struct OneHopStep {
  std::string rule_id;
  std::vector<std::string> fact_ids;
  Fact conclusion;
  int step_index = 0;  // 1-based
};

struct SelectionDecision {
  struct Proceed {
    std::size_t rule_index = 0;
    Binding binding;
  };

  std::optional<Proceed> proceed;

  static SelectionDecision stop() { return {}; }
  static SelectionDecision go(std::size_t rule_index, Binding binding) {
    return {Proceed{rule_index, std::move(binding)}};
  }
  bool is_stop() const { return !proceed.has_value(); }
};

enum class StopReason { GoalReached, Fixpoint, BudgetExhausted, StrategyStop };

std::string_view to_string(StopReason reason);
std::optional<StopReason> stop_reason_from_string(std::string_view text);

struct InferenceTrace {
  std::vector<OneHopStep> steps;
  StopReason stop_reason = StopReason::Fixpoint;
  int composer_calls = 0;
  // Set when some derived atom's negation is also known.
  bool contradiction = false;
};

// Selection policy plugged into `run`.
class Strategy {
 public:
  virtual ~Strategy() = default;

  // Called once per run before the first select.
  virtual void prepare(const Theory& theory, const Statement& statement) = 0;
  virtual SelectionDecision select(const FactStore& store, const Theory& theory,
                                   const Statement& statement) = 0;
  // Goal-directed strategies make `run` halt once the statement or its
  // negation is known.
  virtual bool goal_directed() const = 0;
  virtual std::string_view name() const = 0;
};

// Applies one decision. Returns nullopt (and leaves the store untouched) on
// Stop. Throws StepError on a stale binding or a duplicate conclusion.
std::optional<OneHopStep> step(FactStore& store, const Theory& theory,
                               const SelectionDecision& decision);

InferenceTrace run(const Theory& theory, const Statement& statement, Strategy& strategy,
                   std::optional<int> budget = std::nullopt);

enum class Label { True, False, Unknown };

std::string_view to_string(Label label);
std::optional<Label> label_from_string(std::string_view text);

struct Verdict {
  Label label = Label::Unknown;
  std::optional<ProofGraph> proof;
};

Verdict solve(const Theory& theory, const Statement& statement, const InferenceTrace& trace);

// Walks provenance back from `target` (a given fact or a conclusion in the
// trace). Throws ProofError when the target is unknown.
ProofGraph stitch_proof(const Theory& theory, const InferenceTrace& trace, const Atom& target,
                        bool negated = false);

}  // namespace modus
