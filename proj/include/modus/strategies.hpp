#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>

#include "modus/reasoner.hpp"

namespace modus {

// (predicate, polarity, subject-or-wildcard). A missing subject matches any
// entity.
struct AtomPattern {
  Predicate predicate;
  Polarity polarity = Polarity::Pos;
  std::optional<Entity> subject;

  bool matches(const Atom& atom) const;

  auto operator<=>(const AtomPattern&) const = default;
};

// Backward closure of the statement and its negation: the rules whose
// conclusion can feed a derivation of either, and the atom patterns such a
// derivation may pass through.
struct RelevanceCone {
  std::set<std::string> relevant_rules;
  std::set<AtomPattern> relevant_atom_patterns;

  bool covers(const Atom& atom) const;
};

RelevanceCone relevance_cone(const Theory& theory, const Statement& statement);

// First (rule index, binding) whose conclusion is new; Stop at fixpoint.
SelectionDecision exhaustive_select(const FactStore& store, const Theory& theory);

// As exhaustive_select, restricted to in-cone rules and in-cone conclusions.
// Stops as soon as the statement or its negation is known.
SelectionDecision goal_directed_select(const FactStore& store, const Theory& theory,
                                       const Statement& statement, const RelevanceCone& cone);

enum class StrategyKind { Exhaustive, GoalDirected };

std::string_view to_string(StrategyKind kind);
// "exhaustive" or "goal".
std::optional<StrategyKind> strategy_from_string(std::string_view name);

class ExhaustiveStrategy final : public Strategy {
 public:
  // With a shuffle seed, one candidate rule is picked at random each step
  // instead of the first one.
  explicit ExhaustiveStrategy(std::optional<std::uint64_t> shuffle_seed = std::nullopt);

  void prepare(const Theory& theory, const Statement& statement) override;
  SelectionDecision select(const FactStore& store, const Theory& theory,
                           const Statement& statement) override;
  bool goal_directed() const override { return false; }
  std::string_view name() const override { return "exhaustive"; }

 private:
  std::optional<std::uint64_t> shuffle_seed_;
  std::mt19937_64 rng_;
};

class GoalDirectedStrategy final : public Strategy {
 public:
  explicit GoalDirectedStrategy(std::optional<std::uint64_t> shuffle_seed = std::nullopt);

  void prepare(const Theory& theory, const Statement& statement) override;
  SelectionDecision select(const FactStore& store, const Theory& theory,
                           const Statement& statement) override;
  bool goal_directed() const override { return true; }
  std::string_view name() const override { return "goal"; }

  const RelevanceCone& cone() const { return cone_; }

 private:
  std::optional<std::uint64_t> shuffle_seed_;
  std::mt19937_64 rng_;
  RelevanceCone cone_;
};

std::unique_ptr<Strategy> make_strategy(StrategyKind kind,
                                        std::optional<std::uint64_t> shuffle_seed = std::nullopt);

}  // namespace modus
