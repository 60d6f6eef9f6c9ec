#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "modus/language.hpp"
#include "modus/reasoner.hpp"

// Deliberately naive reference implementations used to check the engine.
// They share no code with src/ beyond the data types.
namespace oracle {

using modus::Atom;
using modus::Entity;
using modus::Rule;
using modus::Theory;

// Every entity mentioned in the theory, in first-mention order.
std::vector<Entity> mentioned(const Theory& theory);

// Instantiates `rule` under every possible subject (or once if ground).
std::vector<std::pair<std::vector<Atom>, Atom>> groundings(const Rule& rule,
                                                           const std::vector<Entity>& universe);

// Naive fixpoint over all groundings.
std::set<Atom> closure(const Theory& theory);

// Smallest derivation height of every atom in the closure (given = 0).
std::map<Atom, int> min_depths(const Theory& theory);

// Three-way label by closure membership.
modus::Label label(const Theory& theory, const Atom& statement);

// Every binding by trying every subject and looking premises up by atom,
// sorted by (subject first-mention rank, premise fact positions).
std::vector<modus::Binding> bindings(const Rule& rule, const modus::FactStore& store,
                                     const Theory& theory);

// Small random theories over a tiny vocabulary so that rules interact often.
struct TheoryShape {
  int facts_min = 2, facts_max = 6;
  int rules_min = 1, rules_max = 6;
  bool relations = true;
  bool ground_rules = true;
  bool negation = true;
};

Theory random_theory(std::uint64_t seed, const TheoryShape& shape = {});

// A random ground statement over the same tiny vocabulary.
Atom random_statement(std::uint64_t seed);

}  // namespace oracle
