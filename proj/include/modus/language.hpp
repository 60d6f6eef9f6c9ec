#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace modus {

enum class EntityKind { ProperName, CommonNoun };

// A named individual. Proper names render bare ("Charlie"), common nouns
// with the definite article ("the grandmother").
struct Entity {
  EntityKind kind = EntityKind::ProperName;
  std::string surface;

  static Entity proper(std::string name);
  static Entity common(std::string noun);

  std::string render(bool sentence_initial = false) const;

  auto operator<=>(const Entity&) const = default;
};

// The single bound variable of a quantified rule ("X").
struct Variable {
  auto operator<=>(const Variable&) const = default;
};

using Term = std::variant<Variable, Entity>;

inline bool is_variable(const Term& t) { return std::holds_alternative<Variable>(t); }

enum class Polarity { Pos, Neg };

inline Polarity flip(Polarity p) { return p == Polarity::Pos ? Polarity::Neg : Polarity::Pos; }

enum class PredicateKind { Attribute, Relation };

// "is <attribute>" or "<verb>s <object>". Relation objects are always ground.
struct Predicate {
  PredicateKind kind = PredicateKind::Attribute;
  std::string word;  // attribute token, or base form of the verb
  std::optional<Entity> object;

  static Predicate attribute(std::string attr);
  static Predicate relation(std::string verb, Entity object);

  auto operator<=>(const Predicate&) const = default;
};

struct Atom {
  Term subject;
  Predicate predicate;
  Polarity polarity = Polarity::Pos;

  bool is_ground() const { return !is_variable(subject); }

  auto operator<=>(const Atom&) const = default;
};

Atom negated(Atom atom);

struct Fact {
  std::string id;
  Atom atom;
  std::optional<int> derived_at;  // step index; nullopt for given facts

  bool is_given() const { return !derived_at.has_value(); }
};

enum class Quantifier { People, Things, None };

// Surface shape of a rule. `All` and `Bare` only apply to rules whose
// premises are positive attributes of the variable and whose conclusion is an
// attribute of the variable.
enum class RuleForm { Conditional, All, Bare };

struct Rule {
  std::string id;
  std::vector<Atom> premises;
  Atom conclusion;
  Quantifier quantifier = Quantifier::None;
  RuleForm form = RuleForm::Conditional;

  bool has_variable() const { return quantifier != Quantifier::None; }
};

struct Statement {
  Atom atom;

  auto operator<=>(const Statement&) const = default;
};

using Sentence = std::variant<Fact, Rule>;

struct Theory {
  std::string id;
  std::vector<Fact> facts;
  std::vector<Rule> rules;

  std::size_t size() const { return facts.size() + rules.size(); }

  // Sentences in source order (by sentence number).
  std::vector<Sentence> sentences() const;
  // Rendered sentences in source order.
  std::vector<std::string> lines() const;
  // Every entity mentioned, in order of first mention.
  std::vector<Entity> entities() const;

  const Fact* find_fact(std::string_view id) const;
  const Rule* find_rule(std::string_view id) const;
  std::optional<std::size_t> rule_index(std::string_view id) const;
};

struct ParseOptions {
  bool strict_vocabulary = false;
};

// `position` is the 0-based index of the sentence in its theory; the
// sentence id is "sent<position+1>".
Sentence parse_sentence(std::string_view text, std::size_t position,
                        const ParseOptions& options = {});

// Empty input yields an empty theory. Errors from every line are collected
// into one TheoryParseError.
Theory parse_theory(std::span<const std::string> lines, const ParseOptions& options = {},
                    std::string id = {});

Statement parse_statement(std::string_view text, const ParseOptions& options = {});

std::string render(const Atom& ground_atom);
std::string render(const Fact& fact);
std::string render(const Rule& rule);
std::string render(const Statement& statement);
std::string render(const Sentence& sentence);

Statement negate(const Statement& statement);

// Throws modus::Error when the rule breaks a structural invariant.
void validate_rule(const Rule& rule);

std::string sentence_id(std::size_t position);
std::optional<std::size_t> sentence_number(std::string_view id);

// Collapses whitespace runs and trims.
std::string normalize_whitespace(std::string_view text);

std::string_view to_string(Polarity p);

}  // namespace modus
