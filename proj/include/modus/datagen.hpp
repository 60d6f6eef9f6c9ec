#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "modus/language.hpp"
#include "modus/proof.hpp"
#include "modus/random.hpp"
#include "modus/reasoner.hpp"

namespace modus {

struct IntRange {
  int min = 0;
  int max = 0;

  bool operator==(const IntRange&) const = default;
};

struct GenConfig {
  // Instance i targets target_depths[i % size]; nullopt asks for a theory
  // whose goal is unprovable.
  std::vector<std::optional<int>> target_depths{0, 1, 2, 3};
  int theories = 10;
  std::uint64_t seed = 0;
  std::string id_prefix = "T";

  IntRange entities{3, 4};
  IntRange facts_range{0, 2};       // filler facts
  IntRange rules_range{0, 1};       // filler rules
  IntRange distractor_chains{2, 3};
  IntRange distractor_length{1, 3};
  IntRange distractor_entities{1, 2};
  // When false, each distractor chain ends in a goal-chain predicate about
  // another entity, so it intersects the goal's relevance cone.
  bool cone_disjoint_distractors = true;

  double relation_probability = 0.3;
  double negation_probability = 0.2;
  double ground_rule_probability = 0.15;
  double proper_name_probability = 0.5;
  // Probability of each extra given-fact premise on a goal-chain rule.
  double extra_premise_probability = 0.3;

  std::vector<std::string> names;       // empty: training pool
  std::vector<std::string> nouns;       // empty: training pool
  std::vector<std::string> attributes;  // empty: training pool

  std::size_t proof_cap = 64;
  int max_retries = 200;

  // Shallower theories with few distractors, tuned so the number of
  // conclusions per theory resembles a depth-3 benchmark split.
  static GenConfig d3_like();

  // Throws GenerationError on an unusable configuration.
  void validate() const;
};

// Parses "0..3", "3", "0,1,5", "U" and mixes such as "0..2,U".
std::vector<std::optional<int>> parse_depths(std::string_view text);

// Every conclusion derivable from a theory with every distinct way of
// deriving it.
struct Closure {
  std::set<Atom> given;
  std::set<Atom> atoms;  // given and derived
  std::map<Atom, std::vector<Derivation>> derivations;
  std::map<Atom, int> min_depth;  // smallest derivation height
  bool contradiction = false;

  std::size_t conclusion_count() const { return atoms.size() - given.size(); }
};

Closure gold_closure(const Theory& theory);

struct GoldAnnotation {
  Label label = Label::Unknown;
  std::optional<int> depth;         // nullopt is "N/A"
  std::vector<std::string> proofs;  // canonical forms, sorted by (depth, text)
  bool truncated = false;

  bool operator==(const GoldAnnotation&) const = default;
};

GoldAnnotation assign_gold(const Theory& theory, const Closure& closure, const Statement& statement,
                           std::size_t proof_cap = 64);

struct Question {
  std::string id;
  Statement statement;
  GoldAnnotation gold;
};

struct Instance {
  Theory theory;
  std::vector<Question> questions;
};

// Target: a depth, or nullopt for an unprovable goal. `index` names the
// instance. Deterministic in (config, target, index, seed).
Instance generate_instance(const GenConfig& config, std::optional<int> target, std::size_t index,
                           std::uint64_t seed);

// config.theories instances; instance i draws from mix_seed(config.seed, i),
// so the output does not depend on `jobs`.
std::vector<Instance> generate_dataset(const GenConfig& config, int jobs = 1);

// Random grammatical sentences of every form, for round-trip testing.
std::vector<std::string> sample_sentences(std::uint64_t seed, std::size_t count,
                                          const GenConfig& config = {});

// ---------------------------------------------------------------------------
// Perturbation

enum class PerturbMode { Subject, Attribute, Both };

std::string_view to_string(PerturbMode mode);
std::optional<PerturbMode> perturb_mode_from_string(std::string_view text);

// Injective renaming of proper names, common nouns (the subject category)
// and attribute words.
struct RenamingMap {
  PerturbMode mode = PerturbMode::Subject;
  std::map<std::string, std::string> subjects;
  std::map<std::string, std::string> attributes;

  bool injective() const;
  // Throws MappingError when the map is not injective.
  RenamingMap inverse() const;

  std::string word(const std::string& w) const;
  Entity apply(const Entity& e) const;
  Atom apply(const Atom& a) const;
  Theory apply(const Theory& t) const;
  Statement apply(const Statement& s) const;
  // Token-wise renaming of free text (proof strings, rendered sentences).
  std::string apply_text(std::string_view text) const;

  bool operator==(const RenamingMap&) const = default;
};

struct Variant {
  Instance instance;
  RenamingMap mapping;
  int index = 0;  // 1-based
};

struct EquivalenceSet {
  Instance base;
  std::vector<Variant> variants;
};

// Throws PoolExhaustedError when the robustness pools are too small.
EquivalenceSet perturb(const Instance& instance, PerturbMode mode, std::uint64_t seed, int n = 5);

// ---------------------------------------------------------------------------
// Training records

struct RsRecord {
  std::string question_id;
  std::string statement;
  std::vector<std::string> facts;
  std::vector<std::string> rules;
  int label = 0;  // 1-based rule index, 0 for STOP
};

struct FsRecord {
  std::string question_id;
  std::string statement;
  std::string rule;
  std::vector<std::string> facts;
  std::vector<int> label;  // 0-based indices into facts
};

struct KcRecord {
  std::string question_id;
  std::string rule;
  std::vector<std::string> facts;
  std::string conclusion;
};

struct TrainingRecords {
  std::vector<RsRecord> rs;
  std::vector<FsRecord> fs;
  std::vector<KcRecord> kc;
};

// Walks the first gold proof of every question step by step.
TrainingRecords emit_training_records(const Instance& instance);

}  // namespace modus
