#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modus/datagen.hpp"
#include "modus/reasoner.hpp"

namespace modus {

// What a system said about one question.
struct Prediction {
  std::string question_id;
  Label label = Label::Unknown;
  std::optional<std::string> proof;    // canonical form
  std::vector<std::string> generated;  // rendered conclusions, the set G
  int composer_calls = 0;

  bool operator==(const Prediction&) const = default;
};

// A gold question together with the theory it is asked against.
struct GoldItem {
  const Theory* theory = nullptr;
  const Question* question = nullptr;
};

// Question id -> gold item. Throws AlignmentError on duplicate ids.
std::map<std::string, GoldItem> index_gold(std::span<const Instance> dataset);

// Predictions paired with gold, in gold order. Throws AlignmentError when
// either side is empty or the id sets differ.
std::vector<std::pair<const Prediction*, GoldItem>> align(std::span<const Prediction> preds,
                                                          std::span<const Instance> gold);

bool entailment_correct(const Prediction& pred, const GoldAnnotation& gold);

// Label correct and the proof is one of the gold proofs (or both absent for
// Unknown). A malformed proof string scores 0 and appends a warning.
bool proof_correct(const Prediction& pred, const GoldAnnotation& gold,
                   std::vector<std::string>* warnings = nullptr);

double score_entailment(std::span<const Prediction> preds, std::span<const Instance> gold);
double score_proof(std::span<const Prediction> preds, std::span<const Instance> gold,
                   std::vector<std::string>* warnings = nullptr);

struct Consistency {
  double entailment = 0.0;
  double proof = 0.0;
};

// Fraction of variants agreeing with the system's own base prediction. The
// variant proof is mapped back through the inverse renaming before the
// string comparison. Throws MappingError for a non-injective map and
// AlignmentError when variants and maps differ in number.
Consistency score_consistency(const Prediction& base, std::span<const Prediction> variants,
                              std::span<const RenamingMap> maps);

struct InferencePR {
  std::optional<double> precision;  // nullopt when G is empty but T is not
  double recall = 0.0;
};

// Every conclusion materialized by a gold proof, final one included.
std::vector<std::string> required_conclusions(const Theory& theory, const Question& question,
                                              const std::string& proof);

// Precision against the union T of all gold proofs' conclusions, recall as
// the best coverage of any single gold proof. Precondition: gold label is
// not Unknown.
InferencePR inference_pr(std::span<const std::string> generated, const Theory& theory,
                         const Question& question);

struct Accuracy {
  int questions = 0;
  double entailment = 0.0;
  double proof = 0.0;

  bool operator==(const Accuracy&) const = default;
};

struct DepthRow {
  int questions = 0;
  double entailment_accuracy = 0.0;
  double proof_accuracy = 0.0;
  int pr_questions = 0;
  int precision_undefined = 0;
  std::optional<double> precision;
  std::optional<double> recall;

  bool operator==(const DepthRow&) const = default;
};

struct StrategyReport {
  // Keyed "0", "1", ..., "N/A" and "All".
  std::map<std::string, DepthRow> depth_rows;
  std::map<int, Accuracy> budget_curve;
  // Budget -> depth key -> accuracy over gold-True questions of that depth.
  std::map<int, std::map<std::string, Accuracy>> budget_curve_by_depth;
  std::optional<double> mean_composer_calls;

  bool operator==(const StrategyReport&) const = default;
};

struct ConsistencyRow {
  int sets = 0;
  int questions = 0;
  double entailment = 0.0;
  double proof = 0.0;

  bool operator==(const ConsistencyRow&) const = default;
};

struct MetricsReport {
  int schema_version = 1;
  std::map<std::string, StrategyReport> strategies;
  // Keyed by perturbation mode.
  std::map<std::string, ConsistencyRow> consistency;
  // Mean composer calls of "goal" over "exhaustive" when both were run.
  std::optional<double> composer_call_ratio;
  std::vector<std::string> warnings;

  bool operator==(const MetricsReport&) const = default;
};

std::string depth_key(const GoldAnnotation& gold);

// Per-depth rows and the "All" row for one prediction set.
StrategyReport summarize(std::span<const Prediction> preds, std::span<const Instance> gold,
                         std::vector<std::string>* warnings = nullptr);

// Accuracy per budget, overall and per depth of gold-True questions.
void add_budget_curve(StrategyReport& report, const std::map<int, std::vector<Prediction>>& runs,
                      std::span<const Instance> gold, std::vector<std::string>* warnings = nullptr);

// Mean consistency over every question of every set. `preds` must hold the
// base and variant predictions keyed by question id.
ConsistencyRow consistency_over(std::span<const EquivalenceSet> sets,
                                const std::map<std::string, Prediction>& preds);

struct ReportInputs {
  std::span<const Instance> gold;
  std::map<std::string, std::vector<Prediction>> runs;  // strategy -> predictions
  std::map<std::string, std::map<int, std::vector<Prediction>>> budget_runs;
  std::span<const EquivalenceSet> equivalence_sets;
  std::map<std::string, Prediction> equivalence_preds;
};

MetricsReport build_report(const ReportInputs& inputs);

// Aligned plain-text rendering.
std::string render_table(const MetricsReport& report);

}  // namespace modus
