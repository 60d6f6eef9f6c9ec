#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "modus/datagen.hpp"
#include "modus/evalkit.hpp"
#include "modus/pipeline.hpp"

namespace modus {

using Json = nlohmann::ordered_json;

inline constexpr int kDatasetSchemaVersion = 1;
inline constexpr int kPredictionSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

// Dataset line: {id, sentences: {sent1: ...}, questions: [{id, text, label,
// depth, proofs, truncated}]}. Decoding throws SchemaError.
Json to_json(const Instance& instance);
Instance instance_from_json(const Json& j);

// Equivalence-set line: a dataset line plus {base_id, variant_index, mode,
// mapping: {subjects, attributes}}.
Json to_json(const Variant& variant, const std::string& base_id);
struct VariantLine {
  std::string base_id;
  Variant variant;
};
VariantLine variant_from_json(const Json& j);

Json to_json(const Prediction& p);
Prediction prediction_from_json(const Json& j);

Json to_json(const TraceRecord& t);

Json to_json(const RsRecord& r);
Json to_json(const FsRecord& r);
Json to_json(const KcRecord& r);

Json to_json(const MetricsReport& r);
MetricsReport report_from_json(const Json& j);

// One JSON value per non-empty line. Throws IoError when the file cannot be
// read and SchemaError (with the line number) on malformed JSON.
std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, std::span<const Json> lines);
std::string dump_jsonl(std::span<const Json> lines);

Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

std::vector<Instance> load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, std::span<const Instance> dataset);

std::vector<Prediction> load_predictions(const std::filesystem::path& path);
void save_predictions(const std::filesystem::path& path, std::span<const Prediction> preds);

// Groups variant lines under their base instances, in base order.
std::vector<EquivalenceSet> load_equivalence_sets(const std::filesystem::path& path,
                                                  std::span<const Instance> base);
void save_equivalence_sets(const std::filesystem::path& path, std::span<const EquivalenceSet> sets);

}  // namespace modus
