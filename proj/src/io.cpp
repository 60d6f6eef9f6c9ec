#include "modus/io.hpp"

#include <fstream>
#include <sstream>

#include "modus/errors.hpp"

namespace modus {

namespace {

const Json& field(const Json& j, const char* name) {
  if (!j.is_object()) throw SchemaError("expected a JSON object");
  auto it = j.find(name);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + name + "'");
  return *it;
}

template <class T>
T get(const Json& j, const char* name) {
  const Json& v = field(j, name);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(std::string("field '") + name + "' has the wrong type");
  }
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> number_or_null(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) throw SchemaError(std::string("field '") + name + "' must be a number or null");
  return v.get<double>();
}

Label parse_label(const std::string& text) {
  auto l = label_from_string(text);
  if (!l) throw SchemaError("unknown label '" + text + "'");
  return *l;
}

std::vector<std::string> string_list(const Json& j, const char* name) {
  return get<std::vector<std::string>>(j, name);
}

}  // namespace

// ---------------------------------------------------------------------------
// Datasets

Json to_json(const Instance& instance) {
  Json sentences = Json::object();
  const auto lines = instance.theory.lines();
  for (std::size_t i = 0; i < lines.size(); ++i) sentences[sentence_id(i)] = lines[i];
  Json questions = Json::array();
  for (const auto& q : instance.questions) {
    questions.push_back({
        {"id", q.id},
        {"text", render(q.statement)},
        {"label", to_string(q.gold.label)},
        {"depth", q.gold.depth ? Json(*q.gold.depth) : Json("N/A")},
        {"proofs", q.gold.proofs},
        {"truncated", q.gold.truncated},
    });
  }
  return {{"id", instance.theory.id}, {"sentences", sentences}, {"questions", questions}};
}

Instance instance_from_json(const Json& j) {
  Instance in;
  const auto id = get<std::string>(j, "id");
  const Json& sentences = field(j, "sentences");
  if (!sentences.is_object()) throw SchemaError("'sentences' must be an object");
  std::vector<std::string> lines(sentences.size());
  std::vector<bool> seen(sentences.size(), false);
  for (const auto& [key, value] : sentences.items()) {
    auto n = sentence_number(key);
    if (!n || *n > lines.size() || seen[*n - 1])
      throw SchemaError("sentence ids must be sent1..sent" + std::to_string(lines.size()) +
                        "; got '" + key + "'");
    if (!value.is_string()) throw SchemaError("sentence " + key + " must be a string");
    seen[*n - 1] = true;
    lines[*n - 1] = value.get<std::string>();
  }
  try {
    in.theory = parse_theory(lines, {}, id);
  } catch (const TheoryParseError& e) {
    throw SchemaError("instance " + id + ": " + e.what());
  }
  const Json& questions = field(j, "questions");
  if (!questions.is_array()) throw SchemaError("'questions' must be an array");
  for (const auto& qj : questions) {
    Question q;
    q.id = get<std::string>(qj, "id");
    try {
      q.statement = parse_statement(get<std::string>(qj, "text"));
    } catch (const ParseError& e) {
      throw SchemaError("question " + q.id + ": " + e.what());
    }
    q.gold.label = parse_label(get<std::string>(qj, "label"));
    const Json& depth = field(qj, "depth");
    if (depth.is_number_integer()) {
      q.gold.depth = depth.get<int>();
    } else if (!(depth.is_string() && depth.get<std::string>() == "N/A")) {
      throw SchemaError("question " + q.id + ": depth must be an integer or \"N/A\"");
    }
    if ((q.gold.label == Label::Unknown) != !q.gold.depth)
      throw SchemaError("question " + q.id + ": depth is \"N/A\" exactly when the label is unknown");
    q.gold.proofs = string_list(qj, "proofs");
    if (auto it = qj.find("truncated"); it != qj.end()) q.gold.truncated = it->get<bool>();
    in.questions.push_back(std::move(q));
  }
  return in;
}

Json to_json(const Variant& variant, const std::string& base_id) {
  Json j = to_json(variant.instance);
  j["base_id"] = base_id;
  j["variant_index"] = variant.index;
  j["mode"] = to_string(variant.mapping.mode);
  j["mapping"] = {{"subjects", variant.mapping.subjects}, {"attributes", variant.mapping.attributes}};
  return j;
}

VariantLine variant_from_json(const Json& j) {
  VariantLine line;
  line.base_id = get<std::string>(j, "base_id");
  line.variant.instance = instance_from_json(j);
  line.variant.index = get<int>(j, "variant_index");
  auto mode = perturb_mode_from_string(get<std::string>(j, "mode"));
  if (!mode) throw SchemaError("unknown perturbation mode '" + get<std::string>(j, "mode") + "'");
  line.variant.mapping.mode = *mode;
  const Json& mapping = field(j, "mapping");
  line.variant.mapping.subjects = get<std::map<std::string, std::string>>(mapping, "subjects");
  line.variant.mapping.attributes = get<std::map<std::string, std::string>>(mapping, "attributes");
  return line;
}

// ---------------------------------------------------------------------------
// Predictions and traces

Json to_json(const Prediction& p) {
  return {
      {"question_id", p.question_id},
      {"label", to_string(p.label)},
      {"proof", p.proof ? Json(*p.proof) : Json(nullptr)},
      {"generated", p.generated},
      {"composer_calls", p.composer_calls},
  };
}

Prediction prediction_from_json(const Json& j) {
  Prediction p;
  p.question_id = get<std::string>(j, "question_id");
  p.label = parse_label(get<std::string>(j, "label"));
  const Json& proof = field(j, "proof");
  if (proof.is_string()) {
    p.proof = proof.get<std::string>();
  } else if (!proof.is_null()) {
    throw SchemaError("prediction " + p.question_id + ": proof must be a string or null");
  }
  if ((p.label == Label::Unknown) != !p.proof)
    throw SchemaError("prediction " + p.question_id + ": proof is null exactly when the label is unknown");
  if (j.contains("generated")) p.generated = string_list(j, "generated");
  if (j.contains("composer_calls")) p.composer_calls = get<int>(j, "composer_calls");
  return p;
}

Json to_json(const TraceRecord& t) {
  Json steps = Json::array();
  for (const auto& s : t.trace.steps) {
    steps.push_back({{"rule", s.rule_id},
                     {"facts", s.fact_ids},
                     {"conclusion", render(s.conclusion.atom)},
                     {"id", s.conclusion.id}});
  }
  return {{"question_id", t.question_id},
          {"steps", steps},
          {"stop_reason", to_string(t.trace.stop_reason)},
          {"composer_calls", t.trace.composer_calls}};
}

Json to_json(const RsRecord& r) {
  return {{"question_id", r.question_id}, {"statement", r.statement}, {"facts", r.facts},
          {"rules", r.rules}, {"label", r.label}};
}

Json to_json(const FsRecord& r) {
  return {{"question_id", r.question_id}, {"statement", r.statement}, {"rule", r.rule},
          {"facts", r.facts}, {"label", r.label}};
}

Json to_json(const KcRecord& r) {
  return {{"question_id", r.question_id}, {"rule", r.rule}, {"facts", r.facts},
          {"conclusion", r.conclusion}};
}

// ---------------------------------------------------------------------------
// Reports

namespace {

Json to_json(const Accuracy& a) {
  return {{"questions", a.questions}, {"entailment", a.entailment}, {"proof", a.proof}};
}

Accuracy accuracy_from_json(const Json& j) {
  return {get<int>(j, "questions"), get<double>(j, "entailment"), get<double>(j, "proof")};
}

Json to_json(const DepthRow& r) {
  return {{"questions", r.questions},
          {"entailment_accuracy", r.entailment_accuracy},
          {"proof_accuracy", r.proof_accuracy},
          {"pr_questions", r.pr_questions},
          {"precision_undefined", r.precision_undefined},
          {"precision", optional_number(r.precision)},
          {"recall", optional_number(r.recall)}};
}

DepthRow depth_row_from_json(const Json& j) {
  DepthRow r;
  r.questions = get<int>(j, "questions");
  r.entailment_accuracy = get<double>(j, "entailment_accuracy");
  r.proof_accuracy = get<double>(j, "proof_accuracy");
  r.pr_questions = get<int>(j, "pr_questions");
  r.precision_undefined = get<int>(j, "precision_undefined");
  r.precision = number_or_null(j, "precision");
  r.recall = number_or_null(j, "recall");
  return r;
}

int budget_key(const std::string& key) {
  try {
    std::size_t used = 0;
    int b = std::stoi(key, &used);
    if (used == key.size()) return b;
  } catch (const std::exception&) {
  }
  throw SchemaError("budget key '" + key + "' is not an integer");
}

}  // namespace

Json to_json(const MetricsReport& r) {
  Json strategies = Json::object();
  for (const auto& [name, s] : r.strategies) {
    Json rows = Json::object();
    for (const auto& [k, row] : s.depth_rows) rows[k] = to_json(row);
    Json curve = Json::object();
    for (const auto& [b, a] : s.budget_curve) curve[std::to_string(b)] = to_json(a);
    Json by_depth = Json::object();
    for (const auto& [b, m] : s.budget_curve_by_depth) {
      Json inner = Json::object();
      for (const auto& [k, a] : m) inner[k] = to_json(a);
      by_depth[std::to_string(b)] = inner;
    }
    strategies[name] = {{"depth_rows", rows},
                        {"budget_curve", curve},
                        {"budget_curve_by_depth", by_depth},
                        {"mean_composer_calls", optional_number(s.mean_composer_calls)}};
  }
  Json consistency = Json::object();
  for (const auto& [mode, c] : r.consistency) {
    consistency[mode] = {{"sets", c.sets},
                         {"questions", c.questions},
                         {"entailment", c.entailment},
                         {"proof", c.proof}};
  }
  return {{"schema_version", r.schema_version},
          {"strategies", strategies},
          {"consistency", consistency},
          {"composer_call_ratio", optional_number(r.composer_call_ratio)},
          {"warnings", r.warnings}};
}

MetricsReport report_from_json(const Json& j) {
  MetricsReport r;
  r.schema_version = get<int>(j, "schema_version");
  if (r.schema_version != kReportSchemaVersion)
    throw SchemaError("unsupported report schema version " + std::to_string(r.schema_version));
  for (const auto& [name, sj] : field(j, "strategies").items()) {
    StrategyReport s;
    for (const auto& [k, row] : field(sj, "depth_rows").items()) s.depth_rows[k] = depth_row_from_json(row);
    for (const auto& [b, a] : field(sj, "budget_curve").items())
      s.budget_curve[budget_key(b)] = accuracy_from_json(a);
    for (const auto& [b, m] : field(sj, "budget_curve_by_depth").items()) {
      auto& inner = s.budget_curve_by_depth[budget_key(b)];
      for (const auto& [k, a] : m.items()) inner[k] = accuracy_from_json(a);
    }
    s.mean_composer_calls = number_or_null(sj, "mean_composer_calls");
    r.strategies[name] = std::move(s);
  }
  for (const auto& [mode, c] : field(j, "consistency").items()) {
    r.consistency[mode] = {get<int>(c, "sets"), get<int>(c, "questions"), get<double>(c, "entailment"),
                           get<double>(c, "proof")};
  }
  r.composer_call_ratio = number_or_null(j, "composer_call_ratio");
  r.warnings = string_list(j, "warnings");
  return r;
}

// ---------------------------------------------------------------------------
// Files

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<Json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(path.string() + ":" + std::to_string(n) + ": malformed JSON: " + e.what());
    }
  }
  return out;
}

std::string dump_jsonl(std::span<const Json> lines) {
  std::string out;
  for (const auto& j : lines) {
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void write_jsonl(const std::filesystem::path& path, std::span<const Json> lines) {
  write_text(path, dump_jsonl(lines));
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": malformed JSON: " + e.what());
  }
}

namespace {

template <class T, class F>
std::vector<T> decode_lines(const std::filesystem::path& path, F&& decode) {
  std::vector<T> out;
  std::size_t n = 0;
  for (const auto& j : read_jsonl(path)) {
    ++n;
    try {
      out.push_back(decode(j));
    } catch (const SchemaError& e) {
      throw SchemaError(path.string() + ": record " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<Instance> load_dataset(const std::filesystem::path& path) {
  return decode_lines<Instance>(path, [](const Json& j) { return instance_from_json(j); });
}

void save_dataset(const std::filesystem::path& path, std::span<const Instance> dataset) {
  std::vector<Json> lines;
  for (const auto& in : dataset) lines.push_back(to_json(in));
  write_jsonl(path, lines);
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  return decode_lines<Prediction>(path, [](const Json& j) { return prediction_from_json(j); });
}

void save_predictions(const std::filesystem::path& path, std::span<const Prediction> preds) {
  std::vector<Json> lines;
  for (const auto& p : preds) lines.push_back(to_json(p));
  write_jsonl(path, lines);
}

std::vector<EquivalenceSet> load_equivalence_sets(const std::filesystem::path& path,
                                                  std::span<const Instance> base) {
  auto variants = decode_lines<VariantLine>(path, [](const Json& j) { return variant_from_json(j); });
  std::map<std::string, std::size_t> slot;
  std::vector<EquivalenceSet> sets;
  for (const auto& in : base) {
    slot.emplace(in.theory.id, sets.size());
    sets.push_back({in, {}});
  }
  for (auto& v : variants) {
    auto it = slot.find(v.base_id);
    if (it == slot.end()) throw AlignmentError("variant of unknown base instance " + v.base_id);
    sets[it->second].variants.push_back(std::move(v.variant));
  }
  std::erase_if(sets, [](const EquivalenceSet& s) { return s.variants.empty(); });
  return sets;
}

void save_equivalence_sets(const std::filesystem::path& path, std::span<const EquivalenceSet> sets) {
  std::vector<Json> lines;
  for (const auto& s : sets) {
    for (const auto& v : s.variants) lines.push_back(to_json(v, s.base.theory.id));
  }
  write_jsonl(path, lines);
}

}  // namespace modus
