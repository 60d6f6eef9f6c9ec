#include "modus/cli.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "modus/errors.hpp"
#include "modus/io.hpp"

namespace modus {

namespace {

int parse_int(std::string_view text, const std::string& what) {
  int v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw Error("invalid " + what + ": '" + std::string(text) + "'");
  return v;
}

// "3" or "1..4".
IntRange parse_range(const std::string& text, const std::string& what) {
  if (auto dots = text.find(".."); dots != std::string::npos)
    return {parse_int(text.substr(0, dots), what), parse_int(text.substr(dots + 2), what)};
  const int v = parse_int(text, what);
  return {v, v};
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

StrategyKind parse_strategy(const std::string& name) {
  auto kind = strategy_from_string(name);
  if (!kind) throw Error("unknown strategy '" + name + "' (expected goal or exhaustive)");
  return *kind;
}

std::size_t question_count(std::span<const Instance> data) {
  std::size_t n = 0;
  for (const auto& in : data) n += in.questions.size();
  return n;
}

struct GenArgs {
  std::string depths = "0..3";
  int theories = 10;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
  bool d3_like = false;
  std::string distractor_chains;
  std::string distractor_length;
  bool cone_intersecting = false;
  std::size_t proof_cap = 64;
  std::string id_prefix = "T";
};

struct PerturbArgs {
  std::string mode = "subject";
  int n = 5;
  std::optional<std::uint64_t> seed;
  std::string in;
  std::string out;
};

struct SolveArgs {
  std::string strategy = "goal";
  std::optional<int> budget;
  std::optional<std::uint64_t> shuffle_seed;
  std::string in;
  std::string out;
  std::string traces;
  std::string format = "jsonl";
  int jobs = 1;
};

struct EvalArgs {
  std::vector<std::string> preds;
  std::string gold;
  std::string equiv;
  std::vector<std::string> equiv_preds;
  std::string report;
};

struct TrainingArgs {
  std::string in;
  std::string out_dir;
};

struct BenchArgs {
  std::string in;
  std::string strategies = "goal,exhaustive";
  std::string budgets = "1,3,5,7,10";
  std::optional<std::uint64_t> shuffle_seed;
  std::string report;
  int jobs = 1;
};

void run_gen(const GenArgs& a, const CLI::App& cmd, std::ostream& out) {
  if (!a.seed) throw Error("gen needs --seed or MODUS_SEED");
  GenConfig c = a.d3_like ? GenConfig::d3_like() : GenConfig{};
  if (!a.d3_like || cmd.count("--depths") > 0) c.target_depths = parse_depths(a.depths);
  c.theories = a.theories;
  c.seed = *a.seed;
  c.id_prefix = a.id_prefix;
  c.proof_cap = a.proof_cap;
  c.cone_disjoint_distractors = !a.cone_intersecting;
  if (!a.distractor_chains.empty()) c.distractor_chains = parse_range(a.distractor_chains, "--distractor-chains");
  if (!a.distractor_length.empty()) c.distractor_length = parse_range(a.distractor_length, "--distractor-length");
  const auto data = generate_dataset(c, a.jobs);
  save_dataset(a.out, data);
  out << "wrote " << data.size() << " theories, " << question_count(data) << " questions to " << a.out << "\n";
}

void run_perturb(const PerturbArgs& a, std::ostream& out) {
  if (!a.seed) throw Error("perturb needs --seed or MODUS_SEED");
  auto mode = perturb_mode_from_string(a.mode);
  if (!mode) throw Error("unknown mode '" + a.mode + "' (expected subject, attribute or both)");
  if (a.n < 1) throw Error("--n must be at least 1");
  const auto data = load_dataset(a.in);
  std::vector<EquivalenceSet> sets;
  for (std::size_t i = 0; i < data.size(); ++i) sets.push_back(perturb(data[i], *mode, mix_seed(*a.seed, i), a.n));
  save_equivalence_sets(a.out, sets);
  out << "wrote " << sets.size() << " equivalence sets of " << a.n << " variants to " << a.out << "\n";
}

void run_solve(const SolveArgs& a, std::ostream& out) {
  SolveOptions o;
  o.strategy = parse_strategy(a.strategy);
  if (a.budget && *a.budget < 0) throw Error("--budget must be non-negative");
  o.budget = a.budget;
  o.shuffle_seed = a.shuffle_seed;
  if (a.format != "jsonl" && a.format != "text") throw Error("--format must be jsonl or text");
  const auto data = load_dataset(a.in);
  std::vector<TraceRecord> traces;
  const auto preds = predict_dataset(data, o, a.jobs, a.traces.empty() ? nullptr : &traces);
  if (a.format == "jsonl") {
    save_predictions(a.out, preds);
  } else {
    std::string text;
    for (const auto& p : preds)
      text += p.question_id + "\t" + std::string(to_string(p.label)) + "\t" + p.proof.value_or("-") + "\n";
    write_text(a.out, text);
  }
  if (!a.traces.empty()) {
    std::vector<Json> lines;
    for (const auto& t : traces) lines.push_back(to_json(t));
    write_jsonl(a.traces, lines);
  }
  long calls = 0;
  for (const auto& p : preds) calls += p.composer_calls;
  out << "solved " << preds.size() << " questions with " << a.strategy << " (" << calls
      << " composer calls) to " << a.out << "\n";
}

// "name=path" or a bare path.
std::pair<std::string, std::string> named_path(const std::string& arg, std::size_t count) {
  if (auto eq = arg.find('='); eq != std::string::npos) return {arg.substr(0, eq), arg.substr(eq + 1)};
  if (count > 1) throw Error("name each of several --pred files as NAME=PATH");
  return {"model", arg};
}

void run_eval(const EvalArgs& a, std::ostream& out) {
  const auto gold = load_dataset(a.gold);
  ReportInputs in;
  in.gold = gold;
  for (const auto& arg : a.preds) {
    auto [name, path] = named_path(arg, a.preds.size());
    if (in.runs.contains(name)) throw Error("duplicate prediction name '" + name + "'");
    in.runs[name] = load_predictions(path);
  }
  std::vector<EquivalenceSet> sets;
  if (!a.equiv.empty()) {
    if (a.equiv_preds.empty()) throw Error("--equiv needs --equiv-pred with predictions on the variants");
    sets = load_equivalence_sets(a.equiv, gold);
    in.equivalence_sets = sets;
    for (const auto& p : in.runs.begin()->second) in.equivalence_preds.insert_or_assign(p.question_id, p);
    for (const auto& path : a.equiv_preds) {
      for (auto& p : load_predictions(path)) in.equivalence_preds.insert_or_assign(p.question_id, std::move(p));
    }
  }
  const auto report = build_report(in);
  if (!a.report.empty()) write_text(a.report, to_json(report).dump(2) + "\n");
  out << render_table(report);
}

void run_training(const TrainingArgs& a, std::ostream& out) {
  const auto data = load_dataset(a.in);
  std::vector<Json> rs, fs, kc;
  for (const auto& in : data) {
    const auto records = emit_training_records(in);
    for (const auto& r : records.rs) rs.push_back(to_json(r));
    for (const auto& r : records.fs) fs.push_back(to_json(r));
    for (const auto& r : records.kc) kc.push_back(to_json(r));
  }
  const std::filesystem::path dir(a.out_dir);
  write_jsonl(dir / "rs.jsonl", rs);
  write_jsonl(dir / "fs.jsonl", fs);
  write_jsonl(dir / "kc.jsonl", kc);
  out << "wrote " << rs.size() << " rs, " << fs.size() << " fs, " << kc.size() << " kc records to "
      << a.out_dir << "\n";
}

void run_bench(const BenchArgs& a, std::ostream& out) {
  std::vector<int> budgets;
  for (const auto& b : split(a.budgets, ',')) {
    budgets.push_back(parse_int(b, "budget"));
    if (budgets.back() < 0) throw Error("budgets must be non-negative");
  }
  std::vector<std::string> names = split(a.strategies, ',');
  for (const auto& n : names) parse_strategy(n);
  const auto data = load_dataset(a.in);
  ReportInputs in;
  in.gold = data;
  for (const auto& name : names) {
    SolveOptions o;
    o.strategy = parse_strategy(name);
    o.shuffle_seed = a.shuffle_seed;
    in.runs[name] = predict_dataset(data, o, a.jobs);
    for (int b : budgets) {
      o.budget = b;
      in.budget_runs[name][b] = predict_dataset(data, o, a.jobs);
    }
  }
  const auto report = build_report(in);
  if (!a.report.empty()) write_text(a.report, to_json(report).dump(2) + "\n");
  out << render_table(report);
}

std::string version_text() {
  return std::string("modus ") + kVersion + "\ndataset schema " + std::to_string(kDatasetSchemaVersion) +
         "\nprediction schema " + std::to_string(kPredictionSchemaVersion) + "\nreport schema " +
         std::to_string(kReportSchemaVersion);
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Symbolic deductive reasoning over controlled-English rulebases", "modus"};
  app.set_version_flag("--version", version_text());
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a depth-controlled dataset");
  g->add_option("--depths", gen.depths, "Target depths, e.g. 0..3, 5, 0..5,U")->capture_default_str();
  g->add_option("--theories", gen.theories, "Number of theories")->capture_default_str()->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "Random seed")->envname("MODUS_SEED");
  g->add_option("--out", gen.out, "Output dataset JSONL")->required();
  g->add_option("--jobs", gen.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  g->add_flag("--d3-like", gen.d3_like, "Shallow preset with few distractors");
  g->add_option("--distractor-chains", gen.distractor_chains, "Distractor chains per theory, N or A..B");
  g->add_option("--distractor-length", gen.distractor_length, "Rules per distractor chain, N or A..B");
  g->add_flag("--cone-intersecting", gen.cone_intersecting, "Let distractor chains reach goal predicates");
  g->add_option("--proof-cap", gen.proof_cap, "Maximum gold proofs per question")->capture_default_str();
  g->add_option("--id-prefix", gen.id_prefix, "Instance id prefix")->capture_default_str();

  PerturbArgs pert;
  auto* p = app.add_subcommand("perturb", "Build equivalence sets by consistent renaming");
  p->add_option("--mode", pert.mode, "subject, attribute or both")->capture_default_str();
  p->add_option("--n", pert.n, "Variants per theory")->capture_default_str();
  p->add_option("--seed", pert.seed, "Random seed")->envname("MODUS_SEED");
  p->add_option("--in", pert.in, "Input dataset JSONL")->required();
  p->add_option("--out", pert.out, "Output equivalence-set JSONL")->required();

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Answer every question of a dataset");
  s->add_option("--strategy", solve.strategy, "goal or exhaustive")->capture_default_str();
  s->add_option("--budget", solve.budget, "Maximum intermediate conclusions");
  s->add_option("--shuffle-seed", solve.shuffle_seed, "Randomize rule selection with this seed");
  s->add_option("--in", solve.in, "Input dataset JSONL")->required();
  s->add_option("--out", solve.out, "Output predictions")->required();
  s->add_option("--traces", solve.traces, "Also write inference traces JSONL");
  s->add_option("--format", solve.format, "jsonl or text")->capture_default_str();
  s->add_option("--jobs", solve.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Score predictions against gold");
  e->add_option("--pred", eval.preds, "Predictions JSONL, or NAME=PATH (repeatable)")->required();
  e->add_option("--gold", eval.gold, "Gold dataset JSONL")->required();
  e->add_option("--equiv", eval.equiv, "Equivalence-set JSONL");
  e->add_option("--equiv-pred", eval.equiv_preds, "Predictions on the equivalence-set variants");
  e->add_option("--report", eval.report, "Write the JSON report here");

  TrainingArgs train;
  auto* t = app.add_subcommand("emit-training", "Write rule-selection, fact-selection and composer records");
  t->add_option("--in", train.in, "Input dataset JSONL")->required();
  t->add_option("--out-dir", train.out_dir, "Directory for rs.jsonl, fs.jsonl and kc.jsonl")->required();

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Compare strategies across inference budgets");
  b->add_option("--in", bench.in, "Input dataset JSONL")->required();
  b->add_option("--strategies", bench.strategies, "Comma-separated strategies")->capture_default_str();
  b->add_option("--budgets", bench.budgets, "Comma-separated budgets")->capture_default_str();
  b->add_option("--shuffle-seed", bench.shuffle_seed, "Randomize rule selection with this seed");
  b->add_option("--report", bench.report, "Write the JSON report here");
  b->add_option("--jobs", bench.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  std::vector<const char*> argv{"modus"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*g) run_gen(gen, *g, out);
    else if (*p) run_perturb(pert, out);
    else if (*s) run_solve(solve, out);
    else if (*e) run_eval(eval, out);
    else if (*t) run_training(train, out);
    else if (*b) run_bench(bench, out);
  } catch (const IoError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace modus
