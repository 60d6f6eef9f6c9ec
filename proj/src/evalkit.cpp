#include "modus/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "modus/errors.hpp"

namespace modus {

std::map<std::string, GoldItem> index_gold(std::span<const Instance> dataset) {
  std::map<std::string, GoldItem> out;
  for (const auto& in : dataset) {
    for (const auto& q : in.questions) {
      if (!out.emplace(q.id, GoldItem{&in.theory, &q}).second)
        throw AlignmentError("duplicate gold question id " + q.id);
    }
  }
  return out;
}

std::vector<std::pair<const Prediction*, GoldItem>> align(std::span<const Prediction> preds,
                                                          std::span<const Instance> gold) {
  if (preds.empty()) throw AlignmentError("prediction set is empty");
  std::map<std::string, const Prediction*> by_id;
  for (const auto& p : preds) {
    if (!by_id.emplace(p.question_id, &p).second)
      throw AlignmentError("duplicate prediction for question " + p.question_id);
  }
  std::vector<std::pair<const Prediction*, GoldItem>> out;
  for (const auto& in : gold) {
    for (const auto& q : in.questions) {
      auto it = by_id.find(q.id);
      if (it == by_id.end()) throw AlignmentError("no prediction for question " + q.id);
      out.emplace_back(it->second, GoldItem{&in.theory, &q});
    }
  }
  if (out.empty()) throw AlignmentError("gold set is empty");
  if (out.size() != by_id.size()) {
    const auto gold_ids = index_gold(gold);
    for (const auto& [id, p] : by_id) {
      if (!gold_ids.contains(id)) throw AlignmentError("prediction for unknown question " + id);
    }
  }
  return out;
}

bool entailment_correct(const Prediction& pred, const GoldAnnotation& gold) {
  return pred.label == gold.label;
}

bool proof_correct(const Prediction& pred, const GoldAnnotation& gold,
                   std::vector<std::string>* warnings) {
  if (pred.label != gold.label) return false;
  if (gold.label == Label::Unknown) return !pred.proof.has_value();
  if (!pred.proof) return false;
  try {
    parse_proof(*pred.proof);
  } catch (const ProofFormatError& e) {
    if (warnings) warnings->push_back(pred.question_id + ": malformed proof: " + e.what());
    return false;
  }
  return std::find(gold.proofs.begin(), gold.proofs.end(), *pred.proof) != gold.proofs.end();
}

double score_entailment(std::span<const Prediction> preds, std::span<const Instance> gold) {
  const auto pairs = align(preds, gold);
  std::size_t ok = 0;
  for (const auto& [p, g] : pairs) ok += entailment_correct(*p, g.question->gold);
  return static_cast<double>(ok) / static_cast<double>(pairs.size());
}

double score_proof(std::span<const Prediction> preds, std::span<const Instance> gold,
                   std::vector<std::string>* warnings) {
  const auto pairs = align(preds, gold);
  std::size_t ok = 0;
  for (const auto& [p, g] : pairs) ok += proof_correct(*p, g.question->gold, warnings);
  return static_cast<double>(ok) / static_cast<double>(pairs.size());
}

Consistency score_consistency(const Prediction& base, std::span<const Prediction> variants,
                              std::span<const RenamingMap> maps) {
  if (variants.size() != maps.size())
    throw AlignmentError("got " + std::to_string(variants.size()) + " variant predictions for " +
                         std::to_string(maps.size()) + " renaming maps");
  if (variants.empty()) throw AlignmentError("equivalence set has no variants");
  std::size_t label_ok = 0;
  std::size_t proof_ok = 0;
  for (std::size_t k = 0; k < variants.size(); ++k) {
    const auto inverse = maps[k].inverse();
    const auto& v = variants[k];
    label_ok += v.label == base.label;
    std::optional<std::string> back;
    if (v.proof) back = inverse.apply_text(*v.proof);
    proof_ok += back == base.proof;
  }
  const double n = static_cast<double>(variants.size());
  return {static_cast<double>(label_ok) / n, static_cast<double>(proof_ok) / n};
}

std::vector<std::string> required_conclusions(const Theory& theory, const Question& question,
                                              const std::string& proof) {
  const Atom proven =
      question.gold.label == Label::False ? negated(question.statement.atom) : question.statement.atom;
  const auto check = check_proof(theory, parse_proof(proof), proven);
  if (!check.valid) throw ProofError("gold proof of " + question.id + " does not check: " + check.error);
  std::vector<std::string> out;
  for (const auto& a : check.conclusions) out.push_back(render(a));
  return out;
}

InferencePR inference_pr(std::span<const std::string> generated, const Theory& theory,
                         const Question& question) {
  const std::set<std::string> g(generated.begin(), generated.end());
  std::set<std::string> required;
  double best = 0.0;
  for (const auto& proof : question.gold.proofs) {
    const auto needed = required_conclusions(theory, question, proof);
    required.insert(needed.begin(), needed.end());
    if (needed.empty()) {
      best = 1.0;
      continue;
    }
    std::size_t hit = 0;
    for (const auto& c : needed) hit += g.contains(c);
    best = std::max(best, static_cast<double>(hit) / static_cast<double>(needed.size()));
  }
  InferencePR pr;
  pr.recall = best;
  if (g.empty()) {
    if (required.empty()) pr.precision = 1.0;
    return pr;
  }
  std::size_t hit = 0;
  for (const auto& c : g) hit += required.contains(c);
  pr.precision = static_cast<double>(hit) / static_cast<double>(g.size());
  return pr;
}

std::string depth_key(const GoldAnnotation& gold) {
  return gold.depth ? std::to_string(*gold.depth) : "N/A";
}

namespace {

struct RowSum {
  int questions = 0;
  int entail = 0;
  int proof = 0;
  int pr = 0;
  int undefined = 0;
  int precision_n = 0;
  double precision = 0.0;
  double recall = 0.0;

  void add(const RowSum& o) {
    questions += o.questions;
    entail += o.entail;
    proof += o.proof;
    pr += o.pr;
    undefined += o.undefined;
    precision_n += o.precision_n;
    precision += o.precision;
    recall += o.recall;
  }

  DepthRow row() const {
    DepthRow r;
    r.questions = questions;
    if (questions > 0) {
      r.entailment_accuracy = static_cast<double>(entail) / questions;
      r.proof_accuracy = static_cast<double>(proof) / questions;
    }
    r.pr_questions = pr;
    r.precision_undefined = undefined;
    if (precision_n > 0) r.precision = precision / precision_n;
    if (pr > 0) r.recall = recall / pr;
    return r;
  }
};

}  // namespace

StrategyReport summarize(std::span<const Prediction> preds, std::span<const Instance> gold,
                         std::vector<std::string>* warnings) {
  StrategyReport report;
  std::map<std::string, RowSum> sums;
  RowSum all;
  double calls = 0.0;
  const auto pairs = align(preds, gold);
  for (const auto& [p, g] : pairs) {
    const auto& q = *g.question;
    RowSum s;
    s.questions = 1;
    s.entail = entailment_correct(*p, q.gold);
    s.proof = proof_correct(*p, q.gold, warnings);
    if (q.gold.label != Label::Unknown) {
      auto pr = inference_pr(p->generated, *g.theory, q);
      s.pr = 1;
      s.recall = pr.recall;
      if (pr.precision) {
        s.precision_n = 1;
        s.precision = *pr.precision;
      } else {
        s.undefined = 1;
      }
    }
    sums[depth_key(q.gold)].add(s);
    all.add(s);
    calls += p->composer_calls;
  }
  for (const auto& [key, s] : sums) report.depth_rows.emplace(key, s.row());
  report.depth_rows.emplace("All", all.row());
  report.mean_composer_calls = calls / static_cast<double>(pairs.size());
  return report;
}

void add_budget_curve(StrategyReport& report, const std::map<int, std::vector<Prediction>>& runs,
                      std::span<const Instance> gold, std::vector<std::string>* warnings) {
  for (const auto& [budget, preds] : runs) {
    const auto pairs = align(preds, gold);
    Accuracy overall;
    std::map<std::string, std::pair<int, int>> entail_by_depth;
    std::map<std::string, int> proof_by_depth;
    int entail = 0;
    int proof = 0;
    for (const auto& [p, g] : pairs) {
      const auto& q = *g.question;
      const bool e = entailment_correct(*p, q.gold);
      const bool pr = proof_correct(*p, q.gold, warnings);
      entail += e;
      proof += pr;
      if (q.gold.label != Label::True) continue;
      auto& cell = entail_by_depth[depth_key(q.gold)];
      ++cell.first;
      cell.second += e;
      proof_by_depth[depth_key(q.gold)] += pr;
    }
    overall.questions = static_cast<int>(pairs.size());
    overall.entailment = static_cast<double>(entail) / overall.questions;
    overall.proof = static_cast<double>(proof) / overall.questions;
    report.budget_curve[budget] = overall;
    auto& by_depth = report.budget_curve_by_depth[budget];
    for (const auto& [key, cell] : entail_by_depth) {
      by_depth[key] = Accuracy{cell.first, static_cast<double>(cell.second) / cell.first,
                               static_cast<double>(proof_by_depth[key]) / cell.first};
    }
  }
}

ConsistencyRow consistency_over(std::span<const EquivalenceSet> sets,
                                const std::map<std::string, Prediction>& preds) {
  ConsistencyRow row;
  double entail = 0.0;
  double proof = 0.0;
  auto find = [&](const std::string& id) -> const Prediction& {
    auto it = preds.find(id);
    if (it == preds.end()) throw AlignmentError("no prediction for question " + id);
    return it->second;
  };
  for (const auto& set : sets) {
    ++row.sets;
    std::vector<RenamingMap> maps;
    for (const auto& v : set.variants) {
      if (v.instance.questions.size() != set.base.questions.size())
        throw AlignmentError("variant " + v.instance.theory.id + " has a different question count");
      maps.push_back(v.mapping);
    }
    for (std::size_t i = 0; i < set.base.questions.size(); ++i) {
      std::vector<Prediction> variants;
      for (const auto& v : set.variants) variants.push_back(find(v.instance.questions[i].id));
      auto c = score_consistency(find(set.base.questions[i].id), variants, maps);
      entail += c.entailment;
      proof += c.proof;
      ++row.questions;
    }
  }
  if (row.questions > 0) {
    row.entailment = entail / row.questions;
    row.proof = proof / row.questions;
  }
  return row;
}

MetricsReport build_report(const ReportInputs& inputs) {
  MetricsReport report;
  for (const auto& [name, preds] : inputs.runs) {
    auto s = summarize(preds, inputs.gold, &report.warnings);
    if (auto it = inputs.budget_runs.find(name); it != inputs.budget_runs.end())
      add_budget_curve(s, it->second, inputs.gold, &report.warnings);
    report.strategies.emplace(name, std::move(s));
  }
  for (const auto& [name, runs] : inputs.budget_runs) {
    if (inputs.runs.contains(name)) continue;
    StrategyReport s;
    add_budget_curve(s, runs, inputs.gold, &report.warnings);
    report.strategies.emplace(name, std::move(s));
  }
  std::map<std::string, std::vector<EquivalenceSet>> by_mode;
  for (const auto& set : inputs.equivalence_sets) {
    const std::string mode =
        set.variants.empty() ? "subject" : std::string(to_string(set.variants.front().mapping.mode));
    by_mode[mode].push_back(set);
  }
  for (const auto& [mode, sets] : by_mode)
    report.consistency.emplace(mode, consistency_over(sets, inputs.equivalence_preds));

  auto goal = report.strategies.find("goal");
  auto exhaustive = report.strategies.find("exhaustive");
  if (goal != report.strategies.end() && exhaustive != report.strategies.end() &&
      goal->second.mean_composer_calls && exhaustive->second.mean_composer_calls &&
      *exhaustive->second.mean_composer_calls > 0.0) {
    report.composer_call_ratio =
        *goal->second.mean_composer_calls / *exhaustive->second.mean_composer_calls;
  }
  return report;
}

namespace {

std::string fixed(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

// Numeric depths first, then "N/A", then "All".
std::vector<std::string> ordered_keys(const std::map<std::string, DepthRow>& rows) {
  std::vector<std::string> keys;
  for (const auto& [k, r] : rows) keys.push_back(k);
  auto rank = [](const std::string& k) -> std::pair<int, int> {
    if (k == "All") return {2, 0};
    if (k == "N/A") return {1, 0};
    return {0, std::stoi(k)};
  };
  std::sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
  return keys;
}

std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::string out;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const auto& r = rows[n];
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i > 0) line += "  ";
      line += i == 0 ? r[i] + std::string(width[i] - r[i].size(), ' ')
                     : std::string(width[i] - r[i].size(), ' ') + r[i];
    }
    out += line + "\n";
    if (n == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    }
  }
  return out;
}

}  // namespace

std::string render_table(const MetricsReport& report) {
  std::string out;
  for (const auto& [name, s] : report.strategies) {
    out += "strategy: " + name + "\n";
    std::vector<std::vector<std::string>> rows{
        {"depth", "questions", "entailment", "proof", "precision", "recall"}};
    for (const auto& key : ordered_keys(s.depth_rows)) {
      const auto& r = s.depth_rows.at(key);
      rows.push_back({key, std::to_string(r.questions), fixed(r.entailment_accuracy),
                      fixed(r.proof_accuracy), fixed(r.precision), fixed(r.recall)});
    }
    if (!s.depth_rows.empty()) out += table(rows);
    if (s.mean_composer_calls) out += "mean composer calls: " + fixed(s.mean_composer_calls) + "\n";
    if (!s.budget_curve.empty()) {
      std::vector<std::vector<std::string>> curve{{"budget", "questions", "entailment", "proof"}};
      for (const auto& [b, a] : s.budget_curve)
        curve.push_back({std::to_string(b), std::to_string(a.questions), fixed(a.entailment), fixed(a.proof)});
      out += table(curve);
    }
    out += "\n";
  }
  if (!report.consistency.empty()) {
    std::vector<std::vector<std::string>> rows{{"mode", "sets", "questions", "entailment C", "proof C"}};
    for (const auto& [mode, c] : report.consistency)
      rows.push_back({mode, std::to_string(c.sets), std::to_string(c.questions), fixed(c.entailment),
                      fixed(c.proof)});
    out += table(rows) + "\n";
  }
  if (report.composer_call_ratio)
    out += "composer calls goal/exhaustive: " + fixed(report.composer_call_ratio) + "\n";
  for (const auto& w : report.warnings) out += "warning: " + w + "\n";
  return out;
}

}  // namespace modus
