#include "modus/proof.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>

#include "modus/errors.hpp"

namespace modus {
namespace {

constexpr std::string_view kHypothesis = "hypothesis";
constexpr std::string_view kSeparator = " ; ";

std::optional<std::size_t> intermediate_number(std::string_view id) {
  constexpr std::string_view prefix = "int";
  if (id.size() <= prefix.size() || id.substr(0, prefix.size()) != prefix) return std::nullopt;
  auto digits = id.substr(prefix.size());
  if (digits.front() == '0') return std::nullopt;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  return value;
}

// Given facts by sentence number, then intermediates by number.
bool input_less(const std::string& a, const std::string& b) {
  auto rank = [](const std::string& id) {
    if (auto n = sentence_number(id)) return std::pair<int, std::size_t>{0, *n};
    if (auto n = intermediate_number(id)) return std::pair<int, std::size_t>{1, *n};
    return std::pair<int, std::size_t>{2, 0};
  };
  auto ra = rank(a);
  auto rb = rank(b);
  if (ra != rb) return ra < rb;
  return a < b;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

ProofGraph ProofGraph::leaf(std::string fact_id, bool negated) {
  ProofGraph g;
  g.leaf_id_ = std::move(fact_id);
  g.negated_ = negated;
  return g;
}

ProofGraph::ProofGraph(std::vector<ProofStep> steps, bool negated)
    : steps_(std::move(steps)), negated_(negated) {
  if (steps_.empty()) throw ProofError("a proof needs at least one step or a leaf fact");
}

std::string ProofGraph::canonical_form() const {
  if (leaf_id_) return *leaf_id_ + " -> " + std::string(kHypothesis);
  std::vector<std::string> parts;
  parts.reserve(steps_.size());
  for (const auto& s : steps_)
    parts.push_back("(" + s.rule_id + " & " + join(s.inputs, " ") + ") -> " + s.output);
  return join(parts, kSeparator);
}

int ProofGraph::depth() const {
  if (leaf_id_) return 0;
  std::map<std::string, int> depth_of;
  int last = 0;
  for (const auto& s : steps_) {
    int d = 0;
    for (const auto& in : s.inputs) {
      auto it = depth_of.find(in);
      if (it != depth_of.end()) d = std::max(d, it->second);
    }
    depth_of[s.output] = d + 1;
    last = d + 1;
  }
  return last;
}

std::vector<std::string> ProofGraph::nodes() const {
  if (leaf_id_) return {*leaf_id_, std::string(kHypothesis)};
  std::vector<std::string> out;
  auto note = [&](const std::string& n) {
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  };
  for (std::size_t k = 0; k < steps_.size(); ++k) {
    for (const auto& in : steps_[k].inputs) note(in);
    note(steps_[k].rule_id + "@" + std::to_string(k + 1));
    note(steps_[k].output);
  }
  return out;
}

std::vector<ProofGraph::Edge> ProofGraph::edges() const {
  if (leaf_id_) return {{*leaf_id_, std::string(kHypothesis)}};
  std::vector<Edge> out;
  for (std::size_t k = 0; k < steps_.size(); ++k) {
    const auto rule_node = steps_[k].rule_id + "@" + std::to_string(k + 1);
    for (const auto& in : steps_[k].inputs) out.push_back({in, rule_node});
    out.push_back({rule_node, steps_[k].output});
  }
  return out;
}

ProofGraph build_proof(const Atom& target, const Provenance& provenance, bool negated) {
  auto support_of = [&](const Atom& a) -> const Support& {
    auto it = provenance.find(a);
    if (it == provenance.end()) throw ProofError("no provenance for atom " + render(a));
    return it->second;
  };

  if (const auto* id = std::get_if<std::string>(&support_of(target)))
    return ProofGraph::leaf(*id, negated);

  // Structural key of every derived atom; leaves key as their fact id.
  std::map<Atom, std::string> keys;
  std::set<Atom> in_progress;
  std::function<const std::string&(const Atom&)> key_of = [&](const Atom& a) -> const std::string& {
    if (auto it = keys.find(a); it != keys.end()) return it->second;
    const auto& support = support_of(a);
    if (const auto* id = std::get_if<std::string>(&support)) return keys.emplace(a, *id).first->second;
    if (!in_progress.insert(a).second) throw ProofError("cyclic provenance at " + render(a));
    const auto& d = std::get<Derivation>(support);
    std::vector<std::string> child_keys;
    for (const auto& p : d.premises) child_keys.push_back(key_of(p));
    std::sort(child_keys.begin(), child_keys.end());
    child_keys.erase(std::unique(child_keys.begin(), child_keys.end()), child_keys.end());
    in_progress.erase(a);
    return keys.emplace(a, "(" + d.rule_id + " & " + join(child_keys, " ") + ")").first->second;
  };
  key_of(target);

  std::vector<ProofStep> steps;
  std::map<Atom, std::string> names;
  std::function<std::string(const Atom&)> visit = [&](const Atom& a) -> std::string {
    if (auto it = names.find(a); it != names.end()) return it->second;
    const auto& support = support_of(a);
    if (const auto* id = std::get_if<std::string>(&support)) return names.emplace(a, *id).first->second;
    const auto& d = std::get<Derivation>(support);

    std::vector<Atom> derived;
    std::vector<std::string> inputs;
    for (const auto& p : d.premises) {
      if (std::holds_alternative<std::string>(support_of(p))) {
        inputs.push_back(std::get<std::string>(support_of(p)));
      } else if (std::find(derived.begin(), derived.end(), p) == derived.end()) {
        derived.push_back(p);
      }
    }
    std::sort(derived.begin(), derived.end(),
              [&](const Atom& x, const Atom& y) { return keys.at(x) < keys.at(y); });
    for (const auto& child : derived) inputs.push_back(visit(child));
    std::sort(inputs.begin(), inputs.end(), input_less);
    inputs.erase(std::unique(inputs.begin(), inputs.end()), inputs.end());

    std::string name = a == target ? std::string(kHypothesis) : "int" + std::to_string(steps.size() + 1);
    steps.push_back({d.rule_id, std::move(inputs), name});
    return names.emplace(a, name).first->second;
  };
  visit(target);
  return ProofGraph(std::move(steps), negated);
}

ProofGraph parse_proof(std::string_view canonical) {
  auto fail = [&](const std::string& why) -> ProofFormatError {
    return ProofFormatError("malformed proof '" + std::string(canonical) + "': " + why);
  };
  const std::string arrow = " -> ";

  if (canonical.empty()) throw fail("empty");
  if (canonical.front() != '(') {
    auto at = canonical.find(arrow);
    if (at == std::string_view::npos) throw fail("missing '->'");
    auto id = canonical.substr(0, at);
    if (!sentence_number(id) || canonical.substr(at + arrow.size()) != kHypothesis)
      throw fail("expected '<sentK> -> hypothesis'");
    return ProofGraph::leaf(std::string(id));
  }

  std::vector<std::string_view> parts;
  std::size_t begin = 0;
  while (true) {
    auto at = canonical.find(kSeparator, begin);
    parts.push_back(canonical.substr(begin, at == std::string_view::npos ? at : at - begin));
    if (at == std::string_view::npos) break;
    begin = at + kSeparator.size();
  }

  std::vector<ProofStep> steps;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto part = parts[k];
    auto close = part.find(')');
    if (part.empty() || part.front() != '(' || close == std::string_view::npos)
      throw fail("step " + std::to_string(k + 1) + " is not '(<rule> & <facts>) -> <id>'");
    auto body = part.substr(1, close - 1);
    auto tail = part.substr(close + 1);
    if (tail.substr(0, arrow.size()) != arrow) throw fail("missing '->' in step " + std::to_string(k + 1));
    std::string output(tail.substr(arrow.size()));
    const bool last = k + 1 == parts.size();
    const std::string expected = last ? std::string(kHypothesis) : "int" + std::to_string(k + 1);
    if (output != expected) throw fail("step " + std::to_string(k + 1) + " must produce " + expected);

    auto amp = body.find(" & ");
    if (amp == std::string_view::npos) throw fail("missing '&' in step " + std::to_string(k + 1));
    std::string rule(body.substr(0, amp));
    if (!sentence_number(rule)) throw fail("bad rule id '" + rule + "'");
    std::vector<std::string> inputs;
    auto rest = body.substr(amp + 3);
    std::size_t b = 0;
    while (b <= rest.size()) {
      auto e = rest.find(' ', b);
      auto tok = rest.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b);
      if (tok.empty()) throw fail("empty fact id in step " + std::to_string(k + 1));
      if (!sentence_number(tok) && !intermediate_number(tok))
        throw fail("bad fact id '" + std::string(tok) + "'");
      if (auto n = intermediate_number(tok); n && *n > k)
        throw fail("step " + std::to_string(k + 1) + " uses an intermediate defined later");
      inputs.emplace_back(tok);
      if (e == std::string_view::npos) break;
      b = e + 1;
    }
    steps.push_back({std::move(rule), std::move(inputs), std::move(output)});
  }
  return ProofGraph(std::move(steps));
}

namespace {

// Extends `subst` so that `pattern` equals `fact`; false when impossible.
bool match(const Atom& pattern, const Atom& fact, std::optional<Entity>& subst) {
  if (pattern.predicate != fact.predicate || pattern.polarity != fact.polarity) return false;
  const auto& subject = std::get<Entity>(fact.subject);
  if (!is_variable(pattern.subject)) return std::get<Entity>(pattern.subject) == subject;
  if (subst) return *subst == subject;
  subst = subject;
  return true;
}

// Every conclusion obtainable by mapping each premise onto one of the
// inputs such that every input is used.
std::vector<Atom> conclusions_for(const Rule& rule, const std::vector<Atom>& inputs) {
  std::vector<Atom> out;
  const std::size_t n = rule.premises.size();
  std::vector<std::size_t> choice(n, 0);
  std::function<void(std::size_t, std::optional<Entity>, std::vector<bool>&)> go =
      [&](std::size_t i, std::optional<Entity> subst, std::vector<bool>& used) {
        if (i == n) {
          if (std::find(used.begin(), used.end(), false) != used.end()) return;
          Atom c = rule.conclusion;
          if (is_variable(c.subject)) {
            if (!subst) return;
            c.subject = *subst;
          }
          if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
          return;
        }
        for (std::size_t j = 0; j < inputs.size(); ++j) {
          auto s = subst;
          if (!match(rule.premises[i], inputs[j], s)) continue;
          const bool was = used[j];
          used[j] = true;
          go(i + 1, s, used);
          used[j] = was;
        }
      };
  std::vector<bool> used(inputs.size(), false);
  go(0, std::nullopt, used);
  return out;
}

}  // namespace

ProofCheck check_proof(const Theory& theory, const ProofGraph& proof, const Atom& proven) {
  ProofCheck result;
  auto reject = [&](std::string why) {
    result.valid = false;
    result.error = std::move(why);
    result.conclusions.clear();
    return result;
  };

  if (proof.leaf_id()) {
    const Fact* f = theory.find_fact(*proof.leaf_id());
    if (f == nullptr) return reject("leaf " + *proof.leaf_id() + " is not a given fact");
    if (f->atom != proven) return reject("leaf " + *proof.leaf_id() + " does not state the hypothesis");
    result.valid = true;
    return result;
  }

  std::map<std::string, Atom> defined;
  std::map<std::string, int> depth_of;
  std::set<std::string> unused;
  const auto& steps = proof.steps();
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto& s = steps[k];
    const bool last = k + 1 == steps.size();
    const std::string expected = last ? std::string(kHypothesis) : "int" + std::to_string(k + 1);
    if (s.output != expected) return reject("step " + std::to_string(k + 1) + " must produce " + expected);
    const Rule* rule = theory.find_rule(s.rule_id);
    if (rule == nullptr) return reject(s.rule_id + " is not a rule of the theory");
    if (s.inputs.empty()) return reject("step " + std::to_string(k + 1) + " has no inputs");

    std::vector<Atom> inputs;
    int d = 0;
    for (const auto& in : s.inputs) {
      if (std::count(s.inputs.begin(), s.inputs.end(), in) > 1)
        return reject("step " + std::to_string(k + 1) + " repeats " + in);
      if (const Fact* f = theory.find_fact(in)) {
        inputs.push_back(f->atom);
      } else if (auto it = defined.find(in); it != defined.end()) {
        inputs.push_back(it->second);
        d = std::max(d, depth_of[in]);
        unused.erase(in);
      } else {
        return reject("step " + std::to_string(k + 1) + " uses undefined " + in);
      }
    }

    auto candidates = conclusions_for(*rule, inputs);
    if (candidates.empty())
      return reject("rule " + s.rule_id + " does not apply to the inputs of step " + std::to_string(k + 1));
    Atom conclusion = candidates.front();
    if (last) {
      if (std::find(candidates.begin(), candidates.end(), proven) == candidates.end())
        return reject("final step does not conclude the hypothesis");
      conclusion = proven;
    } else {
      defined.emplace(s.output, conclusion);
      depth_of[s.output] = d + 1;
      unused.insert(s.output);
    }
    result.conclusions.push_back(conclusion);
    result.depth = d + 1;
  }
  if (!unused.empty()) return reject(*unused.begin() + " is never used");
  result.valid = true;
  return result;
}

}  // namespace modus
