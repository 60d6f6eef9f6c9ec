#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "modus/language.hpp"

namespace modus {

// One rule application inside a proof. `inputs` are given-fact ids
// ("sentK") or intermediate ids ("intK"); `output` is "intK" or "hypothesis".
struct ProofStep {
  std::string rule_id;
  std::vector<std::string> inputs;
  std::string output;

  bool operator==(const ProofStep&) const = default;
};

// Proof DAG stitched from one-hop steps. Facts and rules are the leaves; the
// single sink is the hypothesis (or, for a refutation, its negation).
//
// Canonical form, bit-exact:
//   depth 0:  "sent4 -> hypothesis"
//   else:     "(sent2 & sent1) -> int1 ; (sent3 & int1) -> hypothesis"
// Inputs inside a step list given facts by sentence number, then
// intermediates by number. Intermediates are numbered in post-order of a
// traversal that visits derived premises in order of their structural key,
// so the form depends only on the shape of the derivation.
class ProofGraph {
 public:
  struct Edge {
    std::string from;
    std::string to;
    bool operator==(const Edge&) const = default;
  };

  static ProofGraph leaf(std::string fact_id, bool negated = false);
  ProofGraph(std::vector<ProofStep> steps, bool negated = false);

  const std::vector<ProofStep>& steps() const { return steps_; }
  const std::optional<std::string>& leaf_id() const { return leaf_id_; }
  // True when the graph proves the negation of the statement it answers.
  bool negated_hypothesis() const { return negated_; }

  std::string canonical_form() const;
  // Longest chain of rule applications from a leaf to the hypothesis.
  int depth() const;

  // Node names: fact ids, "<rule_id>@<k>" for the rule used by step k
  // (1-based), intermediate ids and "hypothesis".
  std::vector<std::string> nodes() const;
  std::vector<Edge> edges() const;

  bool operator==(const ProofGraph&) const = default;

 private:
  ProofGraph() = default;

  std::vector<ProofStep> steps_;
  std::optional<std::string> leaf_id_;
  bool negated_ = false;
};

// How one atom was obtained: a given fact (by id) or a rule application.
struct Derivation {
  std::string rule_id;
  std::vector<Atom> premises;

  auto operator<=>(const Derivation&) const = default;
};

using Support = std::variant<std::string, Derivation>;
using Provenance = std::map<Atom, Support>;

// Builds the canonical proof of `target` from per-atom provenance. Throws
// ProofError when the provenance is missing an atom or is cyclic.
ProofGraph build_proof(const Atom& target, const Provenance& provenance, bool negated = false);

// Inverse of canonical_form(). Throws ProofFormatError.
ProofGraph parse_proof(std::string_view canonical);

struct ProofCheck {
  bool valid = false;
  std::string error;
  // Conclusions of the steps in step order, hypothesis last.
  std::vector<Atom> conclusions;
  int depth = 0;
};

// Replays every step against the theory: the rule must exist, every input
// must be a given fact or an earlier intermediate, the rule's premises must
// be satisfiable by exactly the listed inputs, and the final conclusion must
// equal `proven`.
ProofCheck check_proof(const Theory& theory, const ProofGraph& proof, const Atom& proven);

}  // namespace modus
