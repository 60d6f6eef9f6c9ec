#include "modus/datagen.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "modus/errors.hpp"
#include "modus/vocabulary.hpp"

namespace modus {

// ---------------------------------------------------------------------------
// Configuration

GenConfig GenConfig::d3_like() {
  GenConfig c;
  c.target_depths = {3};
  c.distractor_chains = {0, 2};
  c.distractor_length = {1, 2};
  c.distractor_entities = {1, 1};
  c.facts_range = {0, 2};
  c.rules_range = {0, 1};
  return c;
}

void GenConfig::validate() const {
  auto range = [](const IntRange& r, const char* name, int floor) {
    if (r.min < floor || r.max < r.min)
      throw GenerationError(std::string("invalid range for ") + name + ": [" +
                            std::to_string(r.min) + ", " + std::to_string(r.max) + "]");
  };
  range(entities, "entities", 1);
  range(facts_range, "facts", 0);
  range(rules_range, "rules", 0);
  range(distractor_chains, "distractor chains", 0);
  range(distractor_length, "distractor length", 1);
  range(distractor_entities, "distractor entities", 1);
  if (target_depths.empty()) throw GenerationError("no target depths given");
  for (const auto& d : target_depths) {
    if (d && (*d < 0 || *d > 8)) throw GenerationError("target depth must lie in 0..8");
  }
  if (theories < 0) throw GenerationError("theory count must be non-negative");
  if (proof_cap == 0) throw GenerationError("proof cap must be positive");
  if (max_retries < 1) throw GenerationError("retry budget must be positive");
}

std::vector<std::optional<int>> parse_depths(std::string_view text) {
  std::vector<std::optional<int>> out;
  auto number = [&](std::string_view s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      throw GenerationError("bad depth '" + std::string(s) + "' in '" + std::string(text) + "'");
    return std::stoi(std::string(s));
  };
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    auto item = text.substr(start, end - start);
    if (item == "U" || item == "u") {
      out.push_back(std::nullopt);
    } else if (auto dots = item.find(".."); dots != std::string_view::npos) {
      int lo = number(item.substr(0, dots));
      int hi = number(item.substr(dots + 2));
      if (hi < lo) throw GenerationError("empty depth range '" + std::string(item) + "'");
      for (int d = lo; d <= hi; ++d) out.push_back(d);
    } else {
      out.push_back(number(item));
    }
    start = end + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Closure oracle

namespace {

std::vector<Entity> universe_of(const Theory& theory) { return theory.entities(); }

Atom ground(Atom a, const Entity& e) {
  if (is_variable(a.subject)) a.subject = e;
  return a;
}

struct Grounding {
  const Rule* rule;
  std::vector<Atom> premises;
  Atom conclusion;
};

std::vector<Grounding> ground_rules(const Theory& theory) {
  std::vector<Grounding> out;
  const auto universe = universe_of(theory);
  for (const auto& rule : theory.rules) {
    if (!rule.has_variable()) {
      out.push_back({&rule, rule.premises, rule.conclusion});
      continue;
    }
    for (const auto& e : universe) {
      Grounding g{&rule, {}, ground(rule.conclusion, e)};
      for (const auto& p : rule.premises) g.premises.push_back(ground(p, e));
      out.push_back(std::move(g));
    }
  }
  return out;
}

}  // namespace

Closure gold_closure(const Theory& theory) {
  Closure c;
  for (const auto& f : theory.facts) {
    c.given.insert(f.atom);
    c.atoms.insert(f.atom);
    c.min_depth.emplace(f.atom, 0);
  }
  const auto groundings = ground_rules(theory);
  // Level-synchronous fixpoint; the level at which an atom first appears is
  // its smallest derivation height.
  for (int level = 1;; ++level) {
    std::vector<Atom> fresh;
    for (const auto& g : groundings) {
      if (c.atoms.contains(g.conclusion)) continue;
      bool ready = std::all_of(g.premises.begin(), g.premises.end(),
                               [&](const Atom& p) { return c.atoms.contains(p); });
      if (ready) fresh.push_back(g.conclusion);
    }
    if (fresh.empty()) break;
    for (auto& a : fresh) {
      if (c.atoms.insert(a).second) c.min_depth.emplace(a, level);
    }
  }
  for (const auto& g : groundings) {
    bool ready = std::all_of(g.premises.begin(), g.premises.end(),
                             [&](const Atom& p) { return c.atoms.contains(p); });
    if (!ready) continue;
    auto& list = c.derivations[g.conclusion];
    Derivation d{g.rule->id, g.premises};
    if (std::find(list.begin(), list.end(), d) == list.end()) list.push_back(std::move(d));
  }
  for (const auto& a : c.atoms) {
    if (c.atoms.contains(negated(a))) {
      c.contradiction = true;
      break;
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Gold proofs

namespace {

class ProofEnumerator {
 public:
  ProofEnumerator(const Theory& theory, const Closure& closure, std::size_t limit)
      : closure_(closure), limit_(limit) {
    std::vector<const Fact*> given;
    for (const auto& f : theory.facts) given.push_back(&f);
    std::stable_sort(given.begin(), given.end(), [](const Fact* a, const Fact* b) {
      return sentence_number(a->id).value_or(0) < sentence_number(b->id).value_or(0);
    });
    for (const Fact* f : given) ids_.emplace(f->atom, f->id);
  }

  std::vector<Provenance> all(const Atom& target) {
    std::set<Atom> path;
    return enumerate(target, path);
  }

  // Provenance following a minimal-height derivation of every atom.
  Provenance minimal(const Atom& target) const {
    Provenance prov;
    std::function<void(const Atom&)> visit = [&](const Atom& a) {
      if (prov.contains(a)) return;
      if (auto it = ids_.find(a); it != ids_.end()) {
        prov.emplace(a, it->second);
        return;
      }
      const int want = closure_.min_depth.at(a);
      for (const auto& d : closure_.derivations.at(a)) {
        int h = 0;
        for (const auto& p : d.premises) h = std::max(h, closure_.min_depth.at(p));
        if (h + 1 != want) continue;
        prov.emplace(a, d);
        for (const auto& p : d.premises) visit(p);
        return;
      }
      throw ProofError("no minimal derivation for '" + render(a) + "'");
    };
    visit(target);
    return prov;
  }

  bool hit_limit() const { return hit_limit_; }

 private:
  static bool consistent(const Provenance& a, const Provenance& b) {
    for (const auto& [atom, support] : b) {
      auto it = a.find(atom);
      if (it != a.end() && it->second != support) return false;
    }
    return true;
  }

  std::vector<Provenance> enumerate(const Atom& a, std::set<Atom>& path) {
    if (auto it = ids_.find(a); it != ids_.end()) return {Provenance{{a, it->second}}};
    if (path.contains(a)) return {};
    auto dit = closure_.derivations.find(a);
    if (dit == closure_.derivations.end()) return {};
    path.insert(a);
    std::vector<Provenance> out;
    for (const auto& d : dit->second) {
      std::vector<Provenance> partial{Provenance{}};
      for (const auto& p : d.premises) {
        auto subs = enumerate(p, path);
        std::vector<Provenance> next;
        for (const auto& x : partial) {
          for (const auto& y : subs) {
            if (!consistent(x, y)) continue;
            if (next.size() >= limit_) {
              hit_limit_ = true;
              break;
            }
            Provenance merged = x;
            merged.insert(y.begin(), y.end());
            next.push_back(std::move(merged));
          }
        }
        partial = std::move(next);
        if (partial.empty()) break;
      }
      for (auto& x : partial) {
        if (out.size() >= limit_) {
          hit_limit_ = true;
          break;
        }
        x.emplace(a, d);
        out.push_back(std::move(x));
      }
    }
    path.erase(a);
    return out;
  }

  const Closure& closure_;
  std::size_t limit_;
  std::map<Atom, std::string> ids_;
  bool hit_limit_ = false;
};

}  // namespace

GoldAnnotation assign_gold(const Theory& theory, const Closure& closure, const Statement& statement,
                           std::size_t proof_cap) {
  GoldAnnotation gold;
  Atom target = statement.atom;
  bool negated_target = false;
  if (closure.atoms.contains(statement.atom)) {
    gold.label = Label::True;
  } else if (closure.atoms.contains(negated(statement.atom))) {
    gold.label = Label::False;
    target = negated(statement.atom);
    negated_target = true;
  } else {
    return gold;
  }

  ProofEnumerator en(theory, closure, proof_cap + 1);
  std::vector<std::pair<int, std::string>> found;
  std::set<std::string> seen;
  auto add = [&](const Provenance& prov) {
    try {
      auto g = build_proof(target, prov, negated_target);
      auto text = g.canonical_form();
      if (seen.insert(text).second) found.emplace_back(g.depth(), std::move(text));
    } catch (const ProofError&) {
      // A merge of two branches closed a cycle; not a proof.
    }
  };
  add(en.minimal(target));
  for (const auto& prov : en.all(target)) add(prov);
  std::sort(found.begin(), found.end());
  gold.truncated = en.hit_limit() || found.size() > proof_cap;
  if (found.size() > proof_cap) found.resize(proof_cap);
  gold.depth = found.front().first;
  for (auto& [d, text] : found) gold.proofs.push_back(std::move(text));
  return gold;
}

// ---------------------------------------------------------------------------
// Generator

namespace {

std::vector<std::string> pool_or(const std::vector<std::string>& configured,
                                 std::span<const std::string_view> fallback) {
  if (!configured.empty()) return configured;
  return {fallback.begin(), fallback.end()};
}

// Predicates not yet used by the instance, drawn without replacement.
class PredicatePool {
 public:
  PredicatePool(std::vector<std::string> attributes, const std::vector<Entity>& objects, Rng& rng)
      : attributes_(std::move(attributes)) {
    for (auto v : vocab::verbs()) {
      for (const auto& o : objects) relations_.emplace_back(std::string(v), o);
    }
    rng.shuffle(attributes_);
    rng.shuffle(relations_);
  }

  // `avoid` keeps "Bob likes Bob." out of the theory.
  Predicate draw(Rng& rng, double relation_probability, std::span<const Entity> avoid,
                 bool attribute_only = false) {
    bool relation = !attribute_only && rng.chance(relation_probability);
    for (int pass = 0; pass < 2; ++pass, relation = !relation) {
      if (attribute_only && relation) continue;
      if (relation) {
        for (auto it = relations_.begin(); it != relations_.end(); ++it) {
          if (std::find(avoid.begin(), avoid.end(), it->second) != avoid.end()) continue;
          auto p = Predicate::relation(it->first, it->second);
          relations_.erase(it);
          return p;
        }
      } else if (!attributes_.empty()) {
        auto p = Predicate::attribute(attributes_.back());
        attributes_.pop_back();
        return p;
      }
    }
    throw PoolExhaustedError("ran out of unused predicates");
  }

 private:
  std::vector<std::string> attributes_;
  std::vector<std::pair<std::string, Entity>> relations_;
};

Polarity draw_polarity(Rng& rng, double p) { return rng.chance(p) ? Polarity::Neg : Polarity::Pos; }

// Builds a rule about `subject`, lifting it to a quantified rule when
// `variable` is set and picking a surface form at random.
Rule make_rule(std::vector<Atom> premises, Atom conclusion, bool variable, Rng& rng) {
  rng.shuffle(premises);
  Rule r;
  r.premises = std::move(premises);
  r.conclusion = std::move(conclusion);
  if (!variable) return r;
  const Term subject = r.premises.front().subject;
  for (auto& p : r.premises) {
    if (p.subject == subject) p.subject = Variable{};
  }
  if (r.conclusion.subject == subject) r.conclusion.subject = Variable{};
  r.quantifier = rng.chance(0.5) ? Quantifier::People : Quantifier::Things;
  const bool adjective =
      is_variable(r.conclusion.subject) && r.conclusion.predicate.kind == PredicateKind::Attribute &&
      std::all_of(r.premises.begin(), r.premises.end(), [](const Atom& a) {
        return is_variable(a.subject) && a.predicate.kind == PredicateKind::Attribute &&
               a.polarity == Polarity::Pos;
      });
  if (adjective) {
    const auto pick = rng.index(3);
    r.form = pick == 0 ? RuleForm::Conditional : pick == 1 ? RuleForm::All : RuleForm::Bare;
  }
  return r;
}

class InstanceBuilder {
 public:
  InstanceBuilder(const GenConfig& config, Rng& rng) : cfg_(config), rng_(rng) {
    auto names = pool_or(cfg_.names, vocab::training_names());
    auto nouns = pool_or(cfg_.nouns, vocab::training_nouns());
    rng_.shuffle(names);
    rng_.shuffle(nouns);
    const int k = rng_.between(cfg_.entities.min, cfg_.entities.max);
    for (int i = 0; i < k; ++i) {
      const bool proper = nouns.empty() || (!names.empty() && rng_.chance(cfg_.proper_name_probability));
      auto& pool = proper ? names : nouns;
      if (pool.empty()) throw PoolExhaustedError("not enough entity names");
      entities_.push_back(proper ? Entity::proper(pool.back()) : Entity::common(pool.back()));
      pool.pop_back();
    }
    predicates_.emplace(pool_or(cfg_.attributes, vocab::training_attributes()), entities_, rng_);
  }

  const std::vector<Entity>& entities() const { return entities_; }

  Predicate fresh(const Entity& subject, bool attribute_only = false) {
    return predicates_->draw(rng_, cfg_.relation_probability, std::span(&subject, 1), attribute_only);
  }

  Predicate fresh(std::span<const Entity> subjects) {
    return predicates_->draw(rng_, cfg_.relation_probability, subjects);
  }

  Atom fresh_atom(const Entity& subject) {
    return {subject, fresh(subject), draw_polarity(rng_, cfg_.negation_probability)};
  }

  void add_fact(const Atom& a) {
    if (std::find(facts_.begin(), facts_.end(), a) != facts_.end()) return;
    if (std::find(facts_.begin(), facts_.end(), negated(a)) != facts_.end()) return;
    facts_.push_back(a);
  }

  void add_rule(Rule r) { rules_.push_back(std::move(r)); }

  // Goal chain a_0 .. a_depth about one entity; a_0 is given unless
  // `omit_leaf`. Returns the chain atoms.
  std::vector<Atom> skeleton(int depth, bool omit_leaf) {
    const Entity& e = entities_[rng_.index(entities_.size())];
    subject_ = e;
    std::vector<Atom> chain{fresh_atom(e)};
    skeleton_predicates_.push_back(chain[0].predicate);
    if (!omit_leaf) add_fact(chain[0]);
    for (int k = 1; k <= depth; ++k) {
      std::vector<Atom> premises{chain.back()};
      for (int extra = 0; extra < 2 && rng_.chance(cfg_.extra_premise_probability); ++extra) {
        Atom given = fresh_atom(e);
        skeleton_predicates_.push_back(given.predicate);
        add_fact(given);
        premises.push_back(given);
      }
      Atom next = fresh_atom(e);
      skeleton_predicates_.push_back(next.predicate);
      chain.push_back(next);
      add_rule(make_rule(std::move(premises), next, !rng_.chance(cfg_.ground_rule_probability), rng_));
    }
    return chain;
  }

  void distractor(const std::vector<Atom>& chain) {
    const int length = rng_.between(cfg_.distractor_length.min, cfg_.distractor_length.max);
    const int want = rng_.between(cfg_.distractor_entities.min, cfg_.distractor_entities.max);
    std::vector<Entity> pool = entities_;
    const bool intersect = !cfg_.cone_disjoint_distractors && chain.size() > 1;
    if (intersect) std::erase(pool, *subject_);
    if (pool.empty()) return;
    rng_.shuffle(pool);
    pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(want)));

    const bool variable = pool.size() > 1 || !rng_.chance(cfg_.ground_rule_probability);
    Atom current{pool[0], fresh(pool), draw_polarity(rng_, cfg_.negation_probability)};
    distractor_predicates_.push_back(current.predicate);
    for (const auto& e : pool) add_fact(ground(Atom{Variable{}, current.predicate, current.polarity}, e));
    for (int j = 1; j <= length; ++j) {
      Atom next{pool[0], fresh(pool), draw_polarity(rng_, cfg_.negation_probability)};
      if (intersect && j == length) {
        const auto& target = chain[1 + rng_.index(chain.size() - 1)];
        next.predicate = target.predicate;
        next.polarity = target.polarity;
      } else {
        distractor_predicates_.push_back(next.predicate);
      }
      std::vector<Atom> premises{current};
      if (variable) {
        add_rule(make_rule(std::move(premises), next, true, rng_));
      } else {
        add_rule(make_rule(std::move(premises), next, false, rng_));
      }
      current = next;
    }
  }

  // Facts and rules over non-goal predicates.
  void fillers() {
    const int nf = rng_.between(cfg_.facts_range.min, cfg_.facts_range.max);
    for (int i = 0; i < nf; ++i) {
      const Entity& e = entities_[rng_.index(entities_.size())];
      Atom a{e, reuse_or_fresh(e), draw_polarity(rng_, cfg_.negation_probability)};
      add_fact(a);
    }
    const int nr = rng_.between(cfg_.rules_range.min, cfg_.rules_range.max);
    for (int i = 0; i < nr; ++i) {
      const Entity& e = entities_[rng_.index(entities_.size())];
      std::vector<Atom> premises;
      const int np = 1 + static_cast<int>(rng_.chance(0.3));
      for (int k = 0; k < np; ++k) {
        Atom p{e, reuse_or_fresh(e), draw_polarity(rng_, cfg_.negation_probability)};
        if (std::find_if(premises.begin(), premises.end(), [&](const Atom& q) {
              return q.predicate == p.predicate;
            }) != premises.end())
          continue;
        premises.push_back(p);
      }
      Atom c{e, fresh(e), draw_polarity(rng_, cfg_.negation_probability)};
      distractor_predicates_.push_back(c.predicate);
      add_rule(make_rule(std::move(premises), c, !rng_.chance(cfg_.ground_rule_probability), rng_));
    }
  }

  // Facts first, then rules, each group shuffled; ids follow that order.
  Theory finish(std::string id) {
    rng_.shuffle(facts_);
    rng_.shuffle(rules_);
    Theory t;
    t.id = std::move(id);
    std::size_t pos = 0;
    for (auto& a : facts_) t.facts.push_back(Fact{sentence_id(pos++), a, std::nullopt});
    for (auto& r : rules_) {
      r.id = sentence_id(pos++);
      validate_rule(r);
      t.rules.push_back(r);
    }
    return t;
  }

  const std::vector<Predicate>& used_predicates() {
    all_used_ = skeleton_predicates_;
    all_used_.insert(all_used_.end(), distractor_predicates_.begin(), distractor_predicates_.end());
    return all_used_;
  }

 private:
  Predicate reuse_or_fresh(const Entity& subject) {
    std::vector<Predicate> options;
    for (const auto& p : distractor_predicates_) {
      if (!(p.object && *p.object == subject)) options.push_back(p);
    }
    if (!options.empty() && rng_.chance(0.5)) return options[rng_.index(options.size())];
    Predicate p = fresh(subject);
    distractor_predicates_.push_back(p);
    return p;
  }

  const GenConfig& cfg_;
  Rng& rng_;
  std::vector<Entity> entities_;
  std::optional<PredicatePool> predicates_;
  std::vector<Atom> facts_;
  std::vector<Rule> rules_;
  std::optional<Entity> subject_;
  std::vector<Predicate> skeleton_predicates_;
  std::vector<Predicate> distractor_predicates_;
  std::vector<Predicate> all_used_;
};

std::string instance_id(const GenConfig& config, std::size_t index) {
  std::string n = std::to_string(index + 1);
  if (n.size() < 5) n.insert(0, 5 - n.size(), '0');
  return config.id_prefix + n;
}

// Throws GenerationError describing the first violated constraint.
Instance attempt(const GenConfig& cfg, std::optional<int> target, const std::string& id, Rng& rng) {
  InstanceBuilder b(cfg, rng);
  const int depth = target ? *target : rng.between(1, 3);
  const auto chain = b.skeleton(depth, !target);
  const int chains = rng.between(cfg.distractor_chains.min, cfg.distractor_chains.max);
  for (int i = 0; i < chains; ++i) b.distractor(chain);
  b.fillers();
  Theory theory = b.finish(id);

  for (const auto& line : theory.lines()) {
    auto back = render(parse_sentence(line, 0));
    if (back != line) throw GenerationError("generated sentence does not round-trip: " + line);
  }

  const Closure closure = gold_closure(theory);
  if (closure.contradiction) throw GenerationError("theory derives a contradiction");

  std::vector<Statement> asked;
  auto ask_unknown = [&]() {
    const auto& preds = b.used_predicates();
    for (int tries = 0; tries < 200; ++tries) {
      const auto& e = b.entities()[rng.index(b.entities().size())];
      const auto& p = preds[rng.index(preds.size())];
      if (p.object && *p.object == e) continue;
      Statement s{Atom{e, p, draw_polarity(rng, 0.5)}};
      if (closure.atoms.contains(s.atom) || closure.atoms.contains(negated(s.atom))) continue;
      if (std::find(asked.begin(), asked.end(), s) != asked.end()) continue;
      asked.push_back(s);
      return;
    }
    throw GenerationError("could not find an unknown statement");
  };

  if (target) {
    for (int k = 0; k <= depth; ++k) {
      asked.push_back(Statement{chain[k]});
      asked.push_back(negate(Statement{chain[k]}));
      ask_unknown();
    }
  } else {
    for (int k = 0; k <= depth; ++k) {
      asked.push_back(Statement{chain[k]});
      asked.push_back(negate(Statement{chain[k]}));
    }
    if (!theory.facts.empty()) {
      const auto& f = theory.facts[rng.index(theory.facts.size())];
      asked.push_back(Statement{f.atom});
      asked.push_back(negate(Statement{f.atom}));
    }
    ask_unknown();
  }

  Instance inst{theory, {}};
  for (std::size_t i = 0; i < asked.size(); ++i) {
    auto gold = assign_gold(theory, closure, asked[i], cfg.proof_cap);
    if (gold.truncated) throw GenerationError("gold proof enumeration was truncated");
    inst.questions.push_back({id + "-q" + std::to_string(i + 1), asked[i], std::move(gold)});
  }

  const auto& goal = inst.questions[2 * static_cast<std::size_t>(depth) + (target ? depth : 0)].gold;
  if (target) {
    if (goal.label != Label::True || goal.depth != depth)
      throw GenerationError("goal depth " +
                            (goal.depth ? std::to_string(*goal.depth) : std::string("N/A")) +
                            " differs from target " + std::to_string(depth));
  } else if (goal.label != Label::Unknown) {
    throw GenerationError("goal of an unprovable instance is provable");
  }
  return inst;
}

}  // namespace

Instance generate_instance(const GenConfig& config, std::optional<int> target, std::size_t index,
                           std::uint64_t seed) {
  config.validate();
  const std::string id = instance_id(config, index);
  std::string last;
  for (int a = 0; a < config.max_retries; ++a) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(a)));
    try {
      return attempt(config, target, id, rng);
    } catch (const PoolExhaustedError& e) {
      last = e.what();
    } catch (const GenerationError& e) {
      last = e.what();
    }
  }
  throw GenerationError("instance " + id + " failed after " + std::to_string(config.max_retries) +
                        " attempts; last failure: " + last);
}

std::vector<Instance> generate_dataset(const GenConfig& config, int jobs) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.theories);
  std::vector<std::optional<Instance>> slots(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const auto& depths = config.target_depths;
        slots[i] = generate_instance(config, depths[i % depths.size()], i,
                                     mix_seed(config.seed, static_cast<std::uint64_t>(i)));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<Instance> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<std::string> sample_sentences(std::uint64_t seed, std::size_t count,
                                          const GenConfig& config) {
  std::vector<std::string> out;
  out.reserve(count);
  Rng rng(seed);
  while (out.size() < count) {
    GenConfig cfg = config;
    cfg.entities = {3, 5};
    InstanceBuilder b(cfg, rng);
    const auto& ents = b.entities();
    try {
      for (int i = 0; i < 8 && out.size() < count; ++i) {
        const std::size_t ei = rng.index(ents.size());
        const Entity& e = ents[ei];
        Sentence s;
        switch (rng.index(4)) {
          case 0:
            s = Fact{"", b.fresh_atom(e), std::nullopt};
            break;
          case 1: {
            const bool adjective = rng.chance(0.4);
            std::vector<Atom> premises;
            const int np = rng.between(1, 3);
            for (int k = 0; k < np; ++k)
              premises.push_back({e, b.fresh(e, adjective), draw_polarity(rng, adjective ? 0.0 : 0.3)});
            Atom c{e, b.fresh(e, adjective), draw_polarity(rng, 0.3)};
            s = make_rule(std::move(premises), c, true, rng);
            break;
          }
          case 2: {
            std::vector<Atom> premises{b.fresh_atom(e)};
            if (rng.chance(0.5)) premises.push_back(b.fresh_atom(e));
            s = make_rule(std::move(premises), b.fresh_atom(e), false, rng);
            break;
          }
          default: {
            // Quantified premise with a ground conclusion about another entity.
            const Entity& other = ents[(ei + 1 + rng.index(ents.size() - 1)) % ents.size()];
            std::vector<Atom> premises{b.fresh_atom(e)};
            if (rng.chance(0.3)) premises.push_back(b.fresh_atom(e));
            s = make_rule(std::move(premises), b.fresh_atom(other), true, rng);
            break;
          }
        }
        out.push_back(render(s));
      }
    } catch (const PoolExhaustedError&) {
      // Start over with a fresh predicate pool.
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Perturbation

std::string_view to_string(PerturbMode mode) {
  switch (mode) {
    case PerturbMode::Subject: return "subject";
    case PerturbMode::Attribute: return "attribute";
    case PerturbMode::Both: return "both";
  }
  return "subject";
}

std::optional<PerturbMode> perturb_mode_from_string(std::string_view text) {
  if (text == "subject") return PerturbMode::Subject;
  if (text == "attribute") return PerturbMode::Attribute;
  if (text == "both") return PerturbMode::Both;
  return std::nullopt;
}

namespace {

bool injective_map(const std::map<std::string, std::string>& m) {
  std::set<std::string> values;
  for (const auto& [k, v] : m) {
    if (!values.insert(v).second) return false;
  }
  return true;
}

std::map<std::string, std::string> invert(const std::map<std::string, std::string>& m) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : m) out.emplace(v, k);
  return out;
}

std::string lookup(const std::map<std::string, std::string>& m, const std::string& w) {
  auto it = m.find(w);
  return it == m.end() ? w : it->second;
}

}  // namespace

bool RenamingMap::injective() const {
  if (!injective_map(subjects) || !injective_map(attributes)) return false;
  for (const auto& [k, v] : subjects) {
    for (const auto& [k2, v2] : attributes) {
      if (v == v2) return false;
    }
  }
  return true;
}

RenamingMap RenamingMap::inverse() const {
  if (!injective()) throw MappingError("renaming map is not injective and cannot be inverted");
  return {mode, invert(subjects), invert(attributes)};
}

std::string RenamingMap::word(const std::string& w) const {
  if (auto it = subjects.find(w); it != subjects.end()) return it->second;
  if (auto it = attributes.find(w); it != attributes.end()) return it->second;
  // Sentence-initial attribute of a bare rule.
  if (!w.empty() && std::isupper(static_cast<unsigned char>(w[0]))) {
    std::string lower = w;
    lower[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(lower[0])));
    if (auto it = attributes.find(lower); it != attributes.end()) {
      std::string out = it->second;
      out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
      return out;
    }
  }
  return w;
}

Entity RenamingMap::apply(const Entity& e) const { return {e.kind, lookup(subjects, e.surface)}; }

Atom RenamingMap::apply(const Atom& a) const {
  Atom out = a;
  if (!is_variable(a.subject)) out.subject = apply(std::get<Entity>(a.subject));
  if (a.predicate.kind == PredicateKind::Attribute) {
    out.predicate.word = lookup(attributes, a.predicate.word);
  } else {
    out.predicate.object = apply(*a.predicate.object);
  }
  return out;
}

Theory RenamingMap::apply(const Theory& t) const {
  Theory out = t;
  for (auto& f : out.facts) f.atom = apply(f.atom);
  for (auto& r : out.rules) {
    for (auto& p : r.premises) p = apply(p);
    r.conclusion = apply(r.conclusion);
  }
  return out;
}

Statement RenamingMap::apply(const Statement& s) const { return {apply(s.atom)}; }

std::string RenamingMap::apply_text(std::string_view text) const {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isalpha(static_cast<unsigned char>(text[i]))) {
      out += text[i++];
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) ++j;
    out += word(std::string(text.substr(i, j - i)));
    i = j;
  }
  return out;
}

EquivalenceSet perturb(const Instance& instance, PerturbMode mode, std::uint64_t seed, int n) {
  if (n < 1) throw GenerationError("need at least one variant");
  std::set<std::string> names, nouns, attributes;
  auto note = [&](const Entity& e) {
    (e.kind == EntityKind::ProperName ? names : nouns).insert(e.surface);
  };
  auto note_atom = [&](const Atom& a) {
    if (!is_variable(a.subject)) note(std::get<Entity>(a.subject));
    if (a.predicate.kind == PredicateKind::Attribute) {
      attributes.insert(a.predicate.word);
    } else {
      note(*a.predicate.object);
    }
  };
  for (const auto& f : instance.theory.facts) note_atom(f.atom);
  for (const auto& r : instance.theory.rules) {
    for (const auto& p : r.premises) note_atom(p);
    note_atom(r.conclusion);
  }
  for (const auto& q : instance.questions) note_atom(q.statement.atom);

  auto sample = [](const std::set<std::string>& domain, std::span<const std::string_view> pool,
                   Rng& rng, const char* what) {
    std::map<std::string, std::string> m;
    if (domain.size() > pool.size())
      throw PoolExhaustedError(std::string("robustness pool of ") + what + " has " +
                               std::to_string(pool.size()) + " entries but " +
                               std::to_string(domain.size()) + " are needed");
    std::vector<std::string> shuffled(pool.begin(), pool.end());
    rng.shuffle(shuffled);
    std::size_t i = 0;
    for (const auto& w : domain) m.emplace(w, shuffled[i++]);
    return m;
  };

  EquivalenceSet set{instance, {}};
  const auto& base_id = instance.theory.id;
  for (int k = 1; k <= n; ++k) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(k)));
    RenamingMap map;
    map.mode = mode;
    if (mode != PerturbMode::Attribute) {
      map.subjects = sample(names, vocab::robust_names(), rng, "names");
      auto common = sample(nouns, vocab::robust_nouns(), rng, "nouns");
      map.subjects.insert(common.begin(), common.end());
    }
    if (mode != PerturbMode::Subject)
      map.attributes = sample(attributes, vocab::robust_attributes(), rng, "attributes");

    Variant v{{map.apply(instance.theory), {}}, map, k};
    const std::string vid = base_id + "-v" + std::to_string(k);
    v.instance.theory.id = vid;
    for (const auto& q : instance.questions) {
      std::string qid = q.id;
      if (qid.rfind(base_id, 0) == 0) qid = vid + qid.substr(base_id.size());
      GoldAnnotation gold = q.gold;
      for (auto& p : gold.proofs) p = map.apply_text(p);
      v.instance.questions.push_back({qid, map.apply(q.statement), std::move(gold)});
    }
    set.variants.push_back(std::move(v));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Training records

TrainingRecords emit_training_records(const Instance& instance) {
  TrainingRecords out;
  const Theory& t = instance.theory;
  std::vector<const Fact*> given;
  for (const auto& f : t.facts) given.push_back(&f);
  std::stable_sort(given.begin(), given.end(), [](const Fact* a, const Fact* b) {
    return sentence_number(a->id).value_or(0) < sentence_number(b->id).value_or(0);
  });
  std::vector<const Rule*> rules;
  for (const auto& r : t.rules) rules.push_back(&r);
  std::stable_sort(rules.begin(), rules.end(), [](const Rule* a, const Rule* b) {
    return sentence_number(a->id).value_or(0) < sentence_number(b->id).value_or(0);
  });
  std::vector<std::string> rule_texts;
  for (const Rule* r : rules) rule_texts.push_back(render(*r));

  for (const auto& q : instance.questions) {
    const std::string statement = render(q.statement);
    std::vector<std::string> facts;
    std::map<std::string, int> index_of;
    for (const Fact* f : given) {
      index_of.emplace(f->id, static_cast<int>(facts.size()));
      facts.push_back(render(*f));
    }
    if (q.gold.label != Label::Unknown && !q.gold.proofs.empty()) {
      const auto proof = parse_proof(q.gold.proofs.front());
      const Atom proven = q.gold.label == Label::False ? negated(q.statement.atom) : q.statement.atom;
      const auto check = check_proof(t, proof, proven);
      if (!check.valid) throw ProofError("gold proof of " + q.id + " does not check: " + check.error);
      for (std::size_t k = 0; k < proof.steps().size(); ++k) {
        const auto& s = proof.steps()[k];
        int rule_index = 0;
        for (std::size_t r = 0; r < rules.size(); ++r) {
          if (rules[r]->id == s.rule_id) rule_index = static_cast<int>(r) + 1;
        }
        const std::string rule_text = rule_texts[static_cast<std::size_t>(rule_index - 1)];
        std::vector<int> selected;
        std::vector<std::string> selected_text;
        for (const auto& in : s.inputs) {
          const int idx = index_of.at(in);
          selected.push_back(idx);
          selected_text.push_back(facts[static_cast<std::size_t>(idx)]);
        }
        const std::string conclusion = render(check.conclusions[k]);
        out.rs.push_back({q.id, statement, facts, rule_texts, rule_index});
        out.fs.push_back({q.id, statement, rule_text, facts, selected});
        out.kc.push_back({q.id, rule_text, selected_text, conclusion});
        index_of.emplace(s.output, static_cast<int>(facts.size()));
        facts.push_back(conclusion);
      }
    }
    out.rs.push_back({q.id, statement, facts, rule_texts, 0});
  }
  return out;
}

}  // namespace modus
