#include "modus/language.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

#include "modus/errors.hpp"
#include "modus/vocabulary.hpp"

namespace modus {

TheoryParseError::TheoryParseError(std::vector<LineError> errors)
    : Error([&] {
        std::ostringstream out;
        out << "theory has " << errors.size() << " malformed line(s)";
        for (const auto& e : errors) out << "; line " << e.line << ": " << e.message;
        return out.str();
      }()),
      errors_(std::move(errors)) {}

Entity Entity::proper(std::string name) { return {EntityKind::ProperName, std::move(name)}; }

Entity Entity::common(std::string noun) { return {EntityKind::CommonNoun, std::move(noun)}; }

std::string Entity::render(bool sentence_initial) const {
  if (kind == EntityKind::ProperName) return surface;
  return (sentence_initial ? "The " : "the ") + surface;
}

Predicate Predicate::attribute(std::string attr) {
  return {PredicateKind::Attribute, std::move(attr), std::nullopt};
}

Predicate Predicate::relation(std::string verb, Entity object) {
  return {PredicateKind::Relation, std::move(verb), std::move(object)};
}

Atom negated(Atom atom) {
  atom.polarity = flip(atom.polarity);
  return atom;
}

Statement negate(const Statement& statement) { return {negated(statement.atom)}; }

std::string_view to_string(Polarity p) { return p == Polarity::Pos ? "pos" : "neg"; }

std::string sentence_id(std::size_t position) { return "sent" + std::to_string(position + 1); }

std::optional<std::size_t> sentence_number(std::string_view id) {
  constexpr std::string_view prefix = "sent";
  if (id.size() <= prefix.size() || id.substr(0, prefix.size()) != prefix) return std::nullopt;
  auto digits = id.substr(prefix.size());
  if (digits.front() == '0') return std::nullopt;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  return value;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Theory accessors

std::vector<Sentence> Theory::sentences() const {
  std::vector<std::pair<std::size_t, Sentence>> keyed;
  keyed.reserve(size());
  std::size_t fallback = 0;
  for (const auto& f : facts) keyed.emplace_back(sentence_number(f.id).value_or(++fallback), f);
  for (const auto& r : rules) keyed.emplace_back(sentence_number(r.id).value_or(++fallback), r);
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Sentence> out;
  out.reserve(keyed.size());
  for (auto& [_, s] : keyed) out.push_back(std::move(s));
  return out;
}

std::vector<std::string> Theory::lines() const {
  std::vector<std::string> out;
  for (const auto& s : sentences()) out.push_back(render(s));
  return out;
}

std::vector<Entity> Theory::entities() const {
  std::vector<Entity> out;
  auto note = [&](const Entity& e) {
    if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
  };
  auto visit = [&](const Atom& a) {
    if (const auto* e = std::get_if<Entity>(&a.subject)) note(*e);
    if (a.predicate.object) note(*a.predicate.object);
  };
  for (const auto& s : sentences()) {
    if (const auto* f = std::get_if<Fact>(&s)) {
      visit(f->atom);
    } else {
      const auto& r = std::get<Rule>(s);
      for (const auto& p : r.premises) visit(p);
      visit(r.conclusion);
    }
  }
  return out;
}

const Fact* Theory::find_fact(std::string_view id) const {
  for (const auto& f : facts) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

const Rule* Theory::find_rule(std::string_view id) const {
  for (const auto& r : rules) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::optional<std::size_t> Theory::rule_index(std::string_view id) const {
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (rules[i].id == id) return i;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string render_clause(const Atom& atom, std::string_view variable_word, bool initial,
                          bool plural) {
  std::string out = is_variable(atom.subject)
                        ? std::string(variable_word)
                        : std::get<Entity>(atom.subject).render(initial);
  const bool neg = atom.polarity == Polarity::Neg;
  const auto& pred = atom.predicate;
  if (pred.kind == PredicateKind::Attribute) {
    out += plural ? " are " : " is ";
    if (neg) out += "not ";
    out += pred.word;
  } else {
    if (neg) {
      out += plural ? " do not " : " does not ";
      out += pred.word;
    } else {
      out += ' ';
      out += plural ? pred.word : std::string(vocab::third_person(pred.word));
    }
    out += ' ';
    out += pred.object->render(false);
  }
  return out;
}

bool merges_with_previous(const Atom& prev, const Atom& cur) {
  return is_variable(prev.subject) && is_variable(cur.subject) &&
         prev.predicate.kind == PredicateKind::Attribute &&
         cur.predicate.kind == PredicateKind::Attribute;
}

std::string_view group_word(Quantifier q) { return q == Quantifier::People ? "people" : "things"; }

}  // namespace

std::string render(const Atom& ground_atom) {
  return render_clause(ground_atom, "", true, false) + ".";
}

std::string render(const Fact& fact) { return render(fact.atom); }

std::string render(const Statement& statement) { return render(statement.atom); }

std::string render(const Rule& rule) {
  if (rule.form == RuleForm::All || rule.form == RuleForm::Bare) {
    std::string attrs;
    for (std::size_t i = 0; i < rule.premises.size(); ++i) {
      if (i > 0) attrs += ", ";
      attrs += rule.premises[i].predicate.word;
    }
    std::string out = rule.form == RuleForm::All ? "All " + attrs : capitalize(attrs);
    out += ' ';
    out += group_word(rule.quantifier);
    out += " are ";
    if (rule.conclusion.polarity == Polarity::Neg) out += "not ";
    out += rule.conclusion.predicate.word;
    out += '.';
    return out;
  }

  const bool people = rule.quantifier == Quantifier::People;
  bool introduced = false;
  auto clause = [&](const Atom& a) {
    if (!is_variable(a.subject)) return render_clause(a, "", false, false);
    if (!introduced) {
      introduced = true;
      return render_clause(a, people ? "someone" : "something", false, false);
    }
    return render_clause(a, people ? "they" : "it", false, people);
  };

  std::string out = "If ";
  for (std::size_t i = 0; i < rule.premises.size(); ++i) {
    const auto& p = rule.premises[i];
    if (i > 0) {
      out += " and ";
      if (merges_with_previous(rule.premises[i - 1], p)) {
        if (p.polarity == Polarity::Neg) out += "not ";
        out += p.predicate.word;
        continue;
      }
    }
    out += clause(p);
  }
  out += " then ";
  out += clause(rule.conclusion);
  out += '.';
  return out;
}

std::string render(const Sentence& sentence) {
  return std::visit([](const auto& s) { return render(s); }, sentence);
}

void validate_rule(const Rule& rule) {
  auto fail = [&](const std::string& why) { throw Error("malformed rule " + rule.id + ": " + why); };
  if (rule.premises.empty() || rule.premises.size() > 3) fail("needs 1 to 3 premises");
  const bool any_variable_premise =
      std::any_of(rule.premises.begin(), rule.premises.end(),
                  [](const Atom& a) { return is_variable(a.subject); });
  if (rule.quantifier == Quantifier::None) {
    if (any_variable_premise || is_variable(rule.conclusion.subject))
      fail("ground rule mentions a variable");
  } else if (!any_variable_premise) {
    fail("quantified rule never binds its variable in a premise");
  }
  if (rule.form != RuleForm::Conditional) {
    if (rule.quantifier == Quantifier::None) fail("adjective form requires a quantifier");
    for (const auto& p : rule.premises) {
      if (!is_variable(p.subject) || p.predicate.kind != PredicateKind::Attribute ||
          p.polarity != Polarity::Pos)
        fail("adjective form premises must be positive attributes of the variable");
    }
    if (!is_variable(rule.conclusion.subject) ||
        rule.conclusion.predicate.kind != PredicateKind::Attribute)
      fail("adjective form conclusion must be an attribute of the variable");
  }
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Token {
  std::string text;
  std::size_t offset = 0;
};

bool is_alpha_word(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0;
  });
}

bool is_lower_word(std::string_view w) {
  return is_alpha_word(w) && std::all_of(w.begin(), w.end(), [](char c) {
    return std::islower(static_cast<unsigned char>(c)) != 0;
  });
}

bool is_capitalized(std::string_view w) {
  return is_alpha_word(w) && std::isupper(static_cast<unsigned char>(w[0])) &&
         is_lower_word(w.substr(1).empty() ? std::string_view("x") : w.substr(1));
}

std::string lowercase(std::string_view w) {
  std::string out(w);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_subject_word(std::string_view w) {
  return w == "someone" || w == "something" || w == "they" || w == "it";
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (c == ',' || c == '.') {
      out.push_back({std::string(1, static_cast<char>(c)), i});
      ++i;
    } else if (std::isalpha(c)) {
      std::size_t j = i;
      while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
      out.push_back({std::string(text.substr(i, j - i)), i});
      i = j;
    } else {
      throw ParseError(std::string("unexpected character '") + static_cast<char>(c) + "'", i);
    }
  }
  return out;
}

struct Subject {
  Term term;
  bool plural = false;
};

class SentenceParser {
 public:
  SentenceParser(std::string_view text, const ParseOptions& options)
      : text_(text), options_(options), tokens_(tokenize(text)) {}

  Sentence parse(std::size_t position) {
    if (tokens_.empty()) throw ParseError("empty sentence", 0);
    if (tokens_.back().text != ".") throw ParseError("sentence must end with '.'", text_.size());
    const auto& first = tokens_[0].text;
    if (first == "If") return finish_rule(parse_conditional(), position);
    if (first == "All") return finish_rule(parse_adjective(true), position);
    if (tokens_.size() > 1 &&
        (tokens_[1].text == "," || tokens_[1].text == "people" || tokens_[1].text == "things"))
      return finish_rule(parse_adjective(false), position);
    Fact fact{sentence_id(position), parse_ground_clause(), std::nullopt};
    return fact;
  }

  Statement parse_statement() {
    if (tokens_.empty()) throw ParseError("empty statement", 0);
    if (tokens_.back().text != ".") throw ParseError("statement must end with '.'", text_.size());
    return Statement{parse_ground_clause()};
  }

 private:
  [[noreturn]] void fail(std::size_t offset, const std::string& message) const {
    throw ParseError(message, offset);
  }

  const Token* peek(std::size_t ahead = 0) const {
    return pos_ + ahead < tokens_.size() ? &tokens_[pos_ + ahead] : nullptr;
  }

  bool at(std::string_view word, std::size_t ahead = 0) const {
    const auto* t = peek(ahead);
    return t != nullptr && t->text == word;
  }

  std::size_t offset_here() const { return pos_ < tokens_.size() ? tokens_[pos_].offset : text_.size(); }

  std::string describe_here() const {
    const auto* t = peek();
    return t ? "'" + t->text + "'" : "end of sentence";
  }

  void expect(std::string_view word, std::size_t clause_start) {
    if (!at(word)) fail(clause_start, "expected '" + std::string(word) + "' but found " + describe_here());
    ++pos_;
  }

  void expect_end(std::size_t clause_start) {
    expect(".", clause_start);
    if (pos_ != tokens_.size()) fail(offset_here(), "trailing tokens after '.'");
  }

  Entity parse_np(bool initial, std::size_t clause_start) {
    const auto* t = peek();
    if (t == nullptr) fail(clause_start, "expected a name or 'the <noun>'");
    if (t->text == (initial ? "The" : "the")) {
      ++pos_;
      const auto* noun = peek();
      if (noun == nullptr || !is_lower_word(noun->text) || vocab::is_keyword(noun->text) ||
          vocab::verb_from_third_person(noun->text))
        fail(clause_start, "expected a noun after 'the' but found " + describe_here());
      if (options_.strict_vocabulary && !vocab::is_known_noun(noun->text))
        throw UnknownTokenError(noun->text, noun->offset);
      ++pos_;
      return Entity::common(noun->text);
    }
    if (is_capitalized(t->text) && !vocab::is_keyword(lowercase(t->text))) {
      if (options_.strict_vocabulary && !vocab::is_known_name(t->text))
        throw UnknownTokenError(t->text, t->offset);
      ++pos_;
      return Entity::proper(t->text);
    }
    fail(clause_start, "expected a name or 'the <noun>' but found " + describe_here());
  }

  std::string parse_attribute(std::size_t clause_start, bool capitalized = false) {
    const auto* t = peek();
    if (t == nullptr) fail(clause_start, "expected an attribute");
    // Sentence-initial attributes are capitalized in canonical text; a
    // lowercase one is accepted and normalized on render.
    std::string word = capitalized && is_capitalized(t->text) ? lowercase(t->text) : t->text;
    if (!is_lower_word(word) || vocab::is_keyword(word) || vocab::verb_from_third_person(word) ||
        vocab::is_verb(word))
      fail(clause_start, "expected an attribute but found " + describe_here());
    if (options_.strict_vocabulary && !vocab::is_known_attribute(word))
      throw UnknownTokenError(t->text, t->offset);
    ++pos_;
    return word;
  }

  std::string parse_base_verb(std::size_t clause_start) {
    const auto* t = peek();
    if (t == nullptr || !vocab::is_verb(t->text))
      fail(clause_start, "expected a verb but found " + describe_here());
    ++pos_;
    return t->text;
  }

  // Subject of a clause inside a rule (or a fact when `in_rule` is false).
  Subject parse_subject(bool initial, bool in_rule, bool may_introduce, std::size_t clause_start) {
    const auto* t = peek();
    if (in_rule && t != nullptr && is_subject_word(t->text)) {
      const auto& w = t->text;
      if (w == "someone" || w == "something") {
        if (introduced_) fail(clause_start, "variable already introduced; use 'they' or 'it'");
        if (!may_introduce) fail(clause_start, "the variable must be introduced in a premise");
        quantifier_ = w == "someone" ? Quantifier::People : Quantifier::Things;
        introduced_ = true;
        ++pos_;
        return {Variable{}, false};
      }
      if (!introduced_) fail(clause_start, "'" + w + "' refers to a variable that was never introduced");
      const bool people = quantifier_ == Quantifier::People;
      if ((w == "they") != people)
        fail(clause_start, "pronoun '" + w + "' does not agree with the quantifier");
      ++pos_;
      return {Variable{}, w == "they"};
    }
    return {parse_np(initial, clause_start), false};
  }

  std::pair<Predicate, Polarity> parse_predicate(bool plural, std::size_t clause_start) {
    const auto* t = peek();
    if (t == nullptr) fail(clause_start, "expected a predicate");
    const std::string copula = plural ? "are" : "is";
    const std::string aux = plural ? "do" : "does";
    if (t->text == copula) {
      ++pos_;
      Polarity pol = Polarity::Pos;
      if (at("not")) {
        ++pos_;
        pol = Polarity::Neg;
      }
      return {Predicate::attribute(parse_attribute(clause_start)), pol};
    }
    if (t->text == aux) {
      ++pos_;
      expect("not", clause_start);
      auto verb = parse_base_verb(clause_start);
      return {Predicate::relation(std::move(verb), parse_np(false, clause_start)), Polarity::Neg};
    }
    std::optional<std::string> verb;
    if (plural) {
      if (vocab::is_verb(t->text)) verb = t->text;
    } else if (auto base = vocab::verb_from_third_person(t->text)) {
      verb = std::string(*base);
    }
    if (!verb) fail(clause_start, "expected a predicate but found " + describe_here());
    ++pos_;
    return {Predicate::relation(std::move(*verb), parse_np(false, clause_start)), Polarity::Pos};
  }

  Atom parse_ground_clause() {
    const std::size_t start = offset_here();
    Entity subject = parse_np(true, start);
    auto [pred, pol] = parse_predicate(false, start);
    expect_end(start);
    return Atom{std::move(subject), std::move(pred), pol};
  }

  Atom parse_rule_clause(bool may_introduce) {
    const std::size_t start = offset_here();
    auto subject = parse_subject(false, true, may_introduce, start);
    auto [pred, pol] = parse_predicate(subject.plural, start);
    return Atom{std::move(subject.term), std::move(pred), pol};
  }

  bool continuation_ahead() const {
    const auto* t = peek();
    if (t == nullptr) return false;
    if (t->text == "not") return true;
    return is_lower_word(t->text) && !vocab::is_keyword(t->text) && !is_subject_word(t->text) &&
           !vocab::verb_from_third_person(t->text) && !vocab::is_verb(t->text);
  }

  Rule parse_conditional() {
    ++pos_;  // "If"
    Rule rule;
    rule.premises.push_back(parse_rule_clause(true));
    while (at("and")) {
      ++pos_;
      const std::size_t start = offset_here();
      const Atom& prev = rule.premises.back();
      if (continuation_ahead()) {
        if (!is_variable(prev.subject) || prev.predicate.kind != PredicateKind::Attribute)
          fail(start, "an attribute continuation must follow an attribute of the variable");
        Polarity pol = Polarity::Pos;
        if (at("not")) {
          ++pos_;
          pol = Polarity::Neg;
        }
        rule.premises.push_back(Atom{Variable{}, Predicate::attribute(parse_attribute(start)), pol});
        continue;
      }
      Atom next = parse_rule_clause(true);
      if (merges_with_previous(prev, next))
        fail(start, "repeat attributes of the variable as '... is A and B'");
      rule.premises.push_back(std::move(next));
    }
    if (!at("then")) fail(offset_here(), "expected 'then' but found " + describe_here());
    ++pos_;
    const std::size_t concl_start = offset_here();
    rule.conclusion = parse_rule_clause(false);
    expect_end(concl_start);
    rule.quantifier = introduced_ ? quantifier_ : Quantifier::None;
    rule.form = RuleForm::Conditional;
    return rule;
  }

  Rule parse_adjective(bool with_all) {
    const std::size_t start = 0;
    if (with_all) ++pos_;
    Rule rule;
    auto add = [&](std::string attr) {
      rule.premises.push_back(Atom{Variable{}, Predicate::attribute(std::move(attr)), Polarity::Pos});
    };
    add(parse_attribute(start, !with_all));
    while (at(",")) {
      ++pos_;
      add(parse_attribute(start));
    }
    if (at("people")) {
      rule.quantifier = Quantifier::People;
    } else if (at("things")) {
      rule.quantifier = Quantifier::Things;
    } else {
      fail(start, "expected 'people' or 'things' but found " + describe_here());
    }
    ++pos_;
    expect("are", start);
    Polarity pol = Polarity::Pos;
    if (at("not")) {
      ++pos_;
      pol = Polarity::Neg;
    }
    rule.conclusion = Atom{Variable{}, Predicate::attribute(parse_attribute(start)), pol};
    expect_end(start);
    rule.form = with_all ? RuleForm::All : RuleForm::Bare;
    return rule;
  }

  Rule finish_rule(Rule rule, std::size_t position) {
    rule.id = sentence_id(position);
    if (rule.premises.size() > 3) throw ParseError("a rule takes at most 3 premises", 0);
    try {
      validate_rule(rule);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), 0);
    }
    return rule;
  }

  std::string_view text_;
  const ParseOptions& options_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  Quantifier quantifier_ = Quantifier::None;
  bool introduced_ = false;
};

}  // namespace

Sentence parse_sentence(std::string_view text, std::size_t position, const ParseOptions& options) {
  return SentenceParser(text, options).parse(position);
}

Statement parse_statement(std::string_view text, const ParseOptions& options) {
  return SentenceParser(text, options).parse_statement();
}

Theory parse_theory(std::span<const std::string> lines, const ParseOptions& options,
                    std::string id) {
  Theory theory;
  theory.id = std::move(id);
  std::vector<LineError> errors;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      auto sentence = parse_sentence(lines[i], i, options);
      if (auto* f = std::get_if<Fact>(&sentence)) {
        theory.facts.push_back(std::move(*f));
      } else {
        theory.rules.push_back(std::get<Rule>(std::move(sentence)));
      }
    } catch (const ParseError& e) {
      errors.push_back({i + 1, e.offset(), e.what()});
    }
  }
  if (!errors.empty()) throw TheoryParseError(std::move(errors));
  return theory;
}

}  // namespace modus
