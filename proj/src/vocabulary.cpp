#include "modus/vocabulary.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <utility>

namespace modus::vocab {
namespace {

constexpr std::array<std::string_view, 8> kTrainingNames = {
    "Anne", "Bob", "Charlie", "Dave", "Erin", "Fiona", "Gary", "Harry"};

constexpr std::array<std::string_view, 9> kTrainingNouns = {
    "bear", "cat", "cow", "dog", "lion", "mouse", "rabbit", "squirrel", "tiger"};

constexpr std::array<std::string_view, 14> kTrainingAttributes = {
    "big",   "blue",  "cold",  "furry", "green", "kind",  "nice",
    "quiet", "red",   "rough", "round", "smart", "white", "young"};

constexpr std::array<std::string_view, 18> kRobustNames = {
    "George", "Paul",  "Ronald", "Emma",  "Magnus", "Timothy",
    "Chris",  "Molly", "Diana",  "Joseph", "Becky", "Kurt",
    "Ivan",   "Steve", "Laura",  "Oliver", "Adam",  "Larry"};

constexpr std::array<std::string_view, 30> kRobustNouns = {
    "mother",    "father",   "baby",       "child",     "toddler",   "teenager",
    "grandmother", "student", "teacher",   "alligator", "cricket",   "bird",
    "wolf",      "giraffe",  "dinosaur",   "thief",     "soldier",   "officer",
    "artist",    "shopkeeper", "caretaker", "janitor",  "minister",  "salesman",
    "saleswoman", "runner",  "racer",      "painter",   "dresser",   "shoplifter"};

constexpr std::array<std::string_view, 30> kRobustAttributes = {
    "maroon",   "brown",     "black",       "orange",     "cordial",   "friendly",
    "adorable", "old",       "soft",        "violent",    "intelligent", "square",
    "warm",     "large",     "cylindrical", "spherical",  "tiny",      "microscopic",
    "brilliant", "noisy",    "playful",     "tender",     "gracious",  "patient",
    "funny",    "hilarious", "thorny",      "sensitive",  "diplomatic", "thoughtful"};

constexpr std::array<std::pair<std::string_view, std::string_view>, 6> kVerbs = {{
    {"chase", "chases"},
    {"eat", "eats"},
    {"like", "likes"},
    {"need", "needs"},
    {"see", "sees"},
    {"visit", "visits"},
}};

constexpr std::array<std::string_view, 6> kVerbBases = {"chase", "eat", "like",
                                                        "need",  "see", "visit"};

constexpr std::array<std::string_view, 19> kKeywords = {
    "if",     "then",      "and",  "all", "is",   "are",  "not",
    "does",   "do",        "the",  "people", "things", "someone",
    "something", "they",   "it",   "a",   "an",   "or"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& pool, std::string_view word) {
  return std::find(pool.begin(), pool.end(), word) != pool.end();
}

}  // namespace

std::span<const std::string_view> training_names() { return kTrainingNames; }
std::span<const std::string_view> training_nouns() { return kTrainingNouns; }
std::span<const std::string_view> training_attributes() { return kTrainingAttributes; }
std::span<const std::string_view> robust_names() { return kRobustNames; }
std::span<const std::string_view> robust_nouns() { return kRobustNouns; }
std::span<const std::string_view> robust_attributes() { return kRobustAttributes; }
std::span<const std::string_view> verbs() { return kVerbBases; }

bool is_known_name(std::string_view word) {
  return contains(kTrainingNames, word) || contains(kRobustNames, word);
}

bool is_known_noun(std::string_view word) {
  return contains(kTrainingNouns, word) || contains(kRobustNouns, word);
}

bool is_known_attribute(std::string_view word) {
  return contains(kTrainingAttributes, word) || contains(kRobustAttributes, word);
}

bool is_verb(std::string_view base) { return contains(kVerbBases, base); }

std::optional<std::string_view> verb_from_third_person(std::string_view word) {
  for (const auto& [base, third] : kVerbs) {
    if (third == word) return base;
  }
  return std::nullopt;
}

std::string_view third_person(std::string_view base) {
  for (const auto& [b, third] : kVerbs) {
    if (b == base) return third;
  }
  assert(false && "third_person: verb outside the verb table");
  return base;
}

bool is_keyword(std::string_view word) { return contains(kKeywords, word); }

}  // namespace modus::vocab
