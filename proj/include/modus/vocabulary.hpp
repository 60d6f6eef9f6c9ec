#pragma once

#include <optional>
#include <span>
#include <string_view>

// Word pools for the controlled language. The training pools are what the
// generator draws from; the robustness pools are held out and only used by
// perturbation.
namespace modus::vocab {

std::span<const std::string_view> training_names();
std::span<const std::string_view> training_nouns();
std::span<const std::string_view> training_attributes();

std::span<const std::string_view> robust_names();
std::span<const std::string_view> robust_nouns();
std::span<const std::string_view> robust_attributes();

// Base forms of the relation verbs.
std::span<const std::string_view> verbs();

bool is_known_name(std::string_view word);
bool is_known_noun(std::string_view word);
bool is_known_attribute(std::string_view word);

bool is_verb(std::string_view base);
// "likes" -> "like"; nullopt for anything outside the verb table.
std::optional<std::string_view> verb_from_third_person(std::string_view word);
// "like" -> "likes". Precondition: is_verb(base).
std::string_view third_person(std::string_view base);

// Grammar words that can never be content words.
bool is_keyword(std::string_view word);

}  // namespace modus::vocab
