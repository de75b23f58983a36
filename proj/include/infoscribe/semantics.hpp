#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "infoscribe/description.hpp"

namespace infoscribe {

// Externally supplied semantic conventions. The module ships no built-in
// vocabulary: with an empty lexicon nothing fires and nothing is affirmed.
struct WordEntry {
  std::string name;
  bool has_intensity = false;
  double intensity_lo = 0.0, intensity_hi = 255.0;
  bool has_area_fraction = false;
  double area_fraction_lo = 0.0, area_fraction_hi = 1.0;
  struct Requirement {
    RelationKind kind;
    std::string target;  // word name whose attributes the related region must match

    bool operator==(const Requirement&) const = default;
  };
  std::vector<Requirement> relations;

  int constraint_count() const {
    return (has_intensity ? 1 : 0) + (has_area_fraction ? 1 : 0) +
           static_cast<int>(relations.size());
  }

  bool operator==(const WordEntry&) const = default;
};

struct PhraseEntry {
  std::string name;
  std::vector<std::string> members;  // word names
  struct Requirement {
    RelationKind kind;  // same-level kinds only
    std::string subject, object;  // member word names

    bool operator==(const Requirement&) const = default;
  };
  std::vector<Requirement> requirements;
  std::string sentence;  // pattern with {word} placeholders

  bool operator==(const PhraseEntry&) const = default;
};

struct Lexicon {
  std::string title_pattern;  // pattern with a {phrases} placeholder
  std::vector<WordEntry> words;      // declaration order matters (tie-breaks)
  std::vector<PhraseEntry> phrases;  // declaration order matters (narrative)

  bool operator==(const Lexicon&) const = default;
};

// label -> word name, finest level only, ascending label.
using Assignments = std::vector<std::pair<std::uint32_t, std::string>>;

// One affirmed occurrence of a phrase; bindings follow member order.
struct PhraseInstance {
  std::string phrase;
  std::vector<std::pair<std::string, std::uint32_t>> bindings;  // (word, label)

  bool operator==(const PhraseInstance&) const = default;
};

struct Annotation {
  Assignments assignments;
  std::vector<std::uint32_t> unmatched;  // ascending
  std::vector<PhraseInstance> phrases;
  std::string narrative;

  bool operator==(const Annotation&) const = default;
};

// Parses and validates a "lex-1" lexicon. Throws SchemaError, VersionError,
// DanglingReference or EmptyRange.
Lexicon load_lexicon(std::string_view text);

// Canonical form of a lexicon; load_lexicon(serialize_lexicon(l)) == l and
// re-serialization is byte-identical.
std::string serialize_lexicon(const Lexicon& lex);

// Fires the best-matching word on every finest-level region. A word matches
// when its attribute ranges hold and each required relation reaches a region
// that tentatively matches the target word's attributes; the winner has the
// most constraints, ties to earliest declaration.
Assignments fire_labels(const ImageDescription& d, const Lexicon& lex);

// Affirms every phrase binding: member words mapped to distinct assigned
// regions satisfying all pairwise relation requirements. Bindings enumerate
// regions in ascending label order; a region may appear in many phrases.
std::vector<PhraseInstance> affirm_context(const Assignments& assignments,
                                           const ImageDescription& d, const Lexicon& lex);

// Title line from title_pattern, then one sentence per affirmed phrase, in
// the given order. With nothing affirmed the body is "No phrases affirmed."
std::string compose_narrative(const std::vector<PhraseInstance>& affirmed,
                              const Lexicon& lex);

// fire + affirm + compose in one step.
Annotation annotate(const ImageDescription& d, const Lexicon& lex);

// Canonical "ann-1" annotation document.
std::string serialize_annotation(const Annotation& a);

inline constexpr std::string_view kLexiconFormatVersion = "lex-1";
inline constexpr std::string_view kAnnotationFormatVersion = "ann-1";

}  // namespace infoscribe
