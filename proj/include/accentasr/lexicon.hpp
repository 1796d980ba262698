#pragma once

#include <string>
#include <vector>

#include "accentasr/accent.hpp"

namespace accentasr {

// Allowed word characters; words are case-folded to lower before lookup.
struct Alphabet {
  std::string chars = "abcdefghijklmnopqrstuvwxyz";

  bool contains(char c) const { return chars.find(c) != std::string::npos; }
};

struct LexiconEntry {
  std::string word;                    // may carry an "_<accent>" suffix
  std::vector<TaggedGrapheme> pron;

  bool operator==(const LexiconEntry& o) const = default;
};

enum class LexiconKind {
  kBase,
  kTrainingMultilingual,
  kMonoJointDecode,
  kMultiJointDecode,
};

const char* lexicon_kind_name(LexiconKind kind);

struct Lexicon {
  LexiconKind kind = LexiconKind::kBase;
  std::vector<AccentId> accent_inventory;
  std::vector<LexiconEntry> entries;
};

// One grapheme per letter, first and last flagged as word boundaries,
// no accent. Throws ValidationError naming the offending character.
std::vector<TaggedGrapheme> graphemize(const std::string& word, const Alphabet& alphabet = {});

// Suffixes the word and tags every grapheme. Double tagging is an error.
LexiconEntry tag_entry(const LexiconEntry& entry, const AccentId& accent);

Lexicon build_base_lexicon(const std::vector<std::string>& vocab,
                           const Alphabet& alphabet = {});

// Tagged words, tagged prons: |vocab| x |accents| entries. Identical in
// content to the multi-joint decoding lexicon.
Lexicon build_training_lexicon(const std::vector<std::string>& vocab,
                               const std::vector<AccentId>& accents,
                               const Alphabet& alphabet = {});

Lexicon build_multi_decode_lexicon(const std::vector<std::string>& vocab,
                                   const std::vector<AccentId>& accents,
                                   const Alphabet& alphabet = {});

// Untagged words, one fully tagged pronunciation per accent.
Lexicon build_mono_decode_lexicon(const std::vector<std::string>& vocab,
                                  const std::vector<AccentId>& accents,
                                  const Alphabet& alphabet = {});

TaggedGrapheme strip_tags(const TaggedGrapheme& g);
LexiconEntry strip_tags(const LexiconEntry& entry);
std::string strip_tags(const std::string& word);

// Checks every per-entry and per-kind invariant; throws ValidationError.
void validate_lexicon(const Lexicon& lex);

// Text format: "word<TAB>g1 g2 ... gN", '#' starts a comment line.
void write_lexicon(const Lexicon& lex, const std::string& path);
Lexicon read_lexicon(const std::string& path, LexiconKind kind,
                     const std::vector<AccentId>& inventory);

}  // namespace accentasr
