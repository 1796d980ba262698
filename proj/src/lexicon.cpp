#include "accentasr/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace accentasr {

const char* lexicon_kind_name(LexiconKind kind) {
  switch (kind) {
    case LexiconKind::kBase: return "base";
    case LexiconKind::kTrainingMultilingual: return "training_multilingual";
    case LexiconKind::kMonoJointDecode: return "mono_joint_decode";
    case LexiconKind::kMultiJointDecode: return "multi_joint_decode";
  }
  return "?";
}

std::vector<TaggedGrapheme> graphemize(const std::string& word, const Alphabet& alphabet) {
  if (word.empty()) throw ValidationError("cannot graphemize an empty word");
  std::string folded = lowercase(word);
  std::vector<TaggedGrapheme> pron;
  pron.reserve(folded.size());
  for (char c : folded) {
    if (c == '_' || !alphabet.contains(c))
      throw ValidationError("invalid word \"" + word + "\": character '" + std::string(1, c) +
                            "' outside alphabet");
    TaggedGrapheme g;
    g.base = c;
    pron.push_back(g);
  }
  pron.front().word_boundary = true;
  pron.back().word_boundary = true;
  return pron;
}

LexiconEntry tag_entry(const LexiconEntry& entry, const AccentId& accent) {
  if (entry.word.find('_') != std::string::npos)
    throw ValidationError("entry \"" + entry.word + "\" is already accent-tagged");
  for (const auto& g : entry.pron)
    if (!g.accent.empty())
      throw ValidationError("entry \"" + entry.word + "\" has tagged graphemes already");
  LexiconEntry out;
  out.word = entry.word + "_" + accent.code;
  out.pron = entry.pron;
  for (auto& g : out.pron) g.accent = accent.code;
  return out;
}

static void check_vocab(const std::vector<std::string>& vocab) {
  if (vocab.empty()) throw ValidationError("vocabulary is empty");
  std::unordered_set<std::string> seen;
  for (const auto& w : vocab)
    if (!seen.insert(lowercase(w)).second)
      throw ValidationError("vocabulary contains duplicate word \"" + w + "\"");
}

Lexicon build_base_lexicon(const std::vector<std::string>& vocab, const Alphabet& alphabet) {
  check_vocab(vocab);
  Lexicon lex;
  lex.kind = LexiconKind::kBase;
  for (const auto& w : vocab) lex.entries.push_back({lowercase(w), graphemize(w, alphabet)});
  return lex;
}

static Lexicon build_tagged(const std::vector<std::string>& vocab,
                            const std::vector<AccentId>& accents, const Alphabet& alphabet,
                            LexiconKind kind) {
  check_vocab(vocab);
  validate_accent_inventory(accents);
  if (accents.empty()) throw ValidationError("accent inventory is empty");
  Lexicon lex;
  lex.kind = kind;
  lex.accent_inventory = accents;
  for (const auto& w : vocab) {
    LexiconEntry base{lowercase(w), graphemize(w, alphabet)};
    for (const auto& a : accents) {
      LexiconEntry tagged = tag_entry(base, a);
      if (kind == LexiconKind::kMonoJointDecode) tagged.word = base.word;
      lex.entries.push_back(std::move(tagged));
    }
  }
  return lex;
}

Lexicon build_training_lexicon(const std::vector<std::string>& vocab,
                               const std::vector<AccentId>& accents, const Alphabet& alphabet) {
  return build_tagged(vocab, accents, alphabet, LexiconKind::kTrainingMultilingual);
}

Lexicon build_multi_decode_lexicon(const std::vector<std::string>& vocab,
                                   const std::vector<AccentId>& accents, const Alphabet& alphabet) {
  return build_tagged(vocab, accents, alphabet, LexiconKind::kMultiJointDecode);
}

Lexicon build_mono_decode_lexicon(const std::vector<std::string>& vocab,
                                  const std::vector<AccentId>& accents, const Alphabet& alphabet) {
  return build_tagged(vocab, accents, alphabet, LexiconKind::kMonoJointDecode);
}

TaggedGrapheme strip_tags(const TaggedGrapheme& g) {
  TaggedGrapheme out = g;
  out.accent.clear();
  return out;
}

std::string strip_tags(const std::string& word) {
  auto pos = word.find('_');
  return pos == std::string::npos ? word : word.substr(0, pos);
}

LexiconEntry strip_tags(const LexiconEntry& entry) {
  LexiconEntry out;
  out.word = strip_tags(entry.word);
  out.pron.reserve(entry.pron.size());
  for (const auto& g : entry.pron) out.pron.push_back(strip_tags(g));
  return out;
}

static std::string pron_string(const std::vector<TaggedGrapheme>& pron) {
  std::string s;
  for (const auto& g : pron) {
    if (!s.empty()) s += ' ';
    s += g.str();
  }
  return s;
}

void validate_lexicon(const Lexicon& lex) {
  validate_accent_inventory(lex.accent_inventory);
  std::set<std::pair<std::string, std::string>> pairs;
  std::unordered_map<std::string, int> prons_per_word;
  for (const auto& e : lex.entries) {
    if (e.pron.empty()) throw ValidationError("entry \"" + e.word + "\" has empty pronunciation");
    for (size_t i = 0; i < e.pron.size(); ++i) {
      bool boundary = (i == 0 || i + 1 == e.pron.size());
      if (e.pron[i].word_boundary != boundary)
        throw ValidationError("entry \"" + e.word + "\": word-boundary flags must mark exactly " +
                              std::string("the first and last graphemes"));
    }
    const std::string& accent = e.pron.front().accent;
    for (const auto& g : e.pron)
      if (g.accent != accent)
        throw ValidationError("entry \"" + e.word + "\" mixes accents in one pronunciation");
    auto us = e.word.find('_');
    if (us != std::string::npos) {
      std::string suffix = e.word.substr(us + 1);
      if (suffix != accent)
        throw ValidationError("entry \"" + e.word + "\": word tag does not match grapheme accent \"" +
                              accent + "\"");
    }
    if (!pairs.insert({e.word, pron_string(e.pron)}).second)
      throw ValidationError("duplicate (word, pronunciation) pair for \"" + e.word + "\"");
    prons_per_word[e.word]++;
  }
  if (lex.kind == LexiconKind::kMultiJointDecode || lex.kind == LexiconKind::kTrainingMultilingual) {
    for (const auto& [word, n] : prons_per_word)
      if (n != 1)
        throw ValidationError("word \"" + word + "\" has " + std::to_string(n) +
                              " pronunciations; expected unique words");
  }
  if (lex.kind == LexiconKind::kMonoJointDecode) {
    const int expected = static_cast<int>(lex.accent_inventory.size());
    for (const auto& [word, n] : prons_per_word)
      if (n != expected)
        throw ValidationError("word \"" + word + "\" has " + std::to_string(n) +
                              " pronunciations; expected " + std::to_string(expected));
  }
}

void write_lexicon(const Lexicon& lex, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write lexicon file: " + path);
  out << "# kind: " << lexicon_kind_name(lex.kind) << '\n';
  for (const auto& e : lex.entries) out << e.word << '\t' << pron_string(e.pron) << '\n';
}

Lexicon read_lexicon(const std::string& path, LexiconKind kind,
                     const std::vector<AccentId>& inventory) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open lexicon file: " + path);
  Lexicon lex;
  lex.kind = kind;
  lex.accent_inventory = inventory;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected word<TAB>graphemes");
    LexiconEntry e;
    e.word = line.substr(0, tab);
    for (const auto& tok : split_ws(line.substr(tab + 1))) e.pron.push_back(TaggedGrapheme::parse(tok));
    if (e.pron.empty())
      throw ParseError(path + ":" + std::to_string(lineno) + ": empty pronunciation");
    lex.entries.push_back(std::move(e));
  }
  validate_lexicon(lex);
  return lex;
}

}  // namespace accentasr
