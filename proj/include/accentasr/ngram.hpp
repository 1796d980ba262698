#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "accentasr/common.hpp"
#include "accentasr/text_corpus.hpp"

namespace accentasr {

// Word index table. Ids 0..2 are reserved for the sentence and OOV
// markers so they are stable across models.
class Vocab {
 public:
  static constexpr uint32_t kBos = 0;   // <s>
  static constexpr uint32_t kEos = 1;   // </s>
  static constexpr uint32_t kUnk = 2;   // <unk>
  static constexpr uint32_t kNone = 0xffffffffu;

  Vocab();

  uint32_t add(const std::string& word);
  uint32_t find(const std::string& word) const;      // kNone if absent
  uint32_t find_or_unk(const std::string& word) const;
  const std::string& word(uint32_t id) const { return words_[id]; }
  size_t size() const { return words_.size(); }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, uint32_t> index_;
};

struct Key2 {
  uint64_t v;
  bool operator==(const Key2& o) const = default;
};
struct Key3 {
  uint64_t hi;
  uint32_t lo;
  bool operator==(const Key3& o) const = default;
};
struct Key2Hash {
  size_t operator()(const Key2& k) const { return splitmix64(k.v); }
};
struct Key3Hash {
  size_t operator()(const Key3& k) const { return splitmix64(k.hi ^ splitmix64(k.lo)); }
};

inline Key2 make_key2(uint32_t a, uint32_t b) {
  return {(static_cast<uint64_t>(a) << 32) | b};
}
inline Key3 make_key3(uint32_t a, uint32_t b, uint32_t c) {
  return {(static_cast<uint64_t>(a) << 32) | b, c};
}

enum class LmMode { kMono, kMulti };

// Raw n-gram occurrence counts from <s>-padded, </s>-terminated
// utterances. Kept separate from the estimated model so tests can check
// count-level properties (cross-accent purity, mono/multi consistency).
struct NgramCounts {
  Vocab vocab;
  std::unordered_map<uint32_t, uint64_t> uni;
  std::unordered_map<Key2, uint64_t, Key2Hash> bi;
  std::unordered_map<Key3, uint64_t, Key3Hash> tri;
  uint64_t skipped_empty_utterances = 0;
};

// Serial reference implementation, kept for tests.
NgramCounts count_ngrams_serial(const TextCorpus& corpus, LmMode mode);
// OpenMP version; counts are integers, so it is exactly equal to the
// serial reference for any thread count.
NgramCounts count_ngrams(const TextCorpus& corpus, LmMode mode);

std::string tag_word(const std::string& word, const std::string& accent_code);

struct LmConfig {
  double unk_pseudocount = 1.0;
};

struct NgramEntry {
  double logprob = 0.0;   // log10
  double backoff = 0.0;   // log10, meaningful for orders < 3
};

// Backoff trigram with interpolated Witten-Bell estimates, stored in the
// ARPA convention (log10 probabilities and backoff weights).
class NGramModel {
 public:
  int order() const { return 3; }
  const Vocab& vocab() const { return vocab_; }

  // Conditional log10 probability with standard backoff. h1 may be
  // kNone (short history); h2 == kNone means the <s>-only context.
  double cond_logprob(uint32_t h1, uint32_t h2, uint32_t w) const;

  // Sum of per-word conditionals with <s> padding and </s> termination.
  // OOV words map to <unk>. Returns log10.
  double score_sequence(const std::vector<std::string>& words) const;

  // Sum of P(w|h) over the predictable vocabulary (everything but <s>).
  double conditional_mass(const std::vector<std::string>& history) const;

  // True when every non-special unigram carries an accent suffix.
  bool tagged_vocabulary() const;

  size_t num_ngrams(int order) const;

  const std::unordered_map<uint32_t, NgramEntry>& unigrams() const { return uni_; }
  const std::unordered_map<Key2, NgramEntry, Key2Hash>& bigrams() const { return bi_; }
  const std::unordered_map<Key3, NgramEntry, Key3Hash>& trigrams() const { return tri_; }

 private:
  friend NGramModel estimate_witten_bell(const NgramCounts&, const LmConfig&);
  friend NGramModel read_arpa(std::istream& in);

  Vocab vocab_;
  std::unordered_map<uint32_t, NgramEntry> uni_;
  std::unordered_map<Key2, NgramEntry, Key2Hash> bi_;
  std::unordered_map<Key3, NgramEntry, Key3Hash> tri_;
};

NGramModel estimate_witten_bell(const NgramCounts& counts, const LmConfig& config);

// count + estimate. Empty corpus is an error; utterances with zero words
// are skipped and surface in NgramCounts::skipped_empty_utterances.
NGramModel train_trigram(const TextCorpus& corpus, LmMode mode, const LmConfig& config = {});

void write_arpa(const NGramModel& model, std::ostream& out);
void write_arpa_file(const NGramModel& model, const std::string& path);
NGramModel read_arpa(std::istream& in);
NGramModel read_arpa_file(const std::string& path);

struct CrossAccentAudit {
  uint64_t violations = 0;
  std::vector<std::string> offenders;  // formatted n-grams
};

// Counts stored n-grams of order >= 2 whose words carry two or more
// distinct accent suffixes. Requires a tagged vocabulary.
CrossAccentAudit audit_cross_accent(const NGramModel& model);

// 10^(-logprob / (#words + #utterances)); includes </s> per utterance.
double perplexity(const NGramModel& model, const TextCorpus& corpus, LmMode mode);
double uniform_unigram_perplexity(const NGramModel& model);

}  // namespace accentasr
