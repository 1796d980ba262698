#pragma once

#include <map>
#include <string>
#include <vector>

#include "accentasr/common.hpp"
#include "accentasr/synth.hpp"

namespace accentasr {

struct WerCounts {
  int64_t sub = 0;
  int64_t del = 0;
  int64_t ins = 0;
  int64_t ref_words = 0;

  int64_t errors() const { return sub + del + ins; }
  double percent() const {
    if (ref_words == 0) return errors() == 0 ? 0.0 : 100.0;
    return 100.0 * static_cast<double>(errors()) / static_cast<double>(ref_words);
  }
  WerCounts& operator+=(const WerCounts& o) {
    sub += o.sub;
    del += o.del;
    ins += o.ins;
    ref_words += o.ref_words;
    return *this;
  }
};

struct WerAlignOp {
  enum Kind { kMatch, kSub, kDel, kIns } kind;
  int ref_pos;  // -1 for insertions
  int hyp_pos;  // -1 for deletions
};

// Minimum-edit-distance alignment with unit costs; deterministic
// tie-breaking (substitution preferred over deletion over insertion).
std::vector<WerAlignOp> wer_alignment(const std::vector<std::string>& ref,
                                      const std::vector<std::string>& hyp);
WerCounts wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

// One scored utterance; hyp tokens must already be untagged.
struct UttScore {
  std::string id;
  std::string gold_accent;
  std::vector<std::string> ref;
  std::vector<std::string> hyp;
  std::vector<std::string> hyp_accents;  // per hyp word
};

struct WerReport {
  std::vector<std::string> accents;
  std::map<std::string, WerCounts> per_accent;
  WerCounts pooled;
};

// Pooled per accent and overall. Throws if any scored token still
// carries an accent/boundary tag.
WerReport wer_report(const std::vector<UttScore>& utts,
                     const std::vector<std::string>& accent_order);

struct AccentDecision {
  std::string utterance_id;
  std::string accent;  // empty when undecided
  bool tied = false;
};

struct AccuracyReport {
  std::vector<std::string> accents;
  std::map<std::string, int64_t> correct;
  std::map<std::string, int64_t> total;
  int64_t pooled_correct = 0;
  int64_t pooled_total = 0;
  int64_t ties = 0;
  int64_t undecided = 0;

  double percent(const std::string& accent) const;
  double pooled_percent() const;
  double mean_of_means_percent() const;
};

// Per-accent and pooled accent recognition accuracy. Utterances whose
// gold accent is in `excluded` are dropped; undecided votes count as
// incorrect. Throws when a decision lacks a gold label.
AccuracyReport accent_accuracy(const std::vector<AccentDecision>& decisions,
                               const std::map<std::string, std::string>& gold,
                               const std::vector<std::string>& accent_order,
                               const std::vector<std::string>& excluded = {});

struct ConfusionReport {
  std::vector<std::string> accents;     // row and column order
  bool has_none_column = false;         // undecided predictions, if any
  std::vector<std::vector<double>> rows;  // percentages; NaN row when empty
  std::vector<int64_t> row_totals;
};

ConfusionReport confusion(const std::vector<AccentDecision>& decisions,
                          const std::map<std::string, std::string>& gold,
                          const std::vector<std::string>& accent_order,
                          const std::vector<std::string>& excluded = {});

// Rows sum to 100 +- tol and the diagonal equals per-accent accuracy.
void check_confusion_consistency(const ConfusionReport& conf, const AccuracyReport& acc,
                                 double tol = 0.01);

struct WordAccentStat {
  std::string word;
  int64_t occurrences = 0;
  int64_t accent_correct = 0;
  double accuracy() const {
    return occurrences ? static_cast<double>(accent_correct) / occurrences : 0.0;
  }
};

struct WordRanking {
  std::vector<WordAccentStat> stats;          // every eligible word
  std::vector<WordAccentStat> top;            // highest accent accuracy
  std::vector<WordAccentStat> bottom;
  double top_avg_length = 0.0;
  double bottom_avg_length = 0.0;
  bool empty_warning = false;
};

// Tallies accent correctness over word-identity matches in the WER
// alignment, mirroring the accented-word characteristic analysis.
WordRanking word_accent_ranking(const std::vector<UttScore>& utts, int min_count, int top_k);

struct SplitStats {
  std::string name;
  int64_t utterances = 0;
  double hours = 0.0;
  double avg_words = 0.0;
  double avg_seconds = 0.0;
  std::vector<int64_t> length_histogram;  // 1-second bins
};

struct CorpusStatsReport {
  std::vector<SplitStats> splits;
};

SplitStats split_stats(const CorpusSplit& split);
CorpusStatsReport corpus_stats(const Corpus& corpus);

}  // namespace accentasr
