#pragma once

#include <limits>
#include <string>
#include <vector>

#include "accentasr/align.hpp"
#include "accentasr/features.hpp"
#include "accentasr/hmm.hpp"
#include "accentasr/lexicon.hpp"
#include "accentasr/ngram.hpp"

namespace accentasr {

struct DecodeGraphSpec {
  const Lexicon* lexicon = nullptr;  // mono_joint_decode or multi_joint_decode
  const NGramModel* lm = nullptr;
  bool optional_silence = true;
  double lm_scale = 10.0;                 // scales the natural-log LM contribution
  double word_insertion_penalty = 0.0;    // natural log, added per emitted word
  double silence_logprob = 0.0;           // natural log, added per silence entry
};

struct PhoneSpan {
  std::string unit;
  int start = 0;
  int end = 0;        // inclusive
  int word_index = -1;  // -1 for silence
};

struct DecodeResult {
  std::string utterance_id;
  LexiconKind mode = LexiconKind::kMonoJointDecode;
  std::vector<std::string> words;         // lexicon word labels (tagged for multi-joint)
  std::vector<std::string> word_accents;  // from the chosen pronunciation's tags
  std::vector<int> pron_indices;
  std::vector<PhoneSpan> phones;
  double total_log_score = 0.0;
};

struct DecodeOptions {
  // Interpreted in the LM-scale-normalized domain (the conventional 14
  // pairs with the conventional lm_scale 10).
  double beam = 14.0;
  int max_active = 7000;

  static DecodeOptions exact() {
    return {std::numeric_limits<double>::infinity(), std::numeric_limits<int>::max()};
  }
};

// Token-passing beam Viterbi over the on-the-fly composition of the
// acoustic HMMs, a pronunciation prefix tree and the trigram LM. Immutable
// after construction; decode() is safe to call from several threads.
class Decoder {
 public:
  Decoder(const AcousticModel& am, const DecodeGraphSpec& spec);

  DecodeResult decode(const FeatureMatrix& feats, const DecodeOptions& opts = {}) const;

 private:
  struct TreeNode {
    int unit = -1;
    std::vector<int> children;
    std::vector<int> completions;  // entry indices ending at this node
  };
  struct EntryInfo {
    const LexiconEntry* entry = nullptr;
    uint32_t lm_id = 0;
    int pron_index = 0;
    std::string accent;
  };

  void build_tree();

  const AcousticModel& am_;
  DecodeGraphSpec spec_;
  std::vector<TreeNode> nodes_;   // nodes_[0] is the virtual root
  std::vector<EntryInfo> entries_;
  int sil_node_ = -1;
  int sil_unit_ = -1;
};

DecodeResult decode(const AcousticModel& am, const DecodeGraphSpec& spec,
                    const FeatureMatrix& feats, const DecodeOptions& opts = {});

std::vector<DecodeResult> decode_batch(const AcousticModel& am, const DecodeGraphSpec& spec,
                                       const std::vector<FeatureMatrix>& feats,
                                       const DecodeOptions& opts = {});
// Serial reference kept for tests; identical output to decode_batch.
std::vector<DecodeResult> decode_batch_serial(const AcousticModel& am, const DecodeGraphSpec& spec,
                                              const std::vector<FeatureMatrix>& feats,
                                              const DecodeOptions& opts = {});

// Test oracle: enumerates every word sequence up to max_words and force-
// aligns each one; refuses vocabularies over 8 words or max_words > 4.
DecodeResult exhaustive_decode(const AcousticModel& am, const DecodeGraphSpec& spec,
                               const FeatureMatrix& feats, int max_words);

struct ScoreBreakdown {
  double acoustic_log = 0.0;
  double lm_log = 0.0;
  double penalty_log = 0.0;
  double total() const { return acoustic_log + lm_log + penalty_log; }
};

// Recomputes all three score components from the result alone; throws if
// they fail to reproduce total_log_score (mismatched models).
ScoreBreakdown score_breakdown(const DecodeResult& result, const AcousticModel& am,
                               const DecodeGraphSpec& spec, const FeatureMatrix& feats);

// Checks that the phones of each output word reproduce a lexicon
// pronunciation of that word verbatim.
void validate_result_pronunciations(const DecodeResult& result, const Lexicon& lexicon);

}  // namespace accentasr
