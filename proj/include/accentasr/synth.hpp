#pragma once

#include <string>
#include <vector>

#include "accentasr/accent.hpp"
#include "accentasr/features.hpp"
#include "accentasr/hmm.hpp"
#include "accentasr/lexicon.hpp"
#include "accentasr/text_corpus.hpp"

namespace accentasr {

// Controls the synthetic multi-accent corpus. Accent separability is the
// accent_shift dial: 0 makes accent variants statistically identical.
struct CorpusSpec {
  std::vector<AccentId> accents = default_accent_inventory();
  std::vector<std::string> vocab;  // empty -> default_vocab(100)
  int train_utts_per_accent = 300;
  int dev_utts_per_accent = 100;
  int test_utts_per_accent = 50;
  double words_per_utt_mean = 9.7;
  double accent_shift = 1.5;
  double noise_sigma = 0.3;
  double base_spread = 1.0;
  double state_duration_mean = 2.0;  // geometric, frames per HMM state
  double lead_sil_prob = 0.5;
  double trail_sil_prob = 0.5;
  double inter_sil_prob = 0.0;
  int dim = 13;
  double frame_shift = 0.01;
  uint64_t seed = 17;
  std::string text_template_path;  // optional: sample utterance texts from this file
  Alphabet alphabet;
};

struct CorpusUtterance {
  std::string id;
  std::vector<std::string> words;
  std::string accent_code;
  FeatureMatrix feats;

  // Generator-side truth; lives in memory only, never serialized.
  struct FrameTruth {
    char base = 0;       // grapheme, 0 for silence
    uint8_t wb = 0;
    uint8_t state = 0;
    uint8_t is_sil = 0;
  };
  std::vector<FrameTruth> truth;
};

struct CorpusSplit {
  std::string name;
  std::vector<CorpusUtterance> utts;
};

struct Corpus {
  CorpusSplit train{"train", {}};
  CorpusSplit dev{"dev", {}};
  CorpusSplit test{"test", {}};

  const CorpusSplit& split(const std::string& name) const;
  CorpusSplit& split(const std::string& name);
};

std::vector<std::string> default_vocab(int size);

// True emission mean for a grapheme state under an accent; the accent
// displacement is a deterministic unit vector hashed from
// (grapheme, state, accent), scaled by accent_shift.
std::vector<double> unit_state_mean(const CorpusSpec& spec, char base, bool word_boundary,
                                    int state, const std::string& accent_code);
std::vector<double> silence_state_mean(const CorpusSpec& spec, int state);

// Deterministic per (spec.seed); per-utterance RNG streams make the
// OpenMP and serial paths bit-identical.
Corpus generate_corpus(const CorpusSpec& spec);
Corpus generate_corpus_serial(const CorpusSpec& spec);

// Directory layout: <dir>/{train,dev,test}/{text,utt2accent,feats.bin}
// plus corpus_spec.json at the root.
void save_corpus(const Corpus& corpus, const CorpusSpec& spec, const std::string& dir);
Corpus load_corpus(const std::string& dir);
CorpusSpec load_corpus_spec(const std::string& dir);
bool corpus_has_spec(const std::string& dir);

TextCorpus split_text(const CorpusSplit& split);

// Frame-level accent classification by nearest true variant mean over the
// utterance's actual (grapheme, state) sequence; silence frames excluded.
// Establishes separability independently of any trained model.
double nearest_mean_frame_accuracy(const CorpusSpec& spec, const CorpusSplit& split);

// The generating model itself, as an AcousticModel over the given units
// (plus silence). Handy as a train-free reference in decoder tests.
AcousticModel reference_acoustic_model(const CorpusSpec& spec, const Lexicon& training_lexicon);

}  // namespace accentasr
