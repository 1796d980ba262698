#pragma once

#include <vector>

#include "accentasr/align.hpp"
#include "accentasr/features.hpp"
#include "accentasr/hmm.hpp"
#include "accentasr/lexicon.hpp"

namespace accentasr {

struct TrainUtterance {
  const FeatureMatrix* feats = nullptr;
  std::vector<const LexiconEntry*> words;  // expanded through the training lexicon
};

struct TrainConfig {
  int iterations = 8;
  // Components double right before these (1-based) iterations.
  std::vector<int> mixup_iterations;
  double variance_floor = 1e-3;
  double min_transition_prob = 1e-8;
  double min_component_weight = 1e-10;
  bool optional_silence = true;
  double silence_logprob = 0.0;
  bool parallel = true;  // serial reference path kept for tests
};

struct TrainStats {
  std::vector<double> iteration_loglik;      // aligned loglik under the pre-update model
  std::vector<int64_t> iteration_densities;
  std::vector<char> comparable;              // false right after a mixture split
  int frozen_state_updates = 0;              // states left untouched for lack of frames
  std::vector<std::string> warnings;
};

// Doubles every state's mixture deterministically (means perturbed by
// +/- 0.2 sigma, weights halved).
AcousticModel mixture_split(const AcousticModel& am);

// Viterbi-EM over forced alignments. Asserts non-decreasing aligned log
// likelihood at fixed mixture count (1e-6 slack); alignment is the
// parallel kernel, accumulation runs in utterance order so results are
// bit-identical for any thread count.
AcousticModel train_em(const AcousticModel& init, const std::vector<TrainUtterance>& corpus,
                       const TrainConfig& config, TrainStats* stats = nullptr);

}  // namespace accentasr
