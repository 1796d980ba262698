#pragma once

#include <string>
#include <vector>

#include "accentasr/features.hpp"
#include "accentasr/hmm.hpp"
#include "accentasr/lexicon.hpp"

namespace accentasr {

// Viterbi found no legal state path (e.g. fewer frames than mandatory states).
class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One alternative through a slot: a chain of HMM units.
struct PronChain {
  std::vector<int> unit_indices;  // into AcousticModel::hmms
  int word_index = -1;            // transcript position; -1 for silence
  int pron_index = 0;
};

// A slot is one transcript position (all its pronunciations in parallel)
// or an optional silence gap.
struct GraphSlot {
  std::vector<PronChain> alts;
  bool optional = false;
  double entry_logprob = 0.0;  // silence insertion penalty lands here
};

// Flattened left-to-right alignment/search graph over HMM states.
struct UtteranceGraph {
  struct StateInfo {
    int unit = -1;       // AcousticModel hmm index
    int state = 0;       // state within the unit
    int slot = -1;
    int alt = -1;
    int chain_pos = 0;   // unit position within the alternative
    int density = -1;
  };

  std::vector<StateInfo> states;
  std::vector<double> entry_logprob;  // kLogZero unless enterable from the start
  std::vector<double> exit_logprob;   // kLogZero unless the utterance may end here
  std::vector<double> self_logprob;
  std::vector<std::vector<std::pair<int, double>>> in_arcs;  // cross-state arcs only
  int min_frames = 0;
  bool start_can_finish = false;  // all slots optional: zero-frame path would exist
};

UtteranceGraph build_utterance_graph(const AcousticModel& am, const std::vector<GraphSlot>& slots);

// Convenience: one slot per transcript entry plus optional silence slots
// at the start, end and between words.
std::vector<GraphSlot> transcript_slots(const AcousticModel& am,
                                        const std::vector<const LexiconEntry*>& words,
                                        bool optional_silence, double silence_logprob);

struct AlignedPhone {
  int unit = -1;  // AcousticModel hmm index
  int start = 0;
  int end = 0;    // inclusive
  int slot = -1;
  int alt = -1;
};

struct Alignment {
  double log_likelihood = kLogZero;  // emissions + transitions, natural log
  std::vector<int> state_seq;        // graph state per frame
  std::vector<AlignedPhone> phones;
  std::vector<std::pair<int, int>> chosen;  // traversed (slot, alt) in order
};

// Emission table for the distinct densities of one graph; reused across
// repeated alignments of the same utterance (the exhaustive oracle).
class EmissionTable {
 public:
  EmissionTable(const AcousticModel& am, const FeatureMatrix& feats);
  // Lazily computed; row index is the model-wide density id.
  double at(int density, int t) const;

 private:
  const AcousticModel& am_;
  const FeatureMatrix& feats_;
  mutable std::vector<std::vector<double>> rows_;
  mutable std::vector<char> ready_;
};

Alignment viterbi_align(const AcousticModel& am, const UtteranceGraph& graph,
                        const FeatureMatrix& feats);
Alignment viterbi_align(const AcousticModel& am, const UtteranceGraph& graph,
                        const FeatureMatrix& feats, const EmissionTable& emissions);

// Log of the summed path likelihood over the same graph; Viterbi is a
// lower bound on this.
double forward_loglik(const AcousticModel& am, const UtteranceGraph& graph,
                      const FeatureMatrix& feats);

// Forced alignment of a known transcript (already expanded through the
// lexicon). Throws AlignmentError when no legal path exists.
Alignment align(const AcousticModel& am, const std::vector<const LexiconEntry*>& words,
                const FeatureMatrix& feats, bool optional_silence = true,
                double silence_logprob = 0.0);

}  // namespace accentasr
