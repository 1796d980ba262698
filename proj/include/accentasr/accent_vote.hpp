#pragma once

#include <map>
#include <string>
#include <vector>

#include "accentasr/accent.hpp"
#include "accentasr/decoder.hpp"

namespace accentasr {

// Tallied accent identifiers for one utterance. Ties are broken toward
// the lexicographically smallest code and flagged.
struct AccentVote {
  std::map<std::string, int> counts;
  std::string winner;
  bool tied = false;
  int total = 0;
};

enum class VoteGranularity { kWord, kPhone };

const char* granularity_name(VoteGranularity g);
VoteGranularity parse_granularity(const std::string& name);

// The accent shared by a word's graphemes; falls back to a majority vote
// if an upstream bug ever mixes accents within a word.
std::string vote_word_accent(const std::vector<TaggedGrapheme>& phones);

// Counts accent identifiers over the whole utterance at the chosen
// granularity. Throws UndecidableError on a silence-only decode.
AccentVote vote_utterance_accent(const DecodeResult& result, VoteGranularity granularity);

// Multi-joint voting over tagged word suffixes; word granularity.
AccentVote utterance_accent_multi_joint(const DecodeResult& result);

}  // namespace accentasr
