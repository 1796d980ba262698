#include "accentasr/accent_vote.hpp"

#include <algorithm>

namespace accentasr {

const char* granularity_name(VoteGranularity g) {
  return g == VoteGranularity::kWord ? "word" : "phone";
}

VoteGranularity parse_granularity(const std::string& name) {
  if (name == "word") return VoteGranularity::kWord;
  if (name == "phone") return VoteGranularity::kPhone;
  throw ValidationError("unknown vote granularity \"" + name + "\" (expected word or phone)");
}

static AccentVote finish_vote(std::map<std::string, int> counts) {
  AccentVote vote;
  vote.counts = std::move(counts);
  int best = 0;
  for (const auto& [code, n] : vote.counts) {
    vote.total += n;
    if (n > best) best = n;
  }
  int at_max = 0;
  for (const auto& [code, n] : vote.counts) {
    if (n == best) {
      ++at_max;
      if (vote.winner.empty()) vote.winner = code;  // map order = lexicographic
    }
  }
  vote.tied = at_max >= 2;
  return vote;
}

std::string vote_word_accent(const std::vector<TaggedGrapheme>& phones) {
  if (phones.empty()) throw ValidationError("cannot vote the accent of an empty phone list");
  std::map<std::string, int> counts;
  for (const auto& g : phones)
    if (!g.accent.empty()) counts[g.accent]++;
  if (counts.empty())
    throw ValidationError("cannot vote the accent of an untagged phone sequence");
  return finish_vote(std::move(counts)).winner;
}

AccentVote vote_utterance_accent(const DecodeResult& result, VoteGranularity granularity) {
  std::map<std::string, int> counts;
  if (granularity == VoteGranularity::kWord) {
    for (const auto& acc : result.word_accents)
      if (!acc.empty()) counts[acc]++;
  } else {
    for (const auto& p : result.phones) {
      if (p.word_index < 0) continue;  // silence
      TaggedGrapheme g = TaggedGrapheme::parse(p.unit);
      if (!g.accent.empty()) counts[g.accent]++;
    }
  }
  if (counts.empty())
    throw UndecidableError("utterance \"" + result.utterance_id +
                           "\" decoded to silence only; accent undecidable");
  return finish_vote(std::move(counts));
}

AccentVote utterance_accent_multi_joint(const DecodeResult& result) {
  if (result.mode != LexiconKind::kMultiJointDecode)
    throw ValidationError("multi-joint accent decision needs tagged words (got a mono-joint "
                          "decode)");
  std::map<std::string, int> counts;
  for (const auto& w : result.words) {
    auto pos = w.find('_');
    if (pos == std::string::npos || pos + 1 >= w.size())
      throw ValidationError("multi-joint word \"" + w + "\" carries no accent tag");
    counts[w.substr(pos + 1)]++;
  }
  if (counts.empty())
    throw UndecidableError("utterance \"" + result.utterance_id +
                           "\" decoded to silence only; accent undecidable");
  return finish_vote(std::move(counts));
}

}  // namespace accentasr
