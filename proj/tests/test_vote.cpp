#include <doctest.h>

#include <algorithm>

#include "accentasr/accent_vote.hpp"

using namespace accentasr;

namespace {

// Fabricated decode result: words with given accents, phone counts per word.
DecodeResult fake_result(LexiconKind mode, const std::vector<std::pair<std::string, int>>& words,
                         int leading_sil_phones = 0) {
  DecodeResult r;
  r.utterance_id = "fake";
  r.mode = mode;
  int frame = 0;
  for (int s = 0; s < leading_sil_phones; ++s) {
    r.phones.push_back({"sil", frame, frame + 1, -1});
    frame += 2;
  }
  int w = 0;
  for (const auto& [accent, phone_count] : words) {
    std::string word = std::string("w") + std::to_string(w);
    if (mode == LexiconKind::kMultiJointDecode) word += "_" + accent;
    r.words.push_back(word);
    r.word_accents.push_back(accent);
    r.pron_indices.push_back(0);
    for (int p = 0; p < phone_count; ++p) {
      TaggedGrapheme g{static_cast<char>('a' + p % 26), accent, p == 0 || p == phone_count - 1};
      r.phones.push_back({g.str(), frame, frame + 1, w});
      frame += 2;
    }
    ++w;
  }
  return r;
}

}  // namespace

TEST_CASE("word accent vote: uniform pronunciations and the defensive majority") {
  std::vector<TaggedGrapheme> hello = {{'h', "BRT", true}, {'e', "BRT", false},
                                       {'l', "BRT", false}, {'l', "BRT", false},
                                       {'o', "BRT", true}};
  CHECK(vote_word_accent(hello) == "BRT");
  CHECK(vote_word_accent({{'a', "US", true}}) == "US");
  // 2-vs-1 majority if an upstream invariant ever breaks.
  CHECK(vote_word_accent({{'x', "US", true}, {'y', "UK", false}, {'z', "US", true}}) == "US");
  CHECK_THROWS_AS(vote_word_accent({}), ValidationError);
}

TEST_CASE("utterance vote at word granularity") {
  auto r = fake_result(LexiconKind::kMonoJointDecode, {{"US", 3}, {"US", 4}, {"UK", 2}});
  auto vote = vote_utterance_accent(r, VoteGranularity::kWord);
  CHECK(vote.winner == "US");
  CHECK_FALSE(vote.tied);
  CHECK(vote.counts.at("US") == 2);
  CHECK(vote.counts.at("UK") == 1);
  CHECK(vote.total == 3);
}

TEST_CASE("ties break lexicographically and are flagged") {
  auto r = fake_result(LexiconKind::kMonoJointDecode, {{"US", 3}, {"UK", 3}});
  auto vote = vote_utterance_accent(r, VoteGranularity::kWord);
  CHECK(vote.tied);
  CHECK(vote.winner == "UK");  // "UK" < "US"
}

TEST_CASE("phone granularity can overturn the word-level majority") {
  auto r = fake_result(LexiconKind::kMonoJointDecode, {{"US", 5}, {"UK", 2}, {"UK", 2}});
  auto by_word = vote_utterance_accent(r, VoteGranularity::kWord);
  auto by_phone = vote_utterance_accent(r, VoteGranularity::kPhone);
  CHECK(by_word.winner == "UK");
  CHECK(by_phone.winner == "US");
  CHECK(by_phone.counts.at("US") == 5);
  CHECK(by_phone.counts.at("UK") == 4);
}

TEST_CASE("vote totals count non-silence units only") {
  auto r = fake_result(LexiconKind::kMonoJointDecode, {{"US", 3}, {"UK", 2}}, 2);
  CHECK(vote_utterance_accent(r, VoteGranularity::kWord).total == 2);
  CHECK(vote_utterance_accent(r, VoteGranularity::kPhone).total == 5);
}

TEST_CASE("votes are invariant to word order") {
  std::vector<std::pair<std::string, int>> words = {{"US", 2}, {"UK", 3}, {"US", 4}, {"CHN", 1}};
  auto base = vote_utterance_accent(fake_result(LexiconKind::kMonoJointDecode, words),
                                    VoteGranularity::kWord);
  std::sort(words.begin(), words.end());
  do {
    auto vote = vote_utterance_accent(fake_result(LexiconKind::kMonoJointDecode, words),
                                      VoteGranularity::kWord);
    CHECK(vote.winner == base.winner);
    CHECK(vote.counts == base.counts);
  } while (std::next_permutation(words.begin(), words.end()));
}

TEST_CASE("accent-pure decodes agree across granularities") {
  auto r = fake_result(LexiconKind::kMonoJointDecode, {{"JAP", 2}, {"JAP", 7}, {"JAP", 3}});
  auto w = vote_utterance_accent(r, VoteGranularity::kWord);
  auto p = vote_utterance_accent(r, VoteGranularity::kPhone);
  CHECK(w.winner == p.winner);
  CHECK_FALSE(w.tied);
  CHECK_FALSE(p.tied);
}

TEST_CASE("silence-only decodes are undecidable") {
  auto r = fake_result(LexiconKind::kMonoJointDecode, {}, 3);
  CHECK_THROWS_AS(vote_utterance_accent(r, VoteGranularity::kWord), UndecidableError);
  auto rm = fake_result(LexiconKind::kMultiJointDecode, {}, 3);
  CHECK_THROWS_AS(utterance_accent_multi_joint(rm), UndecidableError);
}

TEST_CASE("multi-joint utterance decision") {
  auto pure = fake_result(LexiconKind::kMultiJointDecode, {{"UK", 2}, {"UK", 4}});
  auto vote = utterance_accent_multi_joint(pure);
  CHECK(vote.winner == "UK");
  CHECK_FALSE(vote.tied);
  CHECK(vote.counts.size() == 1);

  auto mixed = fake_result(LexiconKind::kMultiJointDecode, {{"UK", 2}, {"US", 4}});
  auto tied = utterance_accent_multi_joint(mixed);
  CHECK(tied.tied);
  CHECK(tied.winner == "UK");

  auto mono = fake_result(LexiconKind::kMonoJointDecode, {{"UK", 2}});
  CHECK_THROWS_AS(utterance_accent_multi_joint(mono), ValidationError);
}
