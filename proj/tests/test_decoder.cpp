#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "accentasr/decoder.hpp"
#include "accentasr/synth.hpp"

using namespace accentasr;

namespace {

// Shared fixture: a small separable world with a train-free reference
// acoustic model built from the generator's true distributions.
struct World {
  CorpusSpec spec;
  Corpus corpus;
  Lexicon training_lex, mono_lex, multi_lex;
  AcousticModel am;
  NGramModel lm_mono, lm_multi;

  explicit World(uint64_t seed, int accents = 2, double shift = 1.2,
                 const std::string& template_text = "") {
    spec.accents.clear();
    std::vector<AccentId> all = {{"UK", "British"}, {"US", "American"},
                                 {"CHN", "Chinese"}, {"IND", "Indian"}};
    for (int i = 0; i < accents; ++i) spec.accents.push_back(all[i]);
    spec.vocab = {"go", "home", "red", "blue"};
    spec.train_utts_per_accent = 12;
    spec.dev_utts_per_accent = 6;
    spec.test_utts_per_accent = 0;
    spec.words_per_utt_mean = 2.0;
    spec.accent_shift = shift;
    spec.noise_sigma = 0.3;
    spec.seed = seed;
    spec.lead_sil_prob = 0.3;
    spec.trail_sil_prob = 0.3;

    auto dir = std::filesystem::temp_directory_path() /
               ("accentasr-world-" + std::to_string(seed));
    std::filesystem::create_directories(dir);
    auto tpl = (dir / "template.txt").string();
    std::ofstream out(tpl);
    if (template_text.empty()) {
      // Up to 4 words per utterance, within the oracle guard.
      Rng rng(seed ^ 0xabcdef);
      for (int i = 0; i < 40; ++i) {
        int n = rng.uniform_int(1, 4);
        std::vector<std::string> words;
        for (int k = 0; k < n; ++k)
          words.push_back(spec.vocab[rng.uniform_int(0, static_cast<int>(spec.vocab.size()) - 1)]);
        out << join(words, " ") << '\n';
      }
    } else {
      out << template_text;
    }
    out.close();
    spec.text_template_path = tpl;

    corpus = generate_corpus(spec);
    training_lex = build_training_lexicon(spec.vocab, spec.accents);
    mono_lex = build_mono_decode_lexicon(spec.vocab, spec.accents);
    multi_lex = build_multi_decode_lexicon(spec.vocab, spec.accents);
    am = reference_acoustic_model(spec, training_lex);
    auto text = split_text(corpus.train);
    lm_mono = train_trigram(text, LmMode::kMono);
    lm_multi = train_trigram(text, LmMode::kMulti);
  }

  DecodeGraphSpec mono_spec() const {
    return {&mono_lex, &lm_mono, true, 4.0, 0.0, -1.0};
  }
  DecodeGraphSpec multi_spec() const {
    return {&multi_lex, &lm_multi, true, 4.0, 0.0, -1.0};
  }
};

}  // namespace

TEST_CASE("decode with infinite beam matches the exhaustive oracle") {
  int checked = 0;
  for (uint64_t seed : {501ull, 502ull}) {
    World world(seed);
    for (const auto& joint : {world.mono_spec(), world.multi_spec()}) {
      Decoder decoder(world.am, joint);
      for (const auto& utt : world.corpus.dev.utts) {
        auto fast = decoder.decode(utt.feats, DecodeOptions::exact());
        auto oracle = exhaustive_decode(world.am, joint, utt.feats, 4);
        CAPTURE(utt.id);
        CHECK(fast.words == oracle.words);
        CHECK(fast.pron_indices == oracle.pron_indices);
        CHECK(fast.total_log_score == doctest::Approx(oracle.total_log_score).epsilon(1e-6));
        ++checked;
      }
    }
  }
  CHECK(checked >= 24);
}

TEST_CASE("multi-joint output words all parse as base_ACCENT") {
  World world(601);
  auto results = decode_batch(world.am, world.multi_spec(),
                              {world.corpus.dev.utts[0].feats, world.corpus.dev.utts[1].feats});
  std::set<std::string> codes;
  for (const auto& a : world.spec.accents) codes.insert(a.code);
  for (const auto& r : results) {
    for (const auto& w : r.words) {
      auto pos = w.find('_');
      REQUIRE(pos != std::string::npos);
      CHECK(codes.count(w.substr(pos + 1)) == 1);
    }
  }
}

TEST_CASE("tightening the beam can only lower the score") {
  World world(602);
  Decoder decoder(world.am, world.mono_spec());
  const auto& feats = world.corpus.dev.utts[2].feats;
  auto exact = decoder.decode(feats, DecodeOptions::exact());
  for (double beam : {20.0, 8.0, 3.0}) {
    try {
      auto pruned = decoder.decode(feats, {beam, 7000});
      CHECK(pruned.total_log_score <= exact.total_log_score + 1e-9);
    } catch (const NoPathError&) {
      // acceptable outcome for a very tight beam
    }
  }
}

TEST_CASE("decode results satisfy the pronunciation-consistency invariant") {
  World world(603);
  for (const auto& joint : {world.mono_spec(), world.multi_spec()}) {
    Decoder decoder(world.am, joint);
    for (const auto& utt : world.corpus.dev.utts) {
      auto r = decoder.decode(utt.feats);
      validate_result_pronunciations(r, *joint.lexicon);
      // Phone spans tile the utterance.
      CHECK(r.phones.front().start == 0);
      CHECK(r.phones.back().end == utt.feats.num_frames - 1);
      for (size_t i = 1; i < r.phones.size(); ++i)
        CHECK(r.phones[i].start == r.phones[i - 1].end + 1);
    }
  }
}

TEST_CASE("score breakdown reproduces the total and isolates components") {
  World world(604);
  auto spec = world.mono_spec();
  Decoder decoder(world.am, spec);
  const auto& feats = world.corpus.dev.utts[0].feats;
  auto r = decoder.decode(feats);
  auto b = score_breakdown(r, world.am, spec, feats);
  CHECK(b.total() == doctest::Approx(r.total_log_score).epsilon(1e-9));

  int silences = 0;
  for (const auto& p : r.phones)
    if (p.word_index < 0) silences++;
  CHECK(b.penalty_log ==
        doctest::Approx(spec.word_insertion_penalty * r.words.size() +
                        spec.silence_logprob * silences));

  // lm_scale = 0 removes the LM component entirely.
  auto no_lm = spec;
  no_lm.lm_scale = 0.0;
  Decoder decoder2(world.am, no_lm);
  auto r2 = decoder2.decode(feats);
  auto b2 = score_breakdown(r2, world.am, no_lm, feats);
  CHECK(b2.lm_log == 0.0);

  // Word insertion penalty enters linearly.
  auto wip_spec = spec;
  wip_spec.word_insertion_penalty = -0.7;
  Decoder decoder3(world.am, wip_spec);
  auto r3 = decoder3.decode(feats);
  auto b3 = score_breakdown(r3, world.am, wip_spec, feats);
  int sil3 = 0;
  for (const auto& p : r3.phones)
    if (p.word_index < 0) sil3++;
  CHECK(b3.penalty_log ==
        doctest::Approx(-0.7 * static_cast<double>(r3.words.size()) +
                        wip_spec.silence_logprob * sil3));

  // Mismatched models are rejected.
  auto other = world.multi_spec();
  CHECK_THROWS_AS(score_breakdown(r, world.am, other, feats), ValidationError);
}

TEST_CASE("mono-joint decoding can mix accents within one utterance") {
  // Hand-spliced features: first word emitted with UK means, second with
  // US means, under a large shift.
  World world(605, 2, 2.5, "go home\n");
  CorpusSpec spec = world.spec;

  std::vector<float> data;
  Rng rng(99);
  auto emit = [&](const std::string& word, const std::string& accent) {
    for (size_t i = 0; i < word.size(); ++i) {
      bool wb = (i == 0 || i + 1 == word.size());
      for (int s = 0; s < 3; ++s) {
        auto mean = unit_state_mean(spec, word[i], wb, s, accent);
        for (int k = 0; k < 2; ++k)
          for (int d = 0; d < spec.dim; ++d)
            data.push_back(static_cast<float>(mean[d] + spec.noise_sigma * rng.gaussian()));
      }
    }
  };
  emit("go", "UK");
  emit("home", "US");
  FeatureMatrix feats;
  feats.utterance_id = "spliced";
  feats.dim = spec.dim;
  feats.num_frames = static_cast<int32_t>(data.size() / spec.dim);
  feats.data = std::move(data);

  auto r = decode(world.am, world.mono_spec(), feats);
  REQUIRE(r.words == std::vector<std::string>{"go", "home"});
  CHECK(r.word_accents[0] == "UK");
  CHECK(r.word_accents[1] == "US");
}

TEST_CASE("decode is deterministic") {
  World world(606);
  Decoder decoder(world.am, world.multi_spec());
  const auto& feats = world.corpus.dev.utts[3].feats;
  auto a = decoder.decode(feats);
  auto b = decoder.decode(feats);
  CHECK(a.words == b.words);
  CHECK(a.total_log_score == b.total_log_score);
  REQUIRE(a.phones.size() == b.phones.size());
  for (size_t i = 0; i < a.phones.size(); ++i) {
    CHECK(a.phones[i].unit == b.phones[i].unit);
    CHECK(a.phones[i].start == b.phones[i].start);
  }
}

TEST_CASE("decode error paths are distinct") {
  World world(607);
  Decoder decoder(world.am, world.mono_spec());

  FeatureMatrix empty;
  empty.dim = world.spec.dim;
  empty.num_frames = 0;
  CHECK_THROWS_AS(decoder.decode(empty), ValidationError);

  // Two frames cannot fit any three-state unit: every token dies.
  FeatureMatrix tiny;
  tiny.utterance_id = "tiny";
  tiny.dim = world.spec.dim;
  tiny.num_frames = 2;
  tiny.data.assign(2 * world.spec.dim, 0.0f);
  CHECK_THROWS_AS(decoder.decode(tiny), NoPathError);

  FeatureMatrix wrong_dim;
  wrong_dim.utterance_id = "wrong";
  wrong_dim.dim = world.spec.dim + 1;
  wrong_dim.num_frames = 5;
  wrong_dim.data.assign(5 * (world.spec.dim + 1), 0.0f);
  CHECK_THROWS_AS(decoder.decode(wrong_dim), ValidationError);
}

TEST_CASE("graph spec consistency is enforced") {
  World world(608);
  DecodeGraphSpec bad1{&world.mono_lex, &world.lm_multi, true, 4.0, 0.0, 0.0};
  CHECK_THROWS_AS(Decoder(world.am, bad1), ValidationError);
  DecodeGraphSpec bad2{&world.multi_lex, &world.lm_mono, true, 4.0, 0.0, 0.0};
  CHECK_THROWS_AS(Decoder(world.am, bad2), ValidationError);
  DecodeGraphSpec bad3{&world.training_lex, &world.lm_multi, true, 4.0, 0.0, 0.0};
  CHECK_THROWS_AS(Decoder(world.am, bad3), ValidationError);
}

TEST_CASE("exhaustive oracle guards its combinatorial limits") {
  World world(609);
  const auto& feats = world.corpus.dev.utts[0].feats;
  auto spec = world.mono_spec();
  CHECK_THROWS_AS(exhaustive_decode(world.am, spec, feats, 5), ValidationError);

  // 9 distinct words exceed the vocabulary guard.
  std::vector<std::string> big_vocab = {"aa", "bb", "cc", "dd", "ee", "ff", "gg", "hh", "ii"};
  auto big_lex = build_mono_decode_lexicon(big_vocab, world.spec.accents);
  CorpusSpec big_spec = world.spec;
  big_spec.vocab = big_vocab;
  big_spec.text_template_path.clear();
  auto big_training = build_training_lexicon(big_vocab, world.spec.accents);
  auto big_am = reference_acoustic_model(big_spec, big_training);
  TextCorpus text = {{"u1", {"aa", "bb"}, "UK"}, {"u2", {"cc"}, "US"}};
  auto big_lm = train_trigram(text, LmMode::kMono);
  DecodeGraphSpec big{&big_lex, &big_lm, true, 4.0, 0.0, 0.0};
  CHECK_THROWS_AS(exhaustive_decode(big_am, big, feats, 2), ValidationError);
}

TEST_CASE("single-word vocabulary returns that word with its alignment score") {
  World world(610, 1, 1.0, "go\n");
  CorpusSpec one = world.spec;
  one.vocab = {"go"};
  auto lex = build_mono_decode_lexicon(one.vocab, one.accents);
  auto training = build_training_lexicon(one.vocab, one.accents);
  auto am = reference_acoustic_model(one, training);
  TextCorpus text = {{"u1", {"go"}, "UK"}};
  auto lm = train_trigram(text, LmMode::kMono);
  DecodeGraphSpec spec{&lex, &lm, false, 4.0, 0.0, 0.0};

  one.lead_sil_prob = 0.0;
  one.trail_sil_prob = 0.0;
  auto corpus = generate_corpus(one);
  const auto& feats = corpus.dev.utts[0].feats;
  auto r = exhaustive_decode(am, spec, feats, 1);
  CHECK(r.words == std::vector<std::string>{"go"});

  LexiconEntry entry = lex.entries[0];
  auto a = align(am, {&entry}, feats, false);
  double expected = a.log_likelihood +
                    4.0 * kLn10 * (lm.score_sequence({"go"})) ;
  CHECK(r.total_log_score == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("parallel batch decoding equals the serial reference") {
  World world(611);
  std::vector<FeatureMatrix> feats;
  for (const auto& u : world.corpus.dev.utts) feats.push_back(u.feats);
  for (const auto& joint : {world.mono_spec(), world.multi_spec()}) {
    auto par = decode_batch(world.am, joint, feats);
    auto ser = decode_batch_serial(world.am, joint, feats);
    REQUIRE(par.size() == ser.size());
    for (size_t i = 0; i < par.size(); ++i) {
      CHECK(par[i].words == ser[i].words);
      CHECK(par[i].total_log_score == ser[i].total_log_score);
    }
  }
}
