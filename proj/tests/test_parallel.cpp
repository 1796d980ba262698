#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "accentasr/ngram.hpp"
#include "accentasr/synth.hpp"
#include "accentasr/train_am.hpp"

using namespace accentasr;

namespace {

std::string model_bytes(const AcousticModel& am) {
  auto path = std::filesystem::temp_directory_path() / "accentasr-par-model.bin";
  write_acoustic_model(am, path.string());
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::filesystem::remove(path);
  return bytes;
}

}  // namespace

TEST_CASE("EM training is bit-identical between the OpenMP and serial paths") {
  CorpusSpec spec;
  spec.accents = {{"US", "American"}, {"UK", "British"}};
  spec.vocab = {"go", "home", "red", "blue", "water"};
  spec.train_utts_per_accent = 20;
  spec.dev_utts_per_accent = 1;
  spec.test_utts_per_accent = 0;
  spec.words_per_utt_mean = 3.0;
  spec.seed = 404;
  auto corpus = generate_corpus(spec);
  auto training_lex = build_training_lexicon(spec.vocab, spec.accents);

  std::set<std::string> unit_set;
  for (const auto& e : training_lex.entries)
    for (const auto& g : e.pron) unit_set.insert(g.str());
  unit_set.insert(kSilenceUnit);
  std::vector<std::string> units(unit_set.begin(), unit_set.end());

  GlobalStats stats;
  for (const auto& u : corpus.train.utts) stats.accumulate(u.feats);
  auto am0 = flat_start(units, {spec.dim, 3, 1e-3}, &stats);

  std::unordered_map<std::string, const LexiconEntry*> lookup;
  for (const auto& e : training_lex.entries) lookup[e.word] = &e;
  std::vector<TrainUtterance> train_utts;
  for (const auto& u : corpus.train.utts) {
    TrainUtterance t;
    t.feats = &u.feats;
    for (const auto& w : u.words) t.words.push_back(lookup.at(tag_word(w, u.accent_code)));
    train_utts.push_back(std::move(t));
  }

  TrainConfig par;
  par.iterations = 4;
  par.mixup_iterations = {3};
  TrainConfig ser = par;
  ser.parallel = false;

  TrainStats sp, ss;
  auto m_par = train_em(am0, train_utts, par, &sp);
  auto m_ser = train_em(am0, train_utts, ser, &ss);

  CHECK(sp.iteration_loglik == ss.iteration_loglik);
  CHECK(model_bytes(m_par) == model_bytes(m_ser));

  // And a second parallel run reproduces the same bytes.
  auto m_par2 = train_em(am0, train_utts, par, nullptr);
  CHECK(model_bytes(m_par) == model_bytes(m_par2));
}
