#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "accentasr/align.hpp"
#include "accentasr/hmm.hpp"
#include "accentasr/train_am.hpp"

using namespace accentasr;

namespace {

FeatureMatrix frames_from(const std::vector<std::vector<double>>& rows) {
  FeatureMatrix f;
  f.utterance_id = "fixture";
  f.num_frames = static_cast<int>(rows.size());
  f.dim = static_cast<int>(rows[0].size());
  for (const auto& r : rows)
    for (double v : r) f.data.push_back(static_cast<float>(v));
  return f;
}

// Hand-built model: one unit per name, per-state means along dimension 0.
AcousticModel toy_model(const std::vector<std::string>& units,
                        const std::vector<std::vector<double>>& state_means, int dim,
                        double var = 1.0, double p_self = 0.5) {
  AcousticModel am;
  am.dim = dim;
  am.states_per_unit = 3;
  for (size_t u = 0; u < units.size(); ++u) {
    PhoneHmm h;
    h.unit = units[u];
    h.log_self.assign(3, std::log(p_self));
    h.log_forward.assign(3, std::log(1.0 - p_self));
    for (int s = 0; s < 3; ++s) {
      DiagGmm g;
      g.dim = dim;
      g.weights = {1.0};
      g.means = {std::vector<double>(dim, state_means[u][s])};
      g.vars = {std::vector<double>(dim, var)};
      g.refresh_gconsts();
      h.states.push_back(std::move(g));
    }
    am.unit_index[h.unit] = static_cast<int>(am.hmms.size());
    am.hmms.push_back(std::move(h));
  }
  return am;
}

double file_bytes_equal(const std::string& a, const std::string& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  return sa == sb;
}

}  // namespace

TEST_CASE("flat start: density count, identical states, determinism") {
  FlatStartConfig config{13, 3, 1e-3};
  auto am = flat_start({"a_US_WB", "b_US_WB"}, config);
  CHECK(am.total_densities() == 6);

  FeatureMatrix f = frames_from({std::vector<double>(13, 0.7)});
  double first = am.emission_logprob("a_US_WB", 0, f.frame(0));
  for (const auto& h : am.hmms)
    for (int s = 0; s < 3; ++s) CHECK(h.states[s].log_likelihood(f.frame(0)) == first);

  auto am2 = flat_start({"a_US_WB", "b_US_WB"}, config);
  auto dir = std::filesystem::temp_directory_path() / "accentasr-flat";
  std::filesystem::create_directories(dir);
  write_acoustic_model(am, (dir / "m1.bin").string());
  write_acoustic_model(am2, (dir / "m2.bin").string());
  CHECK(file_bytes_equal((dir / "m1.bin").string(), (dir / "m2.bin").string()));
  CHECK_THROWS_AS(flat_start({"a_US_WB", "a_US_WB"}, config), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("emission log probability at the mean equals the normalization constant") {
  auto am = toy_model({"u"}, {{0.0, 1.0, 2.0}}, 4, 0.5);
  FeatureMatrix f = frames_from({std::vector<double>(4, 0.0)});
  double expected = -0.5 * (4 * std::log(2.0 * M_PI) + 4 * std::log(0.5));
  CHECK(am.emission_logprob("u", 0, f.frame(0)) == doctest::Approx(expected).epsilon(1e-12));

  // Monotone decay away from the mean along one axis.
  double prev = am.emission_logprob("u", 0, f.frame(0));
  for (double step : {0.5, 1.0, 2.0, 4.0}) {
    FeatureMatrix g = frames_from({{step, 0.0, 0.0, 0.0}});
    double v = am.emission_logprob("u", 0, g.frame(0));
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("two-component mixture equals a hand-computed log-sum-exp") {
  DiagGmm g;
  g.dim = 2;
  g.weights = {0.3, 0.7};
  g.means = {{0.0, 0.0}, {2.0, 1.0}};
  g.vars = {{1.0, 1.0}, {0.5, 2.0}};
  g.refresh_gconsts();
  std::vector<float> x = {1.0f, -0.5f};

  auto comp = [&](int c) {
    double gconst = -0.5 * (2 * std::log(2.0 * M_PI) +
                            std::log(g.vars[c][0]) + std::log(g.vars[c][1]));
    double maha = (x[0] - g.means[c][0]) * (x[0] - g.means[c][0]) / g.vars[c][0] +
                  (x[1] - g.means[c][1]) * (x[1] - g.means[c][1]) / g.vars[c][1];
    return std::log(g.weights[c]) + gconst - 0.5 * maha;
  };
  double expected = std::log(std::exp(comp(0)) + std::exp(comp(1)));
  CHECK(g.log_likelihood({x.data(), 2}) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("emission errors: bad state, bad dimension") {
  auto am = toy_model({"u"}, {{0.0, 1.0, 2.0}}, 3);
  FeatureMatrix f = frames_from({{0.0, 0.0, 0.0}});
  CHECK_THROWS_AS(am.emission_logprob("u", 7, f.frame(0)), ValidationError);
  FeatureMatrix bad = frames_from({{0.0, 0.0}});
  CHECK_THROWS_AS(am.emission_logprob("u", 0, bad.frame(0)), ValidationError);
  CHECK_THROWS_AS(am.emission_logprob("missing", 0, f.frame(0)), ValidationError);
}

TEST_CASE("forced path: one unit, three states, three frames") {
  auto am = toy_model({"a_US_WB"}, {{0.0, 5.0, 10.0}}, 2);
  LexiconEntry entry{"a_US", {TaggedGrapheme{'a', "US", true}}};
  FeatureMatrix f = frames_from({{0.0, 0.0}, {5.0, 5.0}, {10.0, 10.0}});
  auto a = align(am, {&entry}, f, /*optional_silence=*/false);
  CHECK(a.state_seq == std::vector<int>{0, 1, 2});
  REQUIRE(a.phones.size() == 1);
  CHECK(a.phones[0].start == 0);
  CHECK(a.phones[0].end == 2);

  FeatureMatrix too_short = frames_from({{0.0, 0.0}, {5.0, 5.0}});
  CHECK_THROWS_AS(align(am, {&entry}, too_short, false), AlignmentError);
}

TEST_CASE("alignment log likelihood never exceeds the forward score") {
  auto am = toy_model({"a_US_WB", "b_US_WB"}, {{0.0, 2.0, 4.0}, {6.0, 8.0, 10.0}}, 2);
  LexiconEntry ea{"a_US", {TaggedGrapheme{'a', "US", true}}};
  LexiconEntry eb{"b_US", {TaggedGrapheme{'b', "US", true}}};
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::vector<double>> rows;
    int T = rng.uniform_int(6, 12);
    for (int t = 0; t < T; ++t)
      rows.push_back({rng.gaussian() * 3 + 4, rng.gaussian() * 3 + 4});
    FeatureMatrix f = frames_from(rows);
    auto slots = transcript_slots(am, {&ea, &eb}, false, 0.0);
    auto graph = build_utterance_graph(am, slots);
    auto a = viterbi_align(am, graph, f);
    double fwd = forward_loglik(am, graph, f);
    CHECK(a.log_likelihood <= fwd + 1e-9);
  }
}

TEST_CASE("two-unit alignment matches exhaustive path enumeration") {
  auto am = toy_model({"a_US_WB", "b_US_WB"}, {{0.0, 1.5, 3.0}, {4.5, 6.0, 7.5}}, 2, 0.8, 0.4);
  LexiconEntry ea{"a_US", {TaggedGrapheme{'a', "US", true}}};
  LexiconEntry eb{"b_US", {TaggedGrapheme{'b', "US", true}}};

  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int T = 6 + trial % 3;  // 6 states mandatory
    std::vector<std::vector<double>> rows;
    for (int t = 0; t < T; ++t) rows.push_back({rng.gaussian() * 4, rng.gaussian() * 4});
    FeatureMatrix f = frames_from(rows);

    auto slots = transcript_slots(am, {&ea, &eb}, false, 0.0);
    auto graph = build_utterance_graph(am, slots);
    auto viterbi = viterbi_align(am, graph, f);

    // Enumerate durations d[0..5] >= 1 summing to T over the fixed
    // six-state chain and score each path directly.
    const PhoneHmm& ha = am.hmm("a_US_WB");
    const PhoneHmm& hb = am.hmm("b_US_WB");
    std::vector<const DiagGmm*> gmms = {&ha.states[0], &ha.states[1], &ha.states[2],
                                        &hb.states[0], &hb.states[1], &hb.states[2]};
    std::vector<double> log_self = {ha.log_self[0],  ha.log_self[1],  ha.log_self[2],
                                    hb.log_self[0],  hb.log_self[1],  hb.log_self[2]};
    std::vector<double> log_fwd = {ha.log_forward[0], ha.log_forward[1], ha.log_forward[2],
                                   hb.log_forward[0], hb.log_forward[1], hb.log_forward[2]};
    double best = kLogZero;
    std::vector<int> dur(6, 1);
    auto score_path = [&]() {
      double total = 0.0;
      int t = 0;
      for (int s = 0; s < 6; ++s) {
        for (int k = 0; k < dur[s]; ++k) total += gmms[s]->log_likelihood(f.frame(t++));
        total += (dur[s] - 1) * log_self[s] + log_fwd[s];
      }
      best = std::max(best, total);
    };
    auto enumerate = [&](auto&& self, int s, int left) -> void {
      if (s == 5) {
        dur[5] = left;
        score_path();
        return;
      }
      for (int d = 1; left - d >= 5 - s; ++d) {
        dur[s] = d;
        self(self, s + 1, left - d);
      }
    };
    enumerate(enumerate, 0, T);
    CHECK(viterbi.log_likelihood == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("one EM iteration reproduces closed-form Gaussian updates") {
  // Distinct initial means force an unambiguous alignment.
  auto am = toy_model({"a_US_WB"}, {{0.0, 10.0, 20.0}}, 2, 1.0, 0.5);
  LexiconEntry entry{"a_US", {TaggedGrapheme{'a', "US", true}}};
  std::vector<std::vector<double>> rows = {{0.1, -0.2}, {-0.3, 0.4}, {9.8, 10.3},
                                           {10.4, 9.9}, {19.7, 20.2}, {20.1, 19.8}};
  FeatureMatrix f = frames_from(rows);

  auto a0 = align(am, {&entry}, f, false);
  CHECK(a0.state_seq == std::vector<int>{0, 0, 1, 1, 2, 2});

  TrainConfig config;
  config.iterations = 1;
  config.optional_silence = false;
  TrainStats stats;
  auto trained = train_em(am, {{&f, {&entry}}}, config, &stats);

  const PhoneHmm& h = trained.hmm("a_US_WB");
  for (int s = 0; s < 3; ++s) {
    for (int d = 0; d < 2; ++d) {
      // Closed form over the float-valued frames the trainer actually saw.
      double x1 = f.frame(2 * s)[d], x2 = f.frame(2 * s + 1)[d];
      double mean = (x1 + x2) / 2.0;
      double var = std::max(1e-3, (x1 * x1 + x2 * x2) / 2.0 - mean * mean);
      CHECK(h.states[s].means[0][d] == doctest::Approx(mean).epsilon(1e-12));
      CHECK(h.states[s].vars[0][d] == doctest::Approx(var).epsilon(1e-9));
    }
    // Each state held two frames: one self loop, one departure.
    CHECK(std::exp(h.log_self[s]) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::exp(h.log_forward[s]) == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK(stats.iteration_loglik.size() == 1);
}

TEST_CASE("EM likelihood is non-decreasing at fixed mixture count") {
  auto am = toy_model({"a_US_WB", "b_US_WB"}, {{0.0, 1.0, 2.0}, {3.0, 4.0, 5.0}}, 2);
  LexiconEntry ea{"a_US", {TaggedGrapheme{'a', "US", true}}};
  LexiconEntry eb{"b_US", {TaggedGrapheme{'b', "US", true}}};
  Rng rng(23);
  std::vector<FeatureMatrix> feats;
  std::vector<TrainUtterance> corpus;
  for (int i = 0; i < 12; ++i) {
    std::vector<std::vector<double>> rows;
    int T = rng.uniform_int(7, 14);
    for (int t = 0; t < T; ++t) rows.push_back({rng.gaussian() * 2 + 2, rng.gaussian() * 2 + 2});
    feats.push_back(frames_from(rows));
  }
  for (int i = 0; i < 12; ++i)
    corpus.push_back({&feats[i], i % 2 ? std::vector<const LexiconEntry*>{&ea, &eb}
                                       : std::vector<const LexiconEntry*>{&eb, &ea}});
  TrainConfig config;
  config.iterations = 6;
  config.optional_silence = false;
  TrainStats stats;
  train_em(am, corpus, config, &stats);  // throws internally on violation
  for (size_t k = 1; k < stats.iteration_loglik.size(); ++k)
    CHECK(stats.iteration_loglik[k] >= stats.iteration_loglik[k - 1] - 1e-6);
}

TEST_CASE("mixture split doubles the density count") {
  auto am = toy_model({"a_US_WB"}, {{0.0, 1.0, 2.0}}, 2);
  CHECK(am.total_densities() == 3);
  auto split = mixture_split(am);
  CHECK(split.total_densities() == 6);
  for (const auto& h : split.hmms)
    for (const auto& g : h.states) {
      CHECK(g.num_components() == 2);
      CHECK(g.weights[0] + g.weights[1] == doctest::Approx(1.0));
    }

  // Training through a scheduled split reports the new density count.
  LexiconEntry ea{"a_US", {TaggedGrapheme{'a', "US", true}}};
  Rng rng(31);
  std::vector<FeatureMatrix> feats;
  for (int i = 0; i < 6; ++i) {
    std::vector<std::vector<double>> rows;
    for (int t = 0; t < 9; ++t) rows.push_back({rng.gaussian(), rng.gaussian()});
    feats.push_back(frames_from(rows));
  }
  std::vector<TrainUtterance> corpus;
  for (auto& f : feats) corpus.push_back({&f, {&ea}});
  TrainConfig config;
  config.iterations = 4;
  config.mixup_iterations = {3};
  config.optional_silence = false;
  TrainStats stats;
  auto trained = train_em(am, corpus, config, &stats);
  CHECK(trained.total_densities() == 6);
  CHECK(stats.iteration_densities.front() == 3);
  CHECK(stats.iteration_densities.back() == 6);
  CHECK_FALSE(static_cast<bool>(stats.comparable[2]));
}

TEST_CASE("units with zero aligned frames are frozen with a warning") {
  auto am = toy_model({"a_US_WB", "z_US_WB"}, {{0.0, 1.0, 2.0}, {5.0, 6.0, 7.0}}, 2);
  LexiconEntry ea{"a_US", {TaggedGrapheme{'a', "US", true}}};
  Rng rng(37);
  std::vector<std::vector<double>> rows;
  for (int t = 0; t < 8; ++t) rows.push_back({rng.gaussian(), rng.gaussian()});
  FeatureMatrix f = frames_from(rows);
  TrainConfig config;
  config.iterations = 2;
  config.optional_silence = false;
  TrainStats stats;
  auto before = am.hmm("z_US_WB").states[0].means[0];
  auto trained = train_em(am, {{&f, {&ea}}}, config, &stats);
  CHECK(trained.hmm("z_US_WB").states[0].means[0] == before);
  REQUIRE(!stats.warnings.empty());
  CHECK(stats.warnings.front().find("z_US_WB") != std::string::npos);
  CHECK(stats.frozen_state_updates > 0);
}

TEST_CASE("trained variances respect the floor") {
  auto am = toy_model({"a_US_WB"}, {{0.0, 5.0, 10.0}}, 2);
  LexiconEntry ea{"a_US", {TaggedGrapheme{'a', "US", true}}};
  // Constant frames: sample variance is zero, floor must hold.
  std::vector<std::vector<double>> rows(6, {1.0, 1.0});
  rows[2] = rows[3] = {5.0, 5.0};
  rows[4] = rows[5] = {10.0, 10.0};
  FeatureMatrix f = frames_from(rows);
  TrainConfig config;
  config.iterations = 2;
  config.optional_silence = false;
  auto trained = train_em(am, {{&f, {&ea}}}, config, nullptr);
  for (const auto& h : trained.hmms)
    for (const auto& g : h.states)
      for (const auto& var : g.vars)
        for (double v : var) CHECK(v >= 1e-3 - 1e-15);
}

TEST_CASE("acoustic model binary file round trips bit-exactly") {
  auto am = toy_model({"a_US_WB", "b_UK_WB", "sil"}, {{0.1, 1.2, 2.3}, {3.3, 4.5, 5.1}, {0, 0, 0}},
                      13, 0.7, 0.6);
  auto dir = std::filesystem::temp_directory_path() / "accentasr-amio";
  std::filesystem::create_directories(dir);
  auto p1 = (dir / "a.bin").string(), p2 = (dir / "b.bin").string();
  write_acoustic_model(am, p1);
  auto back = read_acoustic_model(p1);
  CHECK(back.dim == am.dim);
  CHECK(back.total_densities() == am.total_densities());
  write_acoustic_model(back, p2);
  CHECK(file_bytes_equal(p1, p2));
  CHECK(back.hmm("b_UK_WB").states[1].means[0] == am.hmm("b_UK_WB").states[1].means[0]);
  std::filesystem::remove_all(dir);
}
