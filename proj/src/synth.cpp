#include "accentasr/synth.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace accentasr {

const CorpusSplit& Corpus::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "dev") return dev;
  if (name == "test") return test;
  throw ValidationError("unknown corpus split \"" + name + "\"");
}

CorpusSplit& Corpus::split(const std::string& name) {
  return const_cast<CorpusSplit&>(static_cast<const Corpus*>(this)->split(name));
}

std::vector<std::string> default_vocab(int size) {
  std::vector<std::string> vocab;
  std::set<std::string> seen;
  uint64_t salt = 0;
  for (int i = 0; i < size; ++i) {
    int len = 2 + (i % 11);
    for (;;) {
      Rng rng(hash_combine(hash_str("default-vocab"), hash_combine(i, salt)));
      std::string w;
      for (int j = 0; j < len; ++j) w += static_cast<char>('a' + rng.uniform_int(0, 25));
      if (seen.insert(w).second) {
        vocab.push_back(w);
        break;
      }
      ++salt;
    }
  }
  std::sort(vocab.begin(), vocab.end());
  return vocab;
}

static std::vector<double> hashed_uniform_vec(uint64_t key, int dim, double scale) {
  Rng rng(key);
  std::vector<double> v(dim);
  for (int d = 0; d < dim; ++d) v[d] = scale * (2.0 * rng.uniform() - 1.0);
  return v;
}

static std::vector<double> hashed_unit_vec(uint64_t key, int dim) {
  Rng rng(key);
  std::vector<double> v(dim);
  double norm = 0.0;
  for (int d = 0; d < dim; ++d) {
    v[d] = rng.gaussian();
    norm += v[d] * v[d];
  }
  norm = std::sqrt(std::max(norm, 1e-12));
  for (double& x : v) x /= norm;
  return v;
}

static uint64_t unit_key(const char* tag, char base, bool wb, int state) {
  uint64_t k = hash_str(tag);
  k = hash_combine(k, static_cast<uint64_t>(static_cast<unsigned char>(base)));
  k = hash_combine(k, wb ? 1 : 0);
  return hash_combine(k, static_cast<uint64_t>(state));
}

std::vector<double> unit_state_mean(const CorpusSpec& spec, char base, bool word_boundary,
                                    int state, const std::string& accent_code) {
  auto mean = hashed_uniform_vec(unit_key("base-mean", base, word_boundary, state), spec.dim,
                                 spec.base_spread);
  if (!accent_code.empty() && spec.accent_shift != 0.0) {
    auto dir = hashed_unit_vec(
        hash_combine(unit_key("accent-dir", base, word_boundary, state), hash_str(accent_code)),
        spec.dim);
    for (int d = 0; d < spec.dim; ++d) mean[d] += spec.accent_shift * dir[d];
  }
  return mean;
}

std::vector<double> silence_state_mean(const CorpusSpec& spec, int state) {
  return hashed_uniform_vec(unit_key("sil-mean", 0, false, state), spec.dim,
                            0.5 * spec.base_spread);
}

static std::vector<std::vector<std::string>> load_template_lines(const CorpusSpec& spec) {
  std::vector<std::vector<std::string>> lines;
  if (spec.text_template_path.empty()) return lines;
  std::ifstream in(spec.text_template_path);
  if (!in) throw ValidationError("cannot open text template file: " + spec.text_template_path);
  std::set<std::string> vocab(spec.vocab.begin(), spec.vocab.end());
  std::string line;
  while (std::getline(in, line)) {
    auto words = split_ws(line);
    if (words.empty()) continue;
    for (const auto& w : words)
      if (!vocab.count(w))
        throw ValidationError("text template word \"" + w + "\" is not in the vocabulary");
    lines.push_back(std::move(words));
  }
  if (lines.empty()) throw ValidationError("text template file is empty: " + spec.text_template_path);
  return lines;
}

namespace {

struct GenContext {
  const CorpusSpec& spec;
  std::vector<std::vector<std::string>> templates;
  // means cached per (base#wb#state[#accent]) to avoid rehashing per frame
  std::unordered_map<uint64_t, std::vector<double>> mean_cache;

  const std::vector<double>& variant_mean(char base, bool wb, int state,
                                          const std::string& accent) {
    uint64_t k = hash_combine(unit_key("cache", base, wb, state), hash_str(accent));
    auto it = mean_cache.find(k);
    if (it != mean_cache.end()) return it->second;
    return mean_cache.emplace(k, unit_state_mean(spec, base, wb, state, accent)).first->second;
  }
  const std::vector<double>& sil_mean(int state) {
    uint64_t k = unit_key("cache-sil", 0, false, state);
    auto it = mean_cache.find(k);
    if (it != mean_cache.end()) return it->second;
    return mean_cache.emplace(k, silence_state_mean(spec, state)).first->second;
  }
};

}  // namespace

static void emit_states(const CorpusSpec& spec, Rng& rng, char base, bool wb, bool is_sil,
                        std::vector<float>& data,
                        std::vector<CorpusUtterance::FrameTruth>& truth, GenContext& ctx,
                        const std::string& accent) {
  for (int state = 0; state < 3; ++state) {
    const std::vector<double>& mean =
        is_sil ? ctx.sil_mean(state) : ctx.variant_mean(base, wb, state, accent);
    int dur = rng.geometric_duration(spec.state_duration_mean);
    for (int k = 0; k < dur; ++k) {
      for (int d = 0; d < spec.dim; ++d)
        data.push_back(static_cast<float>(mean[d] + spec.noise_sigma * rng.gaussian()));
      truth.push_back({is_sil ? static_cast<char>(0) : base, static_cast<uint8_t>(wb ? 1 : 0),
                       static_cast<uint8_t>(state), static_cast<uint8_t>(is_sil ? 1 : 0)});
    }
  }
}

static CorpusUtterance generate_utterance(const CorpusSpec& spec, GenContext& ctx,
                                          const std::string& split_name,
                                          const AccentId& accent, int index) {
  uint64_t seed = hash_combine(hash_combine(spec.seed, hash_str(split_name)),
                               hash_combine(hash_str(accent.code), static_cast<uint64_t>(index)));
  Rng rng(seed);

  CorpusUtterance utt;
  char idbuf[64];
  std::snprintf(idbuf, sizeof(idbuf), "%s-%s-%05d", split_name.c_str(), accent.code.c_str(), index);
  utt.id = idbuf;
  utt.accent_code = accent.code;

  if (!ctx.templates.empty()) {
    utt.words = ctx.templates[rng.uniform_int(0, static_cast<int>(ctx.templates.size()) - 1)];
  } else {
    int n_words = 1 + rng.poisson(std::max(0.0, spec.words_per_utt_mean - 1.0));
    for (int i = 0; i < n_words; ++i)
      utt.words.push_back(spec.vocab[rng.uniform_int(0, static_cast<int>(spec.vocab.size()) - 1)]);
  }

  std::vector<float> data;
  auto sil = [&]() { emit_states(spec, rng, 0, false, true, data, utt.truth, ctx, accent.code); };
  if (rng.uniform() < spec.lead_sil_prob) sil();
  for (size_t w = 0; w < utt.words.size(); ++w) {
    if (w > 0 && rng.uniform() < spec.inter_sil_prob) sil();
    const std::string& word = utt.words[w];
    for (size_t i = 0; i < word.size(); ++i) {
      bool wb = (i == 0 || i + 1 == word.size());
      emit_states(spec, rng, word[i], wb, false, data, utt.truth, ctx, accent.code);
    }
  }
  if (rng.uniform() < spec.trail_sil_prob) sil();

  utt.feats.utterance_id = utt.id;
  utt.feats.dim = spec.dim;
  utt.feats.num_frames = static_cast<int32_t>(data.size() / spec.dim);
  utt.feats.frame_shift = spec.frame_shift;
  utt.feats.data = std::move(data);
  return utt;
}

static void validate_spec(const CorpusSpec& spec) {
  validate_accent_inventory(spec.accents);
  if (spec.accents.empty()) throw ValidationError("corpus spec needs at least one accent");
  if (spec.train_utts_per_accent < 1) throw ValidationError("train_utts_per_accent must be positive");
  if (spec.dev_utts_per_accent < 0 || spec.test_utts_per_accent < 0)
    throw ValidationError("split sizes must be non-negative");
  if (spec.words_per_utt_mean < 1.0) throw ValidationError("words_per_utt_mean must be >= 1");
  if (spec.accent_shift < 0.0) throw ValidationError("accent_shift must be >= 0");
  if (spec.dim < 1) throw ValidationError("feature dimension must be positive");
}

static Corpus generate_impl(const CorpusSpec& spec_in, bool parallel) {
  CorpusSpec spec = spec_in;
  if (spec.vocab.empty()) spec.vocab = default_vocab(100);
  validate_spec(spec);
  for (const auto& w : spec.vocab) graphemize(w, spec.alphabet);  // reject invalid words early

  GenContext ctx{spec, load_template_lines(spec), {}};
  // Warm the mean cache serially so parallel workers only read it.
  for (const auto& w : spec.vocab)
    for (size_t i = 0; i < w.size(); ++i)
      for (int s = 0; s < 3; ++s)
        for (const auto& a : spec.accents)
          ctx.variant_mean(w[i], i == 0 || i + 1 == w.size(), s, a.code);
  for (int s = 0; s < 3; ++s) ctx.sil_mean(s);

  Corpus corpus;
  struct Job {
    CorpusSplit* split;
    const AccentId* accent;
    int index;
    int slot;
  };
  std::vector<Job> jobs;
  auto plan_split = [&](CorpusSplit& split, int per_accent) {
    split.utts.resize(static_cast<size_t>(per_accent) * spec.accents.size());
    int slot = 0;
    for (const auto& a : spec.accents)
      for (int k = 0; k < per_accent; ++k) jobs.push_back({&split, &a, k, slot++});
  };
  plan_split(corpus.train, spec.train_utts_per_accent);
  plan_split(corpus.dev, spec.dev_utts_per_accent);
  plan_split(corpus.test, spec.test_utts_per_accent);

  const int n = static_cast<int>(jobs.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < n; ++i)
      jobs[i].split->utts[jobs[i].slot] =
          generate_utterance(spec, ctx, jobs[i].split->name, *jobs[i].accent, jobs[i].index);
  } else {
    for (int i = 0; i < n; ++i)
      jobs[i].split->utts[jobs[i].slot] =
          generate_utterance(spec, ctx, jobs[i].split->name, *jobs[i].accent, jobs[i].index);
  }
  return corpus;
}

Corpus generate_corpus(const CorpusSpec& spec) { return generate_impl(spec, true); }
Corpus generate_corpus_serial(const CorpusSpec& spec) { return generate_impl(spec, false); }

// ---------------------------------------------------------------------------
// Disk layout
// ---------------------------------------------------------------------------

static void save_split(const CorpusSplit& split, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream text(dir / "text");
  std::ofstream u2a(dir / "utt2accent");
  if (!text || !u2a) throw ValidationError("cannot write corpus split files under " + dir.string());
  std::vector<FeatureMatrix> feats;
  feats.reserve(split.utts.size());
  for (const auto& utt : split.utts) {
    text << utt.id << '\t' << join(utt.words, " ") << '\n';
    u2a << utt.id << '\t' << utt.accent_code << '\n';
    feats.push_back(utt.feats);
  }
  write_feature_archive(feats, (dir / "feats.bin").string());
}

void save_corpus(const Corpus& corpus, const CorpusSpec& spec, const std::string& dir) {
  fs::create_directories(dir);
  save_split(corpus.train, fs::path(dir) / "train");
  save_split(corpus.dev, fs::path(dir) / "dev");
  save_split(corpus.test, fs::path(dir) / "test");

  json j;
  j["accents"] = json::array();
  for (const auto& a : spec.accents) j["accents"].push_back({{"code", a.code}, {"name", a.display_name}});
  j["vocab"] = spec.vocab;
  j["train_utts_per_accent"] = spec.train_utts_per_accent;
  j["dev_utts_per_accent"] = spec.dev_utts_per_accent;
  j["test_utts_per_accent"] = spec.test_utts_per_accent;
  j["words_per_utt_mean"] = spec.words_per_utt_mean;
  j["accent_shift"] = spec.accent_shift;
  j["noise_sigma"] = spec.noise_sigma;
  j["base_spread"] = spec.base_spread;
  j["state_duration_mean"] = spec.state_duration_mean;
  j["lead_sil_prob"] = spec.lead_sil_prob;
  j["trail_sil_prob"] = spec.trail_sil_prob;
  j["inter_sil_prob"] = spec.inter_sil_prob;
  j["dim"] = spec.dim;
  j["frame_shift"] = spec.frame_shift;
  j["seed"] = spec.seed;
  std::ofstream out(fs::path(dir) / "corpus_spec.json");
  out << j.dump(2) << '\n';
}

CorpusSpec load_corpus_spec(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "corpus_spec.json");
  if (!in) throw ValidationError("missing corpus_spec.json under " + dir);
  json j = json::parse(in);
  CorpusSpec spec;
  spec.accents.clear();
  for (const auto& a : j.at("accents"))
    spec.accents.push_back({a.at("code").get<std::string>(), a.at("name").get<std::string>()});
  spec.vocab = j.at("vocab").get<std::vector<std::string>>();
  spec.train_utts_per_accent = j.at("train_utts_per_accent").get<int>();
  spec.dev_utts_per_accent = j.at("dev_utts_per_accent").get<int>();
  spec.test_utts_per_accent = j.at("test_utts_per_accent").get<int>();
  spec.words_per_utt_mean = j.at("words_per_utt_mean").get<double>();
  spec.accent_shift = j.at("accent_shift").get<double>();
  spec.noise_sigma = j.at("noise_sigma").get<double>();
  spec.base_spread = j.at("base_spread").get<double>();
  spec.state_duration_mean = j.at("state_duration_mean").get<double>();
  spec.lead_sil_prob = j.at("lead_sil_prob").get<double>();
  spec.trail_sil_prob = j.at("trail_sil_prob").get<double>();
  spec.inter_sil_prob = j.at("inter_sil_prob").get<double>();
  spec.dim = j.at("dim").get<int>();
  spec.frame_shift = j.at("frame_shift").get<double>();
  spec.seed = j.at("seed").get<uint64_t>();
  return spec;
}

bool corpus_has_spec(const std::string& dir) {
  return fs::exists(fs::path(dir) / "corpus_spec.json");
}

static CorpusSplit load_split(const std::string& name, const fs::path& dir, float frame_shift) {
  CorpusSplit split{name, {}};
  std::ifstream text(dir / "text");
  std::ifstream u2a(dir / "utt2accent");
  if (!text) throw ValidationError("missing file: " + (dir / "text").string());
  if (!u2a) throw ValidationError("missing file: " + (dir / "utt2accent").string());

  std::unordered_map<std::string, std::vector<std::string>> transcripts;
  std::unordered_map<std::string, std::string> accents;
  std::string line;
  while (std::getline(text, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("malformed text line: \"" + line + "\"");
    transcripts[line.substr(0, tab)] = split_ws(line.substr(tab + 1));
  }
  while (std::getline(u2a, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("malformed utt2accent line: \"" + line + "\"");
    accents[line.substr(0, tab)] = line.substr(tab + 1);
  }

  auto feats = read_feature_archive((dir / "feats.bin").string(), frame_shift);
  std::vector<std::string> problems;
  for (const auto& f : feats) {
    auto t = transcripts.find(f.utterance_id);
    auto a = accents.find(f.utterance_id);
    if (t == transcripts.end()) problems.push_back(f.utterance_id + " (missing in text)");
    if (a == accents.end()) problems.push_back(f.utterance_id + " (missing in utt2accent)");
    if (t == transcripts.end() || a == accents.end()) continue;
    CorpusUtterance utt;
    utt.id = f.utterance_id;
    utt.words = t->second;
    utt.accent_code = a->second;
    utt.feats = f;
    split.utts.push_back(std::move(utt));
  }
  if (transcripts.size() != split.utts.size())
    for (const auto& [id, words] : transcripts) {
      (void)words;
      if (std::none_of(split.utts.begin(), split.utts.end(),
                       [&](const CorpusUtterance& u) { return u.id == id; }))
        problems.push_back(id + " (no features)");
    }
  if (accents.size() != split.utts.size())
    for (const auto& [id, acc] : accents) {
      (void)acc;
      if (std::none_of(split.utts.begin(), split.utts.end(),
                       [&](const CorpusUtterance& u) { return u.id == id; }))
        problems.push_back(id + " (no features)");
    }
  if (!problems.empty()) {
    std::sort(problems.begin(), problems.end());
    problems.erase(std::unique(problems.begin(), problems.end()), problems.end());
    throw ValidationError("inconsistent corpus split \"" + name + "\": " + join(problems, ", "));
  }
  return split;
}

Corpus load_corpus(const std::string& dir) {
  double frame_shift = 0.01;
  if (corpus_has_spec(dir)) frame_shift = load_corpus_spec(dir).frame_shift;
  Corpus corpus;
  corpus.train = load_split("train", fs::path(dir) / "train", frame_shift);
  corpus.dev = load_split("dev", fs::path(dir) / "dev", frame_shift);
  corpus.test = load_split("test", fs::path(dir) / "test", frame_shift);
  return corpus;
}

TextCorpus split_text(const CorpusSplit& split) {
  TextCorpus text;
  text.reserve(split.utts.size());
  for (const auto& u : split.utts) text.push_back({u.id, u.words, u.accent_code});
  return text;
}

double nearest_mean_frame_accuracy(const CorpusSpec& spec_in, const CorpusSplit& split) {
  CorpusSpec spec = spec_in;
  if (spec.vocab.empty()) spec.vocab = default_vocab(100);
  GenContext ctx{spec, {}, {}};
  std::unordered_map<std::string, size_t> accent_index;
  for (size_t i = 0; i < spec.accents.size(); ++i) accent_index[spec.accents[i].code] = i;

  uint64_t correct = 0, total = 0;
  for (const auto& utt : split.utts) {
    if (utt.truth.empty())
      throw ValidationError("nearest-mean oracle needs generator truth (in-memory corpus)");
    size_t true_accent = accent_index.at(utt.accent_code);
    for (int32_t t = 0; t < utt.feats.num_frames; ++t) {
      const auto& ft = utt.truth[t];
      if (ft.is_sil) continue;
      auto frame = utt.feats.frame(t);
      double best = std::numeric_limits<double>::max();
      size_t arg = 0;
      for (size_t a = 0; a < spec.accents.size(); ++a) {
        const auto& mean = ctx.variant_mean(ft.base, ft.wb != 0, ft.state, spec.accents[a].code);
        double dist = 0.0;
        for (int d = 0; d < spec.dim; ++d) {
          double diff = frame[d] - mean[d];
          dist += diff * diff;
        }
        if (dist < best) {
          best = dist;
          arg = a;
        }
      }
      total++;
      if (arg == true_accent) correct++;
    }
  }
  if (total == 0) throw ValidationError("no scored frames for the nearest-mean oracle");
  return static_cast<double>(correct) / static_cast<double>(total);
}

AcousticModel reference_acoustic_model(const CorpusSpec& spec_in, const Lexicon& training_lexicon) {
  CorpusSpec spec = spec_in;
  if (spec.vocab.empty()) spec.vocab = default_vocab(100);
  std::set<std::string> units;
  for (const auto& e : training_lexicon.entries)
    for (const auto& g : e.pron) units.insert(g.str());
  units.insert(kSilenceUnit);

  AcousticModel am;
  am.dim = spec.dim;
  am.states_per_unit = 3;
  double p_fwd = 1.0 / std::max(1.0, spec.state_duration_mean);
  double p_self = std::max(1e-8, 1.0 - p_fwd);
  double var = std::max(1e-6, spec.noise_sigma * spec.noise_sigma);
  for (const auto& u : units) {
    PhoneHmm h;
    h.unit = u;
    h.log_self.assign(3, std::log(p_self));
    h.log_forward.assign(3, std::log(p_fwd));
    for (int s = 0; s < 3; ++s) {
      DiagGmm g;
      g.dim = spec.dim;
      g.weights = {1.0};
      if (u == kSilenceUnit) {
        g.means = {silence_state_mean(spec, s)};
      } else {
        TaggedGrapheme tg = TaggedGrapheme::parse(u);
        g.means = {unit_state_mean(spec, tg.base, tg.word_boundary, s, tg.accent)};
      }
      g.vars = {std::vector<double>(spec.dim, var)};
      g.refresh_gconsts();
      h.states.push_back(std::move(g));
    }
    am.unit_index[h.unit] = static_cast<int>(am.hmms.size());
    am.hmms.push_back(std::move(h));
  }
  return am;
}

}  // namespace accentasr
