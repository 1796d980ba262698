#pragma once

#include <optional>
#include <string>
#include <vector>

#include "accentasr/accent_vote.hpp"
#include "accentasr/decoder.hpp"
#include "accentasr/eval.hpp"
#include "accentasr/logging.hpp"
#include "accentasr/ngram.hpp"
#include "accentasr/synth.hpp"
#include "accentasr/train_am.hpp"

namespace accentasr {

struct RunConfig {
  // Corpus: synthesize from `spec`, or load `corpus_dir` when set.
  std::string corpus_dir;
  CorpusSpec spec;

  double unk_pseudocount = 1.0;

  int am_iterations = 8;
  std::vector<int> density_sweep = {1};  // mixture components per state
  double variance_floor = 1e-3;

  double beam = 14.0;
  int max_active = 7000;
  double lm_scale = 10.0;
  double word_insertion_penalty = 0.0;
  bool optional_silence = true;
  double silence_logprob = 0.0;

  VoteGranularity granularity = VoteGranularity::kWord;
  std::vector<std::string> excluded_accents;

  int ranking_min_count = 20;
  int ranking_top_k = 10;
  std::string eval_split = "dev";

  std::string out_dir;
  bool force = false;
};

// Iterations at which mixtures double so every state ends with
// `components` Gaussians (powers of two only).
std::vector<int> mixup_schedule(int iterations, int components);

struct MethodEval {
  std::string method;
  WerReport wer;
  AccuracyReport acc;
  ConfusionReport conf;
  WordRanking ranking;
  std::vector<AccentDecision> decisions;
  double impure_rate = 0.0;  // decodes carrying >= 2 distinct accents
  int64_t undecidable = 0;
};

struct SweepEntry {
  int components = 1;
  int64_t total_densities = 0;
  double mono_wer = 0.0, mono_acc = 0.0;
  double multi_wer = 0.0, multi_acc = 0.0;
};

struct RunAllResult {
  CorpusStatsReport stats;
  double oracle_frame_accuracy = -1.0;  // -1 when generator truth is unavailable
  uint64_t lm_cross_accent_violations = 0;
  MethodEval mono, multi;
  std::vector<SweepEntry> sweep;
  std::vector<std::string> accents;
};

// Accent decisions for a batch of decodes; undecidable utterances come
// back with an empty accent code.
std::vector<AccentDecision> decide_accents(const std::vector<DecodeResult>& results,
                                           LexiconKind mode, VoteGranularity granularity);

// Scoring inputs from decodes plus gold transcripts (multi-joint tags
// stripped).
std::vector<UttScore> build_scores(const std::vector<DecodeResult>& results,
                                   const CorpusSplit& gold);

double impure_fraction(const std::vector<DecodeResult>& results);

// The full experiment: corpus, lexicons, both LMs, acoustic training,
// both decodes, accent decisions, and every report, written under
// config.out_dir.
RunAllResult run_all(const RunConfig& config, EventLog& log);

// Refuses to overwrite an existing file unless force is set.
void ensure_writable(const std::string& path, bool force);

}  // namespace accentasr
