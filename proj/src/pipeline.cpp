#include "accentasr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "accentasr/report_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace accentasr {

void ensure_writable(const std::string& path, bool force) {
  if (!force && fs::exists(path))
    throw ValidationError("output already exists (use --force to overwrite): " + path);
}

std::vector<int> mixup_schedule(int iterations, int components) {
  if (components < 1 || (components & (components - 1)) != 0)
    throw ValidationError("mixture components must be a power of two, got " +
                          std::to_string(components));
  int splits = 0;
  for (int c = components; c > 1; c >>= 1) ++splits;
  if (splits == 0) return {};
  if (iterations < 2 * splits + 1)
    throw ValidationError("need at least " + std::to_string(2 * splits + 1) +
                          " iterations to reach " + std::to_string(components) +
                          " components (got " + std::to_string(iterations) + ")");
  std::vector<int> schedule;
  for (int j = 0; j < splits; ++j) schedule.push_back(iterations - 2 * (splits - j) + 1);
  return schedule;
}

std::vector<AccentDecision> decide_accents(const std::vector<DecodeResult>& results,
                                           LexiconKind mode, VoteGranularity granularity) {
  std::vector<AccentDecision> decisions;
  decisions.reserve(results.size());
  for (const auto& r : results) {
    AccentDecision d;
    d.utterance_id = r.utterance_id;
    try {
      AccentVote vote = mode == LexiconKind::kMultiJointDecode
                            ? utterance_accent_multi_joint(r)
                            : vote_utterance_accent(r, granularity);
      d.accent = vote.winner;
      d.tied = vote.tied;
    } catch (const UndecidableError&) {
      // silence-only decode: reported distinctly, scored as incorrect
    }
    decisions.push_back(std::move(d));
  }
  return decisions;
}

std::vector<UttScore> build_scores(const std::vector<DecodeResult>& results,
                                   const CorpusSplit& gold) {
  std::unordered_map<std::string, const CorpusUtterance*> by_id;
  for (const auto& u : gold.utts) by_id[u.id] = &u;
  std::vector<UttScore> scores;
  scores.reserve(results.size());
  for (const auto& r : results) {
    auto it = by_id.find(r.utterance_id);
    if (it == by_id.end())
      throw ValidationError("decode result for unknown utterance \"" + r.utterance_id + "\"");
    UttScore s;
    s.id = r.utterance_id;
    s.gold_accent = it->second->accent_code;
    s.ref = it->second->words;
    s.hyp.reserve(r.words.size());
    for (const auto& w : r.words) s.hyp.push_back(strip_tags(w));
    s.hyp_accents = r.word_accents;
    scores.push_back(std::move(s));
  }
  return scores;
}

double impure_fraction(const std::vector<DecodeResult>& results) {
  int64_t impure = 0, counted = 0;
  for (const auto& r : results) {
    if (r.word_accents.empty()) continue;
    std::set<std::string> accents(r.word_accents.begin(), r.word_accents.end());
    counted++;
    if (accents.size() >= 2) impure++;
  }
  return counted ? static_cast<double>(impure) / static_cast<double>(counted) : 0.0;
}

namespace {

struct PipelineContext {
  const RunConfig& config;
  EventLog& log;
  fs::path out;
  CorpusSpec spec;
  Corpus corpus;
  bool has_truth = false;
  std::vector<std::string> vocab;
  std::vector<AccentId> accents;
  std::vector<std::string> accent_codes;
  Lexicon training_lex, mono_lex, multi_lex;
  NGramModel lm_mono, lm_multi;
};

std::vector<const LexiconEntry*> expand_transcript(
    const std::unordered_map<std::string, const LexiconEntry*>& lookup,
    const std::vector<std::string>& words, const std::string& accent) {
  std::vector<const LexiconEntry*> out;
  out.reserve(words.size());
  for (const auto& w : words) {
    auto it = lookup.find(tag_word(lowercase(w), accent));
    if (it == lookup.end())
      throw ValidationError("transcript word \"" + w + "\" (" + accent +
                            ") is missing from the training lexicon");
    out.push_back(it->second);
  }
  return out;
}

MethodEval evaluate_method(const std::string& name, const std::vector<DecodeResult>& results,
                           const CorpusSplit& gold, const PipelineContext& ctx) {
  MethodEval eval;
  eval.method = name;
  LexiconKind mode = results.empty() ? LexiconKind::kMonoJointDecode : results.front().mode;
  eval.decisions = decide_accents(results, mode, ctx.config.granularity);
  for (const auto& d : eval.decisions)
    if (d.accent.empty()) eval.undecidable++;

  std::map<std::string, std::string> gold_accents;
  for (const auto& u : gold.utts) gold_accents[u.id] = u.accent_code;

  auto scores = build_scores(results, gold);
  eval.wer = wer_report(scores, ctx.accent_codes);
  eval.acc = accent_accuracy(eval.decisions, gold_accents, ctx.accent_codes,
                             ctx.config.excluded_accents);
  eval.conf = confusion(eval.decisions, gold_accents, ctx.accent_codes,
                        ctx.config.excluded_accents);
  check_confusion_consistency(eval.conf, eval.acc);
  eval.ranking = word_accent_ranking(scores, ctx.config.ranking_min_count,
                                     ctx.config.ranking_top_k);
  eval.impure_rate = impure_fraction(results);
  return eval;
}

json method_report_json(const MethodEval& eval, const CorpusStatsReport& stats) {
  return {{"wer", wer_to_json(eval.wer)},
          {"acc", accuracy_to_json(eval.acc)},
          {"confusion", confusion_to_json(eval.conf)},
          {"word_ranking", ranking_to_json(eval.ranking)},
          {"corpus_stats", corpus_stats_to_json(stats)},
          {"impure_rate", eval.impure_rate},
          {"undecidable", eval.undecidable}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

}  // namespace

RunAllResult run_all(const RunConfig& config, EventLog& log) {
  if (config.out_dir.empty()) throw ValidationError("run-all needs an output directory");
  PipelineContext ctx{config, log, fs::path(config.out_dir), config.spec, {}, false};
  fs::create_directories(ctx.out);
  ensure_writable((ctx.out / "report" / "report.json").string(), config.force);

  // Corpus.
  if (!config.corpus_dir.empty()) {
    ctx.corpus = load_corpus(config.corpus_dir);
    if (corpus_has_spec(config.corpus_dir)) {
      ctx.spec = load_corpus_spec(config.corpus_dir);
    } else {
      std::set<std::string> words, accents;
      for (const auto& u : ctx.corpus.train.utts) {
        accents.insert(u.accent_code);
        for (const auto& w : u.words) words.insert(lowercase(w));
      }
      ctx.spec.vocab.assign(words.begin(), words.end());
      ctx.spec.accents.clear();
      for (const auto& a : accents) ctx.spec.accents.push_back({a, a});
    }
    log.event("corpus-loaded", {{"dir", config.corpus_dir},
                                {"train_utts", ctx.corpus.train.utts.size()},
                                {"eval_utts", ctx.corpus.split(config.eval_split).utts.size()}});
  } else {
    if (ctx.spec.vocab.empty()) ctx.spec.vocab = default_vocab(100);
    ctx.corpus = generate_corpus(ctx.spec);
    ctx.has_truth = true;
    save_corpus(ctx.corpus, ctx.spec, (ctx.out / "corpus").string());
    log.event("corpus-generated", {{"train_utts", ctx.corpus.train.utts.size()},
                                   {"accent_shift", ctx.spec.accent_shift},
                                   {"seed", ctx.spec.seed}});
  }
  ctx.vocab = ctx.spec.vocab;
  ctx.accents = ctx.spec.accents;
  for (const auto& a : ctx.accents) ctx.accent_codes.push_back(a.code);

  RunAllResult result;
  result.accents = ctx.accent_codes;
  result.stats = corpus_stats(ctx.corpus);

  const CorpusSplit& eval_split = ctx.corpus.split(config.eval_split);
  if (eval_split.utts.empty())
    throw ValidationError("evaluation split \"" + config.eval_split + "\" is empty");

  if (ctx.has_truth) {
    result.oracle_frame_accuracy = nearest_mean_frame_accuracy(ctx.spec, eval_split);
    log.event("oracle-frame-accuracy", {{"value", result.oracle_frame_accuracy}});
  }

  // Lexicons.
  fs::create_directories(ctx.out / "lexicons");
  Lexicon base_lex = build_base_lexicon(ctx.vocab, ctx.spec.alphabet);
  ctx.training_lex = build_training_lexicon(ctx.vocab, ctx.accents, ctx.spec.alphabet);
  ctx.mono_lex = build_mono_decode_lexicon(ctx.vocab, ctx.accents, ctx.spec.alphabet);
  ctx.multi_lex = build_multi_decode_lexicon(ctx.vocab, ctx.accents, ctx.spec.alphabet);
  write_accent_inventory(ctx.accents, (ctx.out / "lexicons" / "accents.txt").string());
  write_lexicon(base_lex, (ctx.out / "lexicons" / "base.txt").string());
  write_lexicon(ctx.training_lex, (ctx.out / "lexicons" / "training.txt").string());
  write_lexicon(ctx.mono_lex, (ctx.out / "lexicons" / "mono_decode.txt").string());
  write_lexicon(ctx.multi_lex, (ctx.out / "lexicons" / "multi_decode.txt").string());
  log.event("lexicons-built", {{"vocab", ctx.vocab.size()},
                               {"accents", ctx.accents.size()},
                               {"training_entries", ctx.training_lex.entries.size()}});

  // Language models.
  fs::create_directories(ctx.out / "lm");
  TextCorpus train_text = split_text(ctx.corpus.train);
  LmConfig lm_config{config.unk_pseudocount};
  ctx.lm_mono = train_trigram(train_text, LmMode::kMono, lm_config);
  ctx.lm_multi = train_trigram(train_text, LmMode::kMulti, lm_config);
  write_arpa_file(ctx.lm_mono, (ctx.out / "lm" / "mono.arpa").string());
  write_arpa_file(ctx.lm_multi, (ctx.out / "lm" / "multi.arpa").string());
  auto audit = audit_cross_accent(ctx.lm_multi);
  result.lm_cross_accent_violations = audit.violations;
  double ppl_mono = perplexity(ctx.lm_mono, train_text, LmMode::kMono);
  double ppl_multi = perplexity(ctx.lm_multi, train_text, LmMode::kMulti);
  log.event("lm-trained", {{"mono_ppl", ppl_mono},
                           {"multi_ppl", ppl_multi},
                           {"cross_accent_ngrams", audit.violations}});

  // Acoustic model units and training corpus.
  std::set<std::string> unit_set;
  for (const auto& e : ctx.training_lex.entries)
    for (const auto& g : e.pron) unit_set.insert(g.str());
  unit_set.insert(kSilenceUnit);
  std::vector<std::string> units(unit_set.begin(), unit_set.end());

  GlobalStats gstats;
  for (const auto& u : ctx.corpus.train.utts) gstats.accumulate(u.feats);

  std::unordered_map<std::string, const LexiconEntry*> train_lookup;
  for (const auto& e : ctx.training_lex.entries) train_lookup[e.word] = &e;
  std::vector<TrainUtterance> train_utts;
  train_utts.reserve(ctx.corpus.train.utts.size());
  for (const auto& u : ctx.corpus.train.utts)
    train_utts.push_back({&u.feats, expand_transcript(train_lookup, u.words, u.accent_code)});

  // Decode specs shared across the sweep.
  DecodeGraphSpec mono_spec{&ctx.mono_lex, &ctx.lm_mono, config.optional_silence,
                            config.lm_scale, config.word_insertion_penalty,
                            config.silence_logprob};
  DecodeGraphSpec multi_spec{&ctx.multi_lex, &ctx.lm_multi, config.optional_silence,
                             config.lm_scale, config.word_insertion_penalty,
                             config.silence_logprob};
  DecodeOptions opts{config.beam, config.max_active};
  std::vector<FeatureMatrix> eval_feats;
  for (const auto& u : eval_split.utts) eval_feats.push_back(u.feats);

  fs::create_directories(ctx.out / "am");
  fs::create_directories(ctx.out / "decode");
  fs::create_directories(ctx.out / "decisions");
  fs::create_directories(ctx.out / "report");

  if (config.density_sweep.empty()) throw ValidationError("density sweep list is empty");

  bool first_entry = true;
  for (int components : config.density_sweep) {
    FlatStartConfig flat{ctx.spec.dim, 3, config.variance_floor};
    AcousticModel am0 = flat_start(units, flat, &gstats);

    TrainConfig train_config;
    train_config.iterations = config.am_iterations;
    train_config.mixup_iterations = mixup_schedule(config.am_iterations, components);
    train_config.variance_floor = config.variance_floor;
    train_config.optional_silence = config.optional_silence;
    train_config.silence_logprob = config.silence_logprob;
    TrainStats tstats;
    AcousticModel am = train_em(am0, train_utts, train_config, &tstats);
    std::string am_path = (ctx.out / "am" / ("am_c" + std::to_string(components) + ".bin")).string();
    write_acoustic_model(am, am_path);
    for (const auto& w : tstats.warnings) log.event("train-warning", {{"message", w}});
    log.event("am-trained", {{"components", components},
                             {"total_densities", am.total_densities()},
                             {"final_loglik", tstats.iteration_loglik.back()}});

    auto mono_results = decode_batch(am, mono_spec, eval_feats, opts);
    auto multi_results = decode_batch(am, multi_spec, eval_feats, opts);
    std::string tag = "_c" + std::to_string(components);
    write_decodes_jsonl(mono_results, (ctx.out / "decode" / ("mono" + tag + ".jsonl")).string());
    write_decodes_jsonl(multi_results, (ctx.out / "decode" / ("multi" + tag + ".jsonl")).string());

    MethodEval mono_eval = evaluate_method("Mono-joint", mono_results, eval_split, ctx);
    MethodEval multi_eval = evaluate_method("Multi-joint", multi_results, eval_split, ctx);
    write_decisions(mono_eval.decisions, (ctx.out / "decisions" / ("mono" + tag + ".tsv")).string());
    write_decisions(multi_eval.decisions,
                    (ctx.out / "decisions" / ("multi" + tag + ".tsv")).string());

    SweepEntry entry;
    entry.components = components;
    entry.total_densities = am.total_densities();
    entry.mono_wer = mono_eval.wer.pooled.percent();
    entry.mono_acc = mono_eval.acc.pooled_percent();
    entry.multi_wer = multi_eval.wer.pooled.percent();
    entry.multi_acc = multi_eval.acc.pooled_percent();
    result.sweep.push_back(entry);
    log.event("sweep-point", {{"components", components},
                              {"mono_wer", entry.mono_wer},
                              {"mono_acc", entry.mono_acc},
                              {"multi_wer", entry.multi_wer},
                              {"multi_acc", entry.multi_acc}});

    if (first_entry) {
      result.mono = std::move(mono_eval);
      result.multi = std::move(multi_eval);
      first_entry = false;
    }
  }

  // Reports.
  json report;
  report["corpus_stats"] = corpus_stats_to_json(result.stats);
  report["oracle_frame_accuracy"] = result.oracle_frame_accuracy;
  report["lm"] = {{"cross_accent_violations", result.lm_cross_accent_violations},
                  {"mono_train_perplexity", ppl_mono},
                  {"multi_train_perplexity", ppl_multi}};
  report["methods"]["mono-joint"] = method_report_json(result.mono, result.stats);
  report["methods"]["multi-joint"] = method_report_json(result.multi, result.stats);
  json sweep = json::array();
  for (const auto& e : result.sweep)
    sweep.push_back({{"components", e.components},
                     {"total_densities", e.total_densities},
                     {"mono_wer", e.mono_wer},
                     {"mono_acc", e.mono_acc},
                     {"multi_wer", e.multi_wer},
                     {"multi_acc", e.multi_acc}});
  report["sweep"] = sweep;
  report["eval_split"] = config.eval_split;
  write_text(ctx.out / "report" / "report.json", report.dump(2) + "\n");

  write_text(ctx.out / "report" / "score_mono-joint.json",
             method_report_json(result.mono, result.stats).dump(2) + "\n");
  write_text(ctx.out / "report" / "score_multi-joint.json",
             method_report_json(result.multi, result.stats).dump(2) + "\n");

  std::vector<MethodRow> rows = {{result.mono.method, result.mono.wer, result.mono.acc},
                                 {result.multi.method, result.multi.wer, result.multi.acc}};
  std::string comparison = render_comparison(rows, result.accents);
  write_text(ctx.out / "report" / "comparison.txt", comparison);
  write_text(ctx.out / "report" / "confusion_mono.txt", render_confusion(result.mono.conf));
  write_text(ctx.out / "report" / "confusion_multi.txt", render_confusion(result.multi.conf));
  write_text(ctx.out / "report" / "ranking_mono.txt", render_ranking(result.mono.ranking));
  write_text(ctx.out / "report" / "ranking_multi.txt", render_ranking(result.multi.ranking));
  write_text(ctx.out / "report" / "corpus_stats.txt", render_corpus_stats(result.stats));

  std::ostringstream sweep_txt;
  sweep_txt << "#PDF (total densities) sweep\n";
  sweep_txt << "components  densities  mono WER%  mono ACC%  multi WER%  multi ACC%\n";
  for (const auto& e : result.sweep) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%10d  %9lld  %9.2f  %9.2f  %10.2f  %10.2f\n", e.components,
                  static_cast<long long>(e.total_densities), e.mono_wer, e.mono_acc, e.multi_wer,
                  e.multi_acc);
    sweep_txt << buf;
  }
  write_text(ctx.out / "report" / "sweep.txt", sweep_txt.str());

  log.event("run-all-done", {{"mono_wer", result.mono.wer.pooled.percent()},
                             {"mono_acc", result.mono.acc.pooled_percent()},
                             {"multi_wer", result.multi.wer.pooled.percent()},
                             {"multi_acc", result.multi.acc.pooled_percent()},
                             {"mono_impure", result.mono.impure_rate},
                             {"multi_impure", result.multi.impure_rate}});
  return result;
}

}  // namespace accentasr
