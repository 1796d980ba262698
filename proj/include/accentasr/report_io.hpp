#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "accentasr/decoder.hpp"
#include "accentasr/eval.hpp"

namespace accentasr {

// One JSON record per utterance per line.
void write_decodes_jsonl(const std::vector<DecodeResult>& results, const std::string& path);
std::vector<DecodeResult> read_decodes_jsonl(const std::string& path);

// "utterance-id<TAB>accent-code<TAB>tied(0/1)"; "-" marks undecided.
void write_decisions(const std::vector<AccentDecision>& decisions, const std::string& path);
std::vector<AccentDecision> read_decisions(const std::string& path);

nlohmann::json wer_to_json(const WerReport& report);
nlohmann::json accuracy_to_json(const AccuracyReport& report);
nlohmann::json confusion_to_json(const ConfusionReport& report);
nlohmann::json ranking_to_json(const WordRanking& ranking);
nlohmann::json corpus_stats_to_json(const CorpusStatsReport& report);

std::string render_corpus_stats(const CorpusStatsReport& report);
std::string render_confusion(const ConfusionReport& report);
std::string render_ranking(const WordRanking& ranking);

// Side-by-side WER / ACC rows per method, one column per accent plus the
// pooled average up front.
struct MethodRow {
  std::string method;
  WerReport wer;
  AccuracyReport acc;
};
std::string render_comparison(const std::vector<MethodRow>& rows,
                              const std::vector<std::string>& accents);

}  // namespace accentasr
