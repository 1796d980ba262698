#include "accentasr/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace accentasr {

static const char* mode_name(LexiconKind mode) {
  return mode == LexiconKind::kMultiJointDecode ? "multi-joint" : "mono-joint";
}

void write_decodes_jsonl(const std::vector<DecodeResult>& results, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write decode output: " + path);
  for (const auto& r : results) {
    json j;
    j["id"] = r.utterance_id;
    j["mode"] = mode_name(r.mode);
    if (r.mode == LexiconKind::kMultiJointDecode) {
      json words = json::array();
      for (const auto& w : r.words) words.push_back(strip_tags(w));
      j["words"] = words;
      j["tagged_words"] = r.words;
    } else {
      j["words"] = r.words;
      j["word_accents"] = r.word_accents;
    }
    j["pron_indices"] = r.pron_indices;
    json phones = json::array();
    for (const auto& p : r.phones)
      phones.push_back({{"unit", p.unit}, {"start", p.start}, {"end", p.end}, {"word", p.word_index}});
    j["phones"] = phones;
    j["total_log_score"] = r.total_log_score;
    out << j.dump() << '\n';
  }
}

std::vector<DecodeResult> read_decodes_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open decode output: " + path);
  std::vector<DecodeResult> results;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    DecodeResult r;
    r.utterance_id = j.at("id").get<std::string>();
    std::string mode = j.at("mode").get<std::string>();
    r.mode = mode == "multi-joint" ? LexiconKind::kMultiJointDecode : LexiconKind::kMonoJointDecode;
    if (r.mode == LexiconKind::kMultiJointDecode) {
      r.words = j.at("tagged_words").get<std::vector<std::string>>();
      for (const auto& w : r.words) {
        auto pos = w.find('_');
        r.word_accents.push_back(pos == std::string::npos ? "" : w.substr(pos + 1));
      }
    } else {
      r.words = j.at("words").get<std::vector<std::string>>();
      r.word_accents = j.at("word_accents").get<std::vector<std::string>>();
    }
    if (j.contains("pron_indices")) r.pron_indices = j.at("pron_indices").get<std::vector<int>>();
    for (const auto& p : j.at("phones"))
      r.phones.push_back({p.at("unit").get<std::string>(), p.at("start").get<int>(),
                          p.at("end").get<int>(), p.at("word").get<int>()});
    r.total_log_score = j.at("total_log_score").get<double>();
    results.push_back(std::move(r));
  }
  return results;
}

void write_decisions(const std::vector<AccentDecision>& decisions, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write accent decisions: " + path);
  for (const auto& d : decisions)
    out << d.utterance_id << '\t' << (d.accent.empty() ? "-" : d.accent) << '\t'
        << (d.tied ? 1 : 0) << '\n';
}

std::vector<AccentDecision> read_decisions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open accent decisions: " + path);
  std::vector<AccentDecision> decisions;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3)
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected utt<TAB>accent<TAB>tied");
    AccentDecision d;
    d.utterance_id = fields[0];
    d.accent = fields[1] == "-" ? "" : fields[1];
    d.tied = fields[2] == "1";
    decisions.push_back(std::move(d));
  }
  return decisions;
}

// ---------------------------------------------------------------------------
// JSON report fragments
// ---------------------------------------------------------------------------

static json wer_counts_to_json(const WerCounts& c) {
  return {{"sub", c.sub},       {"del", c.del},           {"ins", c.ins},
          {"ref_words", c.ref_words}, {"wer_percent", c.percent()}};
}

json wer_to_json(const WerReport& report) {
  json per;
  for (const auto& a : report.accents) per[a] = wer_counts_to_json(report.per_accent.at(a));
  return {{"per_accent", per}, {"pooled", wer_counts_to_json(report.pooled)}};
}

json accuracy_to_json(const AccuracyReport& report) {
  json per;
  for (const auto& a : report.accents) {
    double p = report.percent(a);
    per[a] = {{"correct", report.correct.at(a)},
              {"total", report.total.at(a)},
              {"acc_percent", std::isnan(p) ? json() : json(p)}};
  }
  return {{"per_accent", per},
          {"pooled_percent", report.pooled_percent()},
          {"mean_of_means_percent", report.mean_of_means_percent()},
          {"pooled_correct", report.pooled_correct},
          {"pooled_total", report.pooled_total},
          {"ties", report.ties},
          {"undecided", report.undecided},
          {"averaging", "pooled"}};
}

json confusion_to_json(const ConfusionReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r = json::array();
    for (double v : row) r.push_back(std::isnan(v) ? json() : json(v));
    rows.push_back(r);
  }
  json cols = report.accents;
  if (report.has_none_column) cols.push_back("(none)");
  return {{"accents", report.accents},
          {"columns", cols},
          {"rows_percent", rows},
          {"row_totals", report.row_totals}};
}

json ranking_to_json(const WordRanking& ranking) {
  auto list = [](const std::vector<WordAccentStat>& v) {
    json out = json::array();
    for (const auto& s : v)
      out.push_back({{"word", s.word},
                     {"occurrences", s.occurrences},
                     {"accent_correct", s.accent_correct},
                     {"accuracy", s.accuracy()},
                     {"length", s.word.size()}});
    return out;
  };
  return {{"top", list(ranking.top)},
          {"bottom", list(ranking.bottom)},
          {"top_avg_length", ranking.top_avg_length},
          {"bottom_avg_length", ranking.bottom_avg_length},
          {"eligible_words", ranking.stats.size()},
          {"empty_warning", ranking.empty_warning}};
}

json corpus_stats_to_json(const CorpusStatsReport& report) {
  json splits;
  for (const auto& s : report.splits)
    splits[s.name] = {{"utterances", s.utterances},
                      {"hours", s.hours},
                      {"avg_words_per_utt", s.avg_words},
                      {"avg_seconds_per_utt", s.avg_seconds},
                      {"length_histogram_1s_bins", s.length_histogram}};
  return splits;
}

// ---------------------------------------------------------------------------
// Text tables
// ---------------------------------------------------------------------------

static std::string fixed(double v, int prec = 2) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

static void row(std::ostringstream& out, const std::vector<std::string>& cells,
                const std::vector<int>& widths) {
  for (size_t i = 0; i < cells.size(); ++i) {
    out << (i ? "  " : "");
    int w = i < widths.size() ? widths[i] : 8;
    int pad = w - static_cast<int>(cells[i].size());
    for (int k = 0; k < pad; ++k) out << ' ';
    out << cells[i];
  }
  out << '\n';
}

std::string render_corpus_stats(const CorpusStatsReport& report) {
  std::ostringstream out;
  std::vector<int> widths = {22, 12, 12, 12};
  std::vector<std::string> header = {"", ""};
  header.clear();
  header.push_back("");
  for (const auto& s : report.splits) header.push_back(s.name);
  row(out, header, widths);
  auto line = [&](const std::string& label, auto get) {
    std::vector<std::string> cells = {label};
    for (const auto& s : report.splits) cells.push_back(get(s));
    row(out, cells, widths);
  };
  line("Total utts", [](const SplitStats& s) { return std::to_string(s.utterances); });
  line("Length (Hrs)", [](const SplitStats& s) { return fixed(s.hours); });
  line("Ave. word (per utt.)", [](const SplitStats& s) { return fixed(s.avg_words); });
  line("Ave. second (per utt.)", [](const SplitStats& s) { return fixed(s.avg_seconds); });
  return out.str();
}

std::string render_confusion(const ConfusionReport& report) {
  std::ostringstream out;
  std::vector<int> widths(report.accents.size() + 2, 7);
  widths[0] = 10;
  std::vector<std::string> header = {"true\\pred"};
  for (const auto& a : report.accents) header.push_back(a);
  if (report.has_none_column) header.push_back("(none)");
  row(out, header, widths);
  for (size_t r = 0; r < report.accents.size(); ++r) {
    std::vector<std::string> cells = {report.accents[r]};
    size_t cols = report.accents.size() + (report.has_none_column ? 1 : 0);
    for (size_t c = 0; c < cols; ++c) cells.push_back(fixed(report.rows[r][c]));
    row(out, cells, widths);
  }
  return out.str();
}

std::string render_ranking(const WordRanking& ranking) {
  std::ostringstream out;
  auto block = [&](const char* label, const std::vector<WordAccentStat>& v, double avg_len) {
    out << label << " (avg length " << fixed(avg_len, 1) << "):\n";
    for (const auto& s : v) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "  %-16s acc=%.3f  n=%lld\n", s.word.c_str(), s.accuracy(),
                    static_cast<long long>(s.occurrences));
      out << buf;
    }
  };
  if (ranking.empty_warning) {
    out << "no word met the occurrence threshold\n";
    return out.str();
  }
  block("most accurate", ranking.top, ranking.top_avg_length);
  block("least accurate", ranking.bottom, ranking.bottom_avg_length);
  return out.str();
}

std::string render_comparison(const std::vector<MethodRow>& rows,
                              const std::vector<std::string>& accents) {
  std::ostringstream out;
  std::vector<int> widths(accents.size() + 2, 7);
  widths[0] = 12;

  std::vector<std::string> header = {"Method", "AVE"};
  for (const auto& a : accents) header.push_back(a);

  out << "Speech WER (%)\n";
  row(out, header, widths);
  for (const auto& m : rows) {
    std::vector<std::string> cells = {m.method, fixed(m.wer.pooled.percent())};
    for (const auto& a : accents) cells.push_back(fixed(m.wer.per_accent.at(a).percent()));
    row(out, cells, widths);
  }
  out << "\nAccent Recognition ACC (%)\n";
  row(out, header, widths);
  for (const auto& m : rows) {
    std::vector<std::string> cells = {m.method, fixed(m.acc.pooled_percent())};
    for (const auto& a : accents) cells.push_back(fixed(m.acc.percent(a)));
    row(out, cells, widths);
  }
  return out.str();
}

}  // namespace accentasr
