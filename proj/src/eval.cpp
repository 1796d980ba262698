#include "accentasr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace accentasr {

std::vector<WerAlignOp> wer_alignment(const std::vector<std::string>& ref,
                                      const std::vector<std::string>& hyp) {
  const int n = static_cast<int>(ref.size());
  const int m = static_cast<int>(hyp.size());
  // dist[i][j]: edit distance between ref[0..i) and hyp[0..j)
  std::vector<int> dist(static_cast<size_t>(n + 1) * (m + 1));
  auto at = [&](int i, int j) -> int& { return dist[static_cast<size_t>(i) * (m + 1) + j]; };
  for (int i = 0; i <= n; ++i) at(i, 0) = i;
  for (int j = 0; j <= m; ++j) at(0, j) = j;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= m; ++j) {
      int sub = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      int del = at(i - 1, j) + 1;
      int ins = at(i, j - 1) + 1;
      at(i, j) = std::min({sub, del, ins});
    }
  }
  std::vector<WerAlignOp> ops;
  int i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        at(i, j) == at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      ops.push_back({ref[i - 1] == hyp[j - 1] ? WerAlignOp::kMatch : WerAlignOp::kSub, i - 1, j - 1});
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ops.push_back({WerAlignOp::kDel, i - 1, -1});
      --i;
    } else {
      ops.push_back({WerAlignOp::kIns, -1, j - 1});
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

WerCounts wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  WerCounts counts;
  counts.ref_words = static_cast<int64_t>(ref.size());
  for (const auto& op : wer_alignment(ref, hyp)) {
    switch (op.kind) {
      case WerAlignOp::kSub: counts.sub++; break;
      case WerAlignOp::kDel: counts.del++; break;
      case WerAlignOp::kIns: counts.ins++; break;
      case WerAlignOp::kMatch: break;
    }
  }
  return counts;
}

static void check_untagged(const std::vector<std::string>& words, const std::string& what,
                           const std::string& id) {
  for (const auto& w : words)
    if (w.find('_') != std::string::npos)
      throw ValidationError(what + " token \"" + w + "\" in utterance \"" + id +
                            "\" still carries a tag; strip before scoring");
}

WerReport wer_report(const std::vector<UttScore>& utts,
                     const std::vector<std::string>& accent_order) {
  WerReport report;
  report.accents = accent_order;
  for (const auto& a : accent_order) report.per_accent[a];
  for (const auto& u : utts) {
    check_untagged(u.ref, "reference", u.id);
    check_untagged(u.hyp, "hypothesis", u.id);
    WerCounts c = wer(u.ref, u.hyp);
    report.per_accent[u.gold_accent] += c;
    report.pooled += c;
  }
  return report;
}

double AccuracyReport::percent(const std::string& accent) const {
  auto t = total.find(accent);
  if (t == total.end() || t->second == 0) return std::nan("");
  return 100.0 * static_cast<double>(correct.at(accent)) / static_cast<double>(t->second);
}

double AccuracyReport::pooled_percent() const {
  if (pooled_total == 0) return std::nan("");
  return 100.0 * static_cast<double>(pooled_correct) / static_cast<double>(pooled_total);
}

double AccuracyReport::mean_of_means_percent() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& a : accents) {
    double p = percent(a);
    if (!std::isnan(p)) {
      sum += p;
      ++n;
    }
  }
  return n ? sum / n : std::nan("");
}

AccuracyReport accent_accuracy(const std::vector<AccentDecision>& decisions,
                               const std::map<std::string, std::string>& gold,
                               const std::vector<std::string>& accent_order,
                               const std::vector<std::string>& excluded) {
  std::set<std::string> skip(excluded.begin(), excluded.end());
  AccuracyReport report;
  for (const auto& a : accent_order)
    if (!skip.count(a)) report.accents.push_back(a);

  std::vector<std::string> missing;
  for (const auto& d : decisions) {
    auto g = gold.find(d.utterance_id);
    if (g == gold.end()) {
      missing.push_back(d.utterance_id);
      continue;
    }
    if (skip.count(g->second)) continue;
    report.total[g->second]++;
    report.pooled_total++;
    if (d.tied) report.ties++;
    if (d.accent.empty()) {
      report.undecided++;
    } else if (d.accent == g->second) {
      report.correct[g->second]++;
      report.pooled_correct++;
    }
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    throw ValidationError("utterances without a gold accent: " + join(missing, ", "));
  }
  for (const auto& a : report.accents) {
    report.total.try_emplace(a, 0);
    report.correct.try_emplace(a, 0);
  }
  return report;
}

ConfusionReport confusion(const std::vector<AccentDecision>& decisions,
                          const std::map<std::string, std::string>& gold,
                          const std::vector<std::string>& accent_order,
                          const std::vector<std::string>& excluded) {
  std::set<std::string> skip(excluded.begin(), excluded.end());
  ConfusionReport report;
  for (const auto& a : accent_order)
    if (!skip.count(a)) report.accents.push_back(a);
  const size_t k = report.accents.size();
  std::map<std::string, size_t> col;
  for (size_t i = 0; i < k; ++i) col[report.accents[i]] = i;

  std::vector<std::vector<int64_t>> counts(k, std::vector<int64_t>(k + 1, 0));
  std::vector<std::string> missing;
  for (const auto& d : decisions) {
    auto g = gold.find(d.utterance_id);
    if (g == gold.end()) {
      missing.push_back(d.utterance_id);
      continue;
    }
    if (skip.count(g->second)) continue;
    auto row = col.find(g->second);
    if (row == col.end()) continue;  // gold accent outside the scored inventory
    auto c = col.find(d.accent);
    if (d.accent.empty() || c == col.end()) {
      counts[row->second][k]++;  // undecided or out-of-inventory prediction
      report.has_none_column = true;
    } else {
      counts[row->second][c->second]++;
    }
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    throw ValidationError("utterances without a gold accent: " + join(missing, ", "));
  }

  report.rows.assign(k, std::vector<double>(k + 1, std::nan("")));
  report.row_totals.assign(k, 0);
  for (size_t r = 0; r < k; ++r) {
    int64_t total = 0;
    for (int64_t v : counts[r]) total += v;
    report.row_totals[r] = total;
    if (total == 0) continue;  // undefined row markers stay NaN
    for (size_t c = 0; c <= k; ++c)
      report.rows[r][c] = 100.0 * static_cast<double>(counts[r][c]) / static_cast<double>(total);
  }
  return report;
}

void check_confusion_consistency(const ConfusionReport& conf, const AccuracyReport& acc,
                                 double tol) {
  for (size_t r = 0; r < conf.accents.size(); ++r) {
    if (conf.row_totals[r] == 0) continue;
    double sum = 0.0;
    for (double v : conf.rows[r]) sum += v;
    if (std::abs(sum - 100.0) > tol)
      throw ValidationError("confusion row " + conf.accents[r] + " sums to " +
                            std::to_string(sum) + ", expected 100");
    double diag = conf.rows[r][r];
    double pct = acc.percent(conf.accents[r]);
    if (std::isnan(pct) || std::abs(diag - pct) > tol)
      throw ValidationError("confusion diagonal for " + conf.accents[r] +
                            " disagrees with per-accent accuracy: " + std::to_string(diag) +
                            " vs " + std::to_string(pct));
  }
}

WordRanking word_accent_ranking(const std::vector<UttScore>& utts, int min_count, int top_k) {
  if (min_count < 1) throw ValidationError("min_count must be at least 1");
  std::map<std::string, WordAccentStat> tally;
  for (const auto& u : utts) {
    for (const auto& op : wer_alignment(u.ref, u.hyp)) {
      if (op.kind != WerAlignOp::kMatch) continue;
      auto& stat = tally[u.ref[op.ref_pos]];
      stat.word = u.ref[op.ref_pos];
      stat.occurrences++;
      if (op.hyp_pos < static_cast<int>(u.hyp_accents.size()) &&
          u.hyp_accents[op.hyp_pos] == u.gold_accent)
        stat.accent_correct++;
    }
  }

  WordRanking ranking;
  for (const auto& [w, stat] : tally)
    if (stat.occurrences >= min_count) ranking.stats.push_back(stat);
  if (ranking.stats.empty()) {
    ranking.empty_warning = true;
    return ranking;
  }

  auto by_acc_desc = [](const WordAccentStat& a, const WordAccentStat& b) {
    if (a.accuracy() != b.accuracy()) return a.accuracy() > b.accuracy();
    return a.word < b.word;
  };
  auto by_acc_asc = [](const WordAccentStat& a, const WordAccentStat& b) {
    if (a.accuracy() != b.accuracy()) return a.accuracy() < b.accuracy();
    return a.word < b.word;
  };
  std::vector<WordAccentStat> sorted = ranking.stats;
  std::sort(sorted.begin(), sorted.end(), by_acc_desc);
  size_t k = std::min<size_t>(top_k, sorted.size());
  ranking.top.assign(sorted.begin(), sorted.begin() + k);
  std::sort(sorted.begin(), sorted.end(), by_acc_asc);
  ranking.bottom.assign(sorted.begin(), sorted.begin() + k);

  auto avg_len = [](const std::vector<WordAccentStat>& v) {
    if (v.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& s : v) sum += static_cast<double>(s.word.size());
    return sum / static_cast<double>(v.size());
  };
  ranking.top_avg_length = avg_len(ranking.top);
  ranking.bottom_avg_length = avg_len(ranking.bottom);
  return ranking;
}

SplitStats split_stats(const CorpusSplit& split) {
  SplitStats stats;
  stats.name = split.name;
  stats.utterances = static_cast<int64_t>(split.utts.size());
  double total_seconds = 0.0;
  int64_t total_words = 0;
  for (const auto& u : split.utts) {
    double sec = u.feats.seconds();
    total_seconds += sec;
    total_words += static_cast<int64_t>(u.words.size());
    size_t bin = static_cast<size_t>(sec);
    if (stats.length_histogram.size() <= bin) stats.length_histogram.resize(bin + 1, 0);
    stats.length_histogram[bin]++;
  }
  stats.hours = total_seconds / 3600.0;
  if (stats.utterances > 0) {
    stats.avg_words = static_cast<double>(total_words) / static_cast<double>(stats.utterances);
    stats.avg_seconds = total_seconds / static_cast<double>(stats.utterances);
  }
  return stats;
}

CorpusStatsReport corpus_stats(const Corpus& corpus) {
  CorpusStatsReport report;
  report.splits.push_back(split_stats(corpus.train));
  report.splits.push_back(split_stats(corpus.dev));
  report.splits.push_back(split_stats(corpus.test));
  return report;
}

}  // namespace accentasr
