#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "accentasr/pipeline.hpp"
#include "accentasr/report_io.hpp"

using namespace accentasr;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

RunConfig tiny_config(const fs::path& out) {
  RunConfig config;
  config.spec.accents = {{"UK", "British"}, {"US", "American"}, {"CHN", "Chinese"}};
  config.spec.vocab = {"go", "home", "red", "blue", "water", "stone"};
  config.spec.train_utts_per_accent = 25;
  config.spec.dev_utts_per_accent = 8;
  config.spec.test_utts_per_accent = 2;
  config.spec.words_per_utt_mean = 3.0;
  config.spec.accent_shift = 1.2;
  config.spec.seed = 31337;
  config.am_iterations = 4;
  config.lm_scale = 4.0;
  config.ranking_min_count = 2;
  config.out_dir = out.string();
  return config;
}

}  // namespace

TEST_CASE("run_all produces a consistent comparison on a tiny corpus") {
  auto out = fs::temp_directory_path() / "accentasr-pipeline-test";
  fs::remove_all(out);
  auto config = tiny_config(out);
  fs::create_directories(out);
  EventLog log((out / "log.jsonl").string(), /*mirror=*/false);
  auto result = run_all(config, log);

  CHECK(result.lm_cross_accent_violations == 0);
  CHECK(result.oracle_frame_accuracy > 0.9);
  CHECK(result.mono.acc.pooled_total == 24);
  CHECK(result.multi.acc.pooled_total == 24);
  // Separable corpus: both methods should be far above 1/3 chance.
  CHECK(result.mono.acc.pooled_percent() > 60.0);
  CHECK(result.multi.acc.pooled_percent() > 60.0);

  // Comparison report contains both methods, all accents, WER and ACC.
  std::ifstream cmp(out / "report" / "comparison.txt");
  std::string text((std::istreambuf_iterator<char>(cmp)), std::istreambuf_iterator<char>());
  for (const char* needle : {"Mono-joint", "Multi-joint", "UK", "US", "CHN", "AVE",
                             "Speech WER", "Accent Recognition ACC"})
    CHECK(text.find(needle) != std::string::npos);

  // The JSON report parses and carries every section.
  std::ifstream rf(out / "report" / "report.json");
  json report = json::parse(rf);
  CHECK(report.contains("corpus_stats"));
  CHECK(report["methods"].contains("mono-joint"));
  CHECK(report["methods"].contains("multi-joint"));
  CHECK(report["lm"]["cross_accent_violations"].get<int>() == 0);
  CHECK(report["sweep"].size() == 1);

  // Structured log lines all parse as JSON.
  std::ifstream lf(out / "log.jsonl");
  std::string line;
  int events = 0;
  while (std::getline(lf, line)) {
    if (line.empty()) continue;
    auto j = json::parse(line);
    CHECK(j.contains("event"));
    ++events;
  }
  CHECK(events >= 5);

  // Decode JSONL and decisions round trip through their files.
  auto decodes = read_decodes_jsonl((out / "decode" / "multi_c1.jsonl").string());
  CHECK(decodes.size() == 24);
  for (const auto& r : decodes) CHECK(r.mode == LexiconKind::kMultiJointDecode);
  auto decisions = read_decisions((out / "decisions" / "multi_c1.tsv").string());
  CHECK(decisions.size() == 24);

  // Refuses to overwrite without force, runs again with it.
  CHECK_THROWS_AS(run_all(config, log), ValidationError);
  config.force = true;
  auto again = run_all(config, log);
  CHECK(again.mono.acc.pooled_percent() == result.mono.acc.pooled_percent());
  CHECK(again.multi.wer.pooled.percent() == result.multi.wer.pooled.percent());

  fs::remove_all(out);
}

TEST_CASE("mixup schedules reach the requested component counts") {
  CHECK(mixup_schedule(8, 1).empty());
  CHECK(mixup_schedule(8, 2) == std::vector<int>{7});
  CHECK(mixup_schedule(8, 4) == std::vector<int>{5, 7});
  CHECK_THROWS_AS(mixup_schedule(8, 3), ValidationError);
  CHECK_THROWS_AS(mixup_schedule(2, 4), ValidationError);
}

TEST_CASE("impure fraction counts multi-accent decodes") {
  DecodeResult pure;
  pure.words = {"a_US", "b_US"};
  pure.word_accents = {"US", "US"};
  DecodeResult mixed;
  mixed.words = {"a_US", "b_UK"};
  mixed.word_accents = {"US", "UK"};
  DecodeResult empty;
  CHECK(impure_fraction({pure, mixed, empty}) == doctest::Approx(0.5));
  CHECK(impure_fraction({pure}) == doctest::Approx(0.0));
}
