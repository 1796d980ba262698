#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "accentasr/features.hpp"

using namespace accentasr;

namespace {
FeatureMatrix make_feats(const std::string& id, int frames, int dim, uint64_t seed) {
  FeatureMatrix f;
  f.utterance_id = id;
  f.num_frames = frames;
  f.dim = dim;
  Rng rng(seed);
  for (int i = 0; i < frames * dim; ++i) f.data.push_back(static_cast<float>(rng.gaussian()));
  return f;
}
}  // namespace

TEST_CASE("feature archive round trips bit-exactly") {
  auto dir = std::filesystem::temp_directory_path() / "accentasr-feats-test";
  std::filesystem::create_directories(dir);
  auto path = (dir / "feats.bin").string();

  std::vector<FeatureMatrix> feats = {make_feats("utt-1", 5, 13, 1), make_feats("utt-2", 9, 13, 2),
                                      make_feats("x", 1, 13, 3)};
  write_feature_archive(feats, path);
  auto back = read_feature_archive(path);
  REQUIRE(back.size() == feats.size());
  for (size_t i = 0; i < feats.size(); ++i) CHECK(back[i] == feats[i]);
  std::filesystem::remove_all(dir);
}

TEST_CASE("feature archive rejects wrong magic") {
  auto dir = std::filesystem::temp_directory_path() / "accentasr-feats-test2";
  std::filesystem::create_directories(dir);
  auto path = (dir / "bogus.bin").string();
  std::ofstream(path) << "NOTFEATS";
  CHECK_THROWS_AS(read_feature_archive(path), ParseError);
  std::filesystem::remove_all(dir);
}
