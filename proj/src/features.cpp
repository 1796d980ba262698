#include "accentasr/features.hpp"

#include <cstring>
#include <fstream>

namespace accentasr {

static const char kMagic[6] = {'F', 'E', 'A', 'T', 'v', '1'};

template <typename T>
static void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
static bool get(std::istream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return static_cast<bool>(in);
}

void write_feature_archive(const std::vector<FeatureMatrix>& feats, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write feature archive: " + path);
  out.write(kMagic, sizeof(kMagic));
  for (const auto& f : feats) {
    if (f.num_frames < 1 || f.dim < 1 ||
        f.data.size() != static_cast<size_t>(f.num_frames) * f.dim)
      throw ValidationError("inconsistent feature matrix for utterance \"" + f.utterance_id + "\"");
    put<uint32_t>(out, static_cast<uint32_t>(f.utterance_id.size()));
    out.write(f.utterance_id.data(), static_cast<std::streamsize>(f.utterance_id.size()));
    put<uint32_t>(out, static_cast<uint32_t>(f.num_frames));
    put<uint32_t>(out, static_cast<uint32_t>(f.dim));
    out.write(reinterpret_cast<const char*>(f.data.data()),
              static_cast<std::streamsize>(f.data.size() * sizeof(float)));
  }
  if (!out) throw ValidationError("write failed for feature archive: " + path);
}

std::vector<FeatureMatrix> read_feature_archive(const std::string& path, double frame_shift) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open feature archive: " + path);
  char magic[6];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError("not a FEATv1 archive: " + path);
  std::vector<FeatureMatrix> feats;
  for (;;) {
    uint32_t id_len = 0;
    if (!get(in, id_len)) {
      if (in.eof()) break;
      throw ParseError("truncated feature archive: " + path);
    }
    FeatureMatrix f;
    f.utterance_id.resize(id_len);
    in.read(f.utterance_id.data(), id_len);
    uint32_t frames = 0, dim = 0;
    if (!in || !get(in, frames) || !get(in, dim) || frames == 0 || dim == 0)
      throw ParseError("truncated or malformed feature archive near utterance #" +
                       std::to_string(feats.size()) + ": " + path);
    f.num_frames = static_cast<int32_t>(frames);
    f.dim = static_cast<int32_t>(dim);
    f.frame_shift = frame_shift;
    f.data.resize(static_cast<size_t>(frames) * dim);
    in.read(reinterpret_cast<char*>(f.data.data()),
            static_cast<std::streamsize>(f.data.size() * sizeof(float)));
    if (!in) throw ParseError("truncated feature data for utterance \"" + f.utterance_id + "\"");
    feats.push_back(std::move(f));
  }
  return feats;
}

}  // namespace accentasr
