#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "accentasr/common.hpp"

namespace accentasr {

struct FeatureMatrix {
  std::string utterance_id;
  int32_t num_frames = 0;
  int32_t dim = 0;
  std::vector<float> data;  // row-major, num_frames x dim
  double frame_shift = 0.01;

  std::span<const float> frame(int32_t t) const {
    return {data.data() + static_cast<size_t>(t) * dim, static_cast<size_t>(dim)};
  }
  float* frame_mut(int32_t t) { return data.data() + static_cast<size_t>(t) * dim; }
  double seconds() const { return static_cast<double>(num_frames) * frame_shift; }

  bool operator==(const FeatureMatrix& o) const {
    return utterance_id == o.utterance_id && num_frames == o.num_frames && dim == o.dim &&
           data == o.data;
  }
};

// FEATv1 binary archive: magic "FEATv1", then per utterance
//   u32 id length, id bytes, u32 frames, u32 dim, frames*dim f32 (LE, row-major).
void write_feature_archive(const std::vector<FeatureMatrix>& feats, const std::string& path);
std::vector<FeatureMatrix> read_feature_archive(const std::string& path, double frame_shift = 0.01);

}  // namespace accentasr
