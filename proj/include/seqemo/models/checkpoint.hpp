#ifndef SEQEMO_MODELS_CHECKPOINT_HPP
#define SEQEMO_MODELS_CHECKPOINT_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "seqemo/models/model.hpp"

namespace seqemo {

// Training context stored alongside the weights.
struct CheckpointMeta {
  std::uint64_t seed = 0;
  int64_t epoch = -1;  // negative when not applicable
  int64_t fold = -1;
  std::vector<std::string> classes;
  // Per-coefficient normalization applied to features before the model.
  bool has_feature_norm = false;
  std::vector<float> feature_mean, feature_std;
};

struct LoadedCheckpoint {
  ModelSpec spec;
  std::unique_ptr<Model<float>> model;  // parameters filled in
  CheckpointMeta meta;
};

// File layout: the magic line "SEQEMO1\n", a little-endian uint32 JSON length,
// a JSON header (format version, model spec, tensor index with name, shape,
// and float offset, metadata), then one little-endian float32 blob holding
// every parameter tensor back to back. A round trip reproduces forward
// outputs bit for bit.
void save_checkpoint(Model<float>& model, const CheckpointMeta& meta,
                     const std::string& path);

// Rejects bad magic, unsupported versions, truncated files, and any mismatch
// between the tensor index and the rebuilt model's parameters.
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace seqemo

#endif  // SEQEMO_MODELS_CHECKPOINT_HPP
