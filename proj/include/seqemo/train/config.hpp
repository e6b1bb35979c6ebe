#ifndef SEQEMO_TRAIN_CONFIG_HPP
#define SEQEMO_TRAIN_CONFIG_HPP

#include <cstdint>
#include <string>

#include "seqemo/common.hpp"
#include "seqemo/nn/adam.hpp"

namespace seqemo {

enum class PaddingMode {
  global_max,  // every batch padded to the longest sequence in the dataset
  per_batch,   // each batch padded only to its own longest member
};

inline const char* padding_mode_name(PaddingMode mode) {
  return mode == PaddingMode::global_max ? "global_max" : "per_batch";
}

inline PaddingMode parse_padding_mode(const std::string& name) {
  if (name == "global_max") return PaddingMode::global_max;
  if (name == "per_batch") return PaddingMode::per_batch;
  throw ConfigError(cat("unknown padding mode \"", name,
                        "\", expected global_max or per_batch"));
}

struct TrainConfig {
  int64_t batch_size = 32;
  OptimizerConfig optimizer;
  int64_t max_epochs = 100;
  int64_t early_stop_patience = 10;
  uint64_t seed = 1234;
  PaddingMode padding_mode = PaddingMode::global_max;
  bool mask_attention = true;
  double validation_fraction = 0.1;
  bool normalize_features = true;  // consumed by the drivers that prepare data
  double grad_clip_norm = 0.0;     // 0 disables clipping
  int64_t max_frames = 0;          // 0 disables the length cap

  void validate() const {
    if (batch_size < 1)
      throw ConfigError(cat("batch_size must be at least 1, got ", batch_size));
    if (max_epochs < 1)
      throw ConfigError(cat("max_epochs must be at least 1, got ", max_epochs));
    if (early_stop_patience < 0)
      throw ConfigError(cat("early_stop_patience must not be negative, got ",
                            early_stop_patience));
    if (validation_fraction < 0.0 || validation_fraction > 0.5)
      throw ConfigError(cat("validation_fraction must lie in [0, 0.5], got ",
                            validation_fraction));
    if (grad_clip_norm < 0.0)
      throw ConfigError(cat("grad_clip_norm must not be negative, got ",
                            grad_clip_norm));
    if (max_frames < 0)
      throw ConfigError(cat("max_frames must not be negative, got ",
                            max_frames));
    optimizer.validate();
  }
};

}  // namespace seqemo

#endif  // SEQEMO_TRAIN_CONFIG_HPP
