#ifndef SEQEMO_TRAIN_KFOLD_HPP
#define SEQEMO_TRAIN_KFOLD_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "seqemo/common.hpp"
#include "seqemo/rng.hpp"

namespace seqemo {

enum class FoldMode {
  stratified_random,  // per-class counts across folds differ by at most one
  speaker_grouped,    // a speaker's items never straddle train and test
};

inline const char* fold_mode_name(FoldMode mode) {
  return mode == FoldMode::stratified_random ? "stratified_random"
                                             : "speaker_grouped";
}

inline FoldMode parse_fold_mode(const std::string& name) {
  if (name == "stratified_random") return FoldMode::stratified_random;
  if (name == "speaker_grouped") return FoldMode::speaker_grouped;
  throw ConfigError(cat("unknown fold mode \"", name,
                        "\", expected stratified_random or speaker_grouped"));
}

struct FoldPlan {
  int64_t k = 5;
  FoldMode mode = FoldMode::stratified_random;
  std::vector<int64_t> assignment;  // fold id per item, filled by kfold_split
};

struct FoldSplit {
  std::vector<int64_t> train;
  std::vector<int64_t> test;
};

// Partitions item indices into k folds and returns, for each fold, the
// (train, test) index pair with the fold itself as test. Fills
// plan.assignment as a side effect.
std::vector<FoldSplit> kfold_split(const std::vector<int64_t>& labels,
                                   const std::vector<std::string>& speakers,
                                   int64_t num_classes, FoldPlan& plan,
                                   Rng& rng);

}  // namespace seqemo

#endif  // SEQEMO_TRAIN_KFOLD_HPP
