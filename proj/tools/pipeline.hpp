#ifndef SEQEMO_TOOLS_PIPELINE_HPP
#define SEQEMO_TOOLS_PIPELINE_HPP

#include <cstdint>
#include <string>

#include "seqemo/data/manifest.hpp"
#include "seqemo/data/synth.hpp"
#include "seqemo/models/spec.hpp"
#include "seqemo/train/config.hpp"
#include "seqemo/train/dataset.hpp"
#include "seqemo/train/kfold.hpp"

namespace seqemo {

struct SynthOptions {
  std::string out;
  SynthSpec spec;
};

struct ExtractOptions {
  std::string manifest;
  std::string out;
  int64_t workers = 1;
};

struct TrainOptions {
  std::string manifest;
  std::string cache;  // empty: extract features straight from the audio
  std::string out;
  std::string arch;
  double dropout = 0.0;
  TrainConfig cfg;
};

struct XvalOptions {
  std::string manifest;
  std::string cache;
  std::string out;
  std::string arch;
  double dropout = 0.0;
  TrainConfig cfg;
  FoldPlan plan;
  int64_t workers = 1;
};

struct EvalOptions {
  std::string manifest;
  std::string cache;
  std::string checkpoint;
  std::string out;
};

struct PredictOptions {
  std::string checkpoint;
  std::string wav;
  std::string out;  // optional; probabilities always go to stdout
};

// Architecture flag values: cnn, clstm-attn, clstm-last, clstm-gmax,
// clstm-gavg.
ModelSpec arch_spec(const std::string& arch, int64_t classes, double dropout);

// Cache file name for a manifest-relative audio path.
std::string cache_name(const std::string& rel_path);

// Features for every manifest entry, from the cache when present, otherwise
// recomputed from the audio files.
FeatureDataset<float> load_dataset(const Manifest& m,
                                   const std::string& cache_dir);

void cmd_synth(const SynthOptions& opt);
void cmd_extract(const ExtractOptions& opt);
void cmd_train(const TrainOptions& opt);
void cmd_xval(const XvalOptions& opt);
void cmd_eval(const EvalOptions& opt);
void cmd_predict(const PredictOptions& opt);

}  // namespace seqemo

#endif  // SEQEMO_TOOLS_PIPELINE_HPP
