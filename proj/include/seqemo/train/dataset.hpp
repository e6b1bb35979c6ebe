#ifndef SEQEMO_TRAIN_DATASET_HPP
#define SEQEMO_TRAIN_DATASET_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "seqemo/common.hpp"
#include "seqemo/dsp/mfcc.hpp"
#include "seqemo/tensor.hpp"

namespace seqemo {

template <typename S>
struct LabeledSequence {
  Tensor<S> features;  // T x feature_dim, one row per frame
  int64_t label = 0;
  std::string speaker;
};

template <typename S>
struct FeatureDataset {
  std::vector<std::string> classes;
  std::vector<LabeledSequence<S>> items;

  int64_t num_classes() const { return static_cast<int64_t>(classes.size()); }

  int64_t feature_dim() const {
    if (items.empty()) throw DataError("empty dataset has no feature dim");
    return items.front().features.dim(1);
  }

  int64_t max_len() const {
    int64_t m = 0;
    for (const auto& it : items) m = std::max(m, it.features.dim(0));
    return m;
  }

  std::vector<int64_t> labels() const {
    std::vector<int64_t> out;
    out.reserve(items.size());
    for (const auto& it : items) out.push_back(it.label);
    return out;
  }

  std::vector<std::string> speakers() const {
    std::vector<std::string> out;
    out.reserve(items.size());
    for (const auto& it : items) out.push_back(it.speaker);
    return out;
  }

  FeatureDataset subset(const std::vector<int64_t>& indices) const {
    FeatureDataset out;
    out.classes = classes;
    out.items.reserve(indices.size());
    for (int64_t i : indices) {
      if (i < 0 || i >= static_cast<int64_t>(items.size()))
        throw DataError(cat("subset index ", i, " outside dataset of ",
                            items.size(), " items"));
      out.items.push_back(items[static_cast<size_t>(i)]);
    }
    return out;
  }

  void validate() const {
    if (classes.empty()) throw DataError("dataset has no class names");
    if (items.empty()) throw DataError("dataset has no items");
    const int64_t d = items.front().features.dim(1);
    for (size_t i = 0; i < items.size(); ++i) {
      const auto& it = items[i];
      if (it.features.rank() != 2)
        throw DataError(cat("item ", i, " features must be 2-d, got rank ",
                            it.features.rank()));
      if (it.features.dim(1) != d)
        throw DataError(cat("item ", i, " has ", it.features.dim(1),
                            " feature dims, expected ", d));
      if (it.features.dim(0) < 1)
        throw DataError(cat("item ", i, " has no frames"));
      if (it.label < 0 || it.label >= num_classes())
        throw DataError(cat("item ", i, " label ", it.label,
                            " outside [0, ", num_classes(), ")"));
      if (!it.features.all_finite())
        throw DataError(cat("item ", i, " contains non-finite features"));
    }
  }
};

// Frames as rows: the transpose of the coefficient-major feature matrix.
inline Tensor<float> time_major(const FeatureMatrix& fm) {
  const int64_t d = fm.coefficients.dim(0), t = fm.coefficients.dim(1);
  Tensor<float> out({t, d});
  for (int64_t c = 0; c < d; ++c)
    for (int64_t j = 0; j < t; ++j) out[j * d + c] = fm.coefficients[c * t + j];
  return out;
}

// Per-coefficient mean and standard deviation over every frame of a dataset.
template <typename S>
struct FeatureNorm {
  std::vector<S> mean;
  std::vector<S> stdev;
};

template <typename S>
FeatureNorm<S> compute_feature_norm(const FeatureDataset<S>& ds) {
  ds.validate();
  const int64_t d = ds.feature_dim();
  std::vector<double> sum(static_cast<size_t>(d), 0.0);
  std::vector<double> sq(static_cast<size_t>(d), 0.0);
  int64_t frames = 0;
  for (const auto& it : ds.items) {
    const int64_t t = it.features.dim(0);
    for (int64_t j = 0; j < t; ++j)
      for (int64_t c = 0; c < d; ++c) {
        const double v = static_cast<double>(it.features[j * d + c]);
        sum[static_cast<size_t>(c)] += v;
        sq[static_cast<size_t>(c)] += v * v;
      }
    frames += t;
  }
  FeatureNorm<S> norm;
  norm.mean.resize(static_cast<size_t>(d));
  norm.stdev.resize(static_cast<size_t>(d));
  for (int64_t c = 0; c < d; ++c) {
    const double mean = sum[static_cast<size_t>(c)] / frames;
    const double var = std::max(0.0, sq[static_cast<size_t>(c)] / frames -
                                         mean * mean);
    norm.mean[static_cast<size_t>(c)] = static_cast<S>(mean);
    norm.stdev[static_cast<size_t>(c)] =
        static_cast<S>(std::max(std::sqrt(var), 1e-8));
  }
  return norm;
}

template <typename S>
void apply_feature_norm(const FeatureNorm<S>& norm, Tensor<S>& features) {
  const int64_t d = features.dim(1);
  if (static_cast<int64_t>(norm.mean.size()) != d ||
      static_cast<int64_t>(norm.stdev.size()) != d)
    throw ShapeError(cat("normalizer covers ", norm.mean.size(),
                         " dims, features have ", d));
  const int64_t t = features.dim(0);
  for (int64_t j = 0; j < t; ++j)
    for (int64_t c = 0; c < d; ++c) {
      S& v = features[j * d + c];
      v = (v - norm.mean[static_cast<size_t>(c)]) /
          norm.stdev[static_cast<size_t>(c)];
    }
}

template <typename S>
void apply_feature_norm(const FeatureNorm<S>& norm, FeatureDataset<S>& ds) {
  for (auto& it : ds.items) apply_feature_norm(norm, it.features);
}

}  // namespace seqemo

#endif  // SEQEMO_TRAIN_DATASET_HPP
