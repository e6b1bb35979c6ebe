#ifndef SEQEMO_TRAIN_BATCH_HPP
#define SEQEMO_TRAIN_BATCH_HPP

#include <cstdint>
#include <cstring>
#include <numeric>
#include <vector>

#include "seqemo/common.hpp"
#include "seqemo/rng.hpp"
#include "seqemo/tensor.hpp"
#include "seqemo/train/config.hpp"
#include "seqemo/train/dataset.hpp"

namespace seqemo {

// A zero-padded minibatch. features is (batch, T_pad, dim) with every item's
// frames in rows [0, lengths[i]) and exact zeros beyond.
template <typename S>
struct SequenceBatch {
  Tensor<S> features;
  std::vector<int64_t> lengths;
  std::vector<int64_t> labels;

  int64_t size() const { return features.rank() == 3 ? features.dim(0) : 0; }
  int64_t padded_len() const { return features.dim(1); }
  int64_t feature_dim() const { return features.dim(2); }

  // Copies one item out as a (T_pad x dim) matrix.
  Tensor<S> item(int64_t i) const {
    if (i < 0 || i >= size())
      throw ShapeError(cat("batch item ", i, " out of range ", size()));
    const int64_t t = padded_len(), d = feature_dim();
    Tensor<S> out({t, d});
    std::memcpy(out.data(), features.data() + i * t * d,
                static_cast<size_t>(t * d) * sizeof(S));
    return out;
  }
};

// Cuts the items, taken in the given order, into batches of cfg.batch_size
// (the last one may be smaller) and zero-pads each to its target length.
template <typename S>
std::vector<SequenceBatch<S>> batches_in_order(
    const FeatureDataset<S>& ds, const std::vector<int64_t>& order,
    const TrainConfig& cfg) {
  if (ds.items.empty()) throw DataError("cannot batch an empty dataset");
  const int64_t d = ds.feature_dim();
  const int64_t global_max = ds.max_len();
  for (int64_t i : order) {
    const int64_t len = ds.items[static_cast<size_t>(i)].features.dim(0);
    if (cfg.max_frames > 0 && len > cfg.max_frames)
      throw DataError(cat("item ", i, " has ", len,
                          " frames, over the configured cap of ",
                          cfg.max_frames));
  }

  std::vector<SequenceBatch<S>> out;
  const int64_t n = static_cast<int64_t>(order.size());
  for (int64_t start = 0; start < n; start += cfg.batch_size) {
    const int64_t b = std::min(cfg.batch_size, n - start);
    int64_t t_pad = 0;
    if (cfg.padding_mode == PaddingMode::global_max) {
      t_pad = global_max;
    } else {
      for (int64_t i = 0; i < b; ++i)
        t_pad = std::max(
            t_pad,
            ds.items[static_cast<size_t>(order[start + i])].features.dim(0));
    }
    SequenceBatch<S> batch;
    batch.features = Tensor<S>::zeros({b, t_pad, d});
    for (int64_t i = 0; i < b; ++i) {
      const auto& item = ds.items[static_cast<size_t>(order[start + i])];
      const int64_t len = item.features.dim(0);
      std::memcpy(batch.features.data() + i * t_pad * d, item.features.data(),
                  static_cast<size_t>(len * d) * sizeof(S));
      batch.lengths.push_back(len);
      batch.labels.push_back(item.label);
    }
    out.push_back(std::move(batch));
  }
  return out;
}

// Training batches: composition reshuffled by the caller's rng.
template <typename S>
std::vector<SequenceBatch<S>> make_batches(const FeatureDataset<S>& ds,
                                           const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  std::vector<int64_t> order(ds.items.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  return batches_in_order(ds, order, cfg);
}

// Evaluation batches keep dataset order so predictions line up with items.
template <typename S>
std::vector<SequenceBatch<S>> make_eval_batches(const FeatureDataset<S>& ds,
                                                const TrainConfig& cfg) {
  cfg.validate();
  std::vector<int64_t> order(ds.items.size());
  std::iota(order.begin(), order.end(), 0);
  return batches_in_order(ds, order, cfg);
}

}  // namespace seqemo

#endif  // SEQEMO_TRAIN_BATCH_HPP
