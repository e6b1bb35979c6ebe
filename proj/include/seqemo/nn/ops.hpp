#ifndef SEQEMO_NN_OPS_HPP
#define SEQEMO_NN_OPS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "seqemo/tensor.hpp"

namespace seqemo {

// Softmax along one axis, computed with max subtraction. Output slices sum
// to 1 within roundoff for any finite input.
template <typename S>
Tensor<S> softmax(const Tensor<S>& logits, int axis) {
  const int r = logits.rank();
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r)
    throw ShapeError(cat("softmax axis ", axis, " out of range for rank ", r));
  if (!logits.all_finite())
    throw NumericError("softmax input contains NaN or Inf");

  int64_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= logits.dim(i);
  const int64_t n = logits.dim(axis);
  for (int i = axis + 1; i < r; ++i) inner *= logits.dim(i);

  Tensor<S> out(logits.shape());
  const S* src = logits.data();
  S* dst = out.data();
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t in = 0; in < inner; ++in) {
      const int64_t base = o * n * inner + in;
      S m = src[base];
      for (int64_t k = 1; k < n; ++k)
        m = std::max(m, src[base + k * inner]);
      double sum = 0.0;
      for (int64_t k = 0; k < n; ++k) {
        const double e = std::exp(static_cast<double>(src[base + k * inner] - m));
        dst[base + k * inner] = static_cast<S>(e);
        sum += e;
      }
      for (int64_t k = 0; k < n; ++k)
        dst[base + k * inner] = static_cast<S>(
            static_cast<double>(dst[base + k * inner]) / sum);
    }
  }
  return out;
}

template <typename S>
struct CrossEntropyResult {
  double loss = 0.0;        // mean over the batch of -log p(true class)
  Tensor<S> dlogits;        // (probs - labels) / batch, valid when probs came
                            // from a softmax over logits
};

inline constexpr double kProbFloor = 1e-12;

// probs: batch x classes rows summing to 1; labels: one-hot, same shape.
template <typename S>
CrossEntropyResult<S> cross_entropy_loss(const Tensor<S>& probs,
                                         const Tensor<S>& labels) {
  if (probs.rank() != 2 || !probs.same_shape(labels))
    throw ShapeError("cross_entropy_loss expects matching batch x classes tensors");
  const int64_t batch = probs.dim(0), classes = probs.dim(1);
  CrossEntropyResult<S> res;
  res.dlogits = Tensor<S>(probs.shape());
  double total = 0.0;
  for (int64_t b = 0; b < batch; ++b) {
    int64_t hot = -1;
    for (int64_t c = 0; c < classes; ++c) {
      const double y = static_cast<double>(labels[b * classes + c]);
      if (y != 0.0 && y != 1.0)
        throw DataError(cat("labels row ", b, " is not one-hot"));
      if (y == 1.0) {
        if (hot >= 0) throw DataError(cat("labels row ", b, " has multiple ones"));
        hot = c;
      }
    }
    if (hot < 0) throw DataError(cat("labels row ", b, " has no true class"));
    const double p = std::clamp(
        static_cast<double>(probs[b * classes + hot]), kProbFloor, 1.0);
    total += -std::log(p);
    for (int64_t c = 0; c < classes; ++c)
      res.dlogits[b * classes + c] = static_cast<S>(
          (static_cast<double>(probs[b * classes + c]) -
           static_cast<double>(labels[b * classes + c])) /
          static_cast<double>(batch));
  }
  res.loss = total / static_cast<double>(batch);
  return res;
}

// Index-label variant used by the trainer.
template <typename S>
CrossEntropyResult<S> cross_entropy_loss(const Tensor<S>& probs,
                                         const std::vector<int>& labels) {
  if (probs.rank() != 2 ||
      probs.dim(0) != static_cast<int64_t>(labels.size()))
    throw ShapeError("cross_entropy_loss label count mismatch");
  const int64_t classes = probs.dim(1);
  Tensor<S> onehot(probs.shape());
  for (size_t b = 0; b < labels.size(); ++b) {
    if (labels[b] < 0 || labels[b] >= classes)
      throw DataError(cat("label index ", labels[b], " out of range for ",
                          classes, " classes"));
    onehot[static_cast<int64_t>(b) * classes + labels[b]] = S(1);
  }
  return cross_entropy_loss(probs, onehot);
}

}  // namespace seqemo

#endif  // SEQEMO_NN_OPS_HPP
