#ifndef SEQEMO_NN_INIT_HPP
#define SEQEMO_NN_INIT_HPP

#include <cmath>

#include "seqemo/rng.hpp"
#include "seqemo/tensor.hpp"

namespace seqemo {

// Glorot/Xavier uniform: values in [-L, L] with L = sqrt(6/(fan_in+fan_out)).
// Draw order is row-major over the flat data, so the result is a pure
// function of (seed, fans, shape).
template <typename S>
Tensor<S> glorot_uniform_init(Rng& rng, int64_t fan_in, int64_t fan_out,
                              std::vector<int64_t> shape) {
  if (fan_in < 1 || fan_out < 1)
    throw ConfigError(
        cat("glorot init needs positive fans, got ", fan_in, "/", fan_out));
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor<S> t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i)
    t[i] = static_cast<S>(rng.uniform(-limit, limit));
  return t;
}

// Orthogonal rows (or columns when rows > cols): QR of a Gaussian matrix in
// its taller orientation, signs fixed from the R diagonal so the result is
// unique, transposed back if needed. Used for LSTM recurrent kernels.
template <typename S>
Tensor<S> orthogonal_init(Rng& rng, int64_t rows, int64_t cols) {
  if (rows < 1 || cols < 1)
    throw ConfigError(cat("orthogonal init needs positive dims, got ", rows,
                          "x", cols));
  const int64_t tall = std::max(rows, cols);
  const int64_t thin = std::min(rows, cols);
  Mat<S> a(tall, thin);
  for (int64_t i = 0; i < tall; ++i)
    for (int64_t j = 0; j < thin; ++j)
      a(i, j) = static_cast<S>(rng.normal());
  Eigen::HouseholderQR<Mat<S>> qr(a);
  Mat<S> q = qr.householderQ() * Mat<S>::Identity(tall, thin);
  Mat<S> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (int64_t j = 0; j < thin; ++j)
    if (r(j, j) < S(0)) q.col(j) = -q.col(j);
  Tensor<S> t({rows, cols});
  auto m = t.mat(rows, cols);
  if (rows >= cols)
    m = q;
  else
    m = q.transpose();
  return t;
}

}  // namespace seqemo

#endif  // SEQEMO_NN_INIT_HPP
