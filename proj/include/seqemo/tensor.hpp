#ifndef SEQEMO_TENSOR_HPP
#define SEQEMO_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <new>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "seqemo/common.hpp"

namespace seqemo {

// Allocator that pins tensor storage to a fixed 64 byte alignment. Vectorized
// reduction kernels choose their packet versus scalar split from the buffer
// address, and the two code paths can round differently, so buffers at
// addresses that vary with heap layout would make bitwise results vary from
// run to run. A constant alignment keeps the split, and therefore the
// arithmetic, identical for identical inputs.
template <typename S>
struct AlignedAllocator {
  using value_type = S;
  static constexpr std::size_t alignment = 64;

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  S* allocate(std::size_t n) {
    return static_cast<S*>(
        ::operator new(n * sizeof(S), std::align_val_t(alignment)));
  }
  void deallocate(S* p, std::size_t n) {
    ::operator delete(p, n * sizeof(S), std::align_val_t(alignment));
  }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
  template <typename U>
  bool operator!=(const AlignedAllocator<U>&) const { return false; }
};

template <typename S>
using AlignedVec = std::vector<S, AlignedAllocator<S>>;

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;

template <typename S>
using MatView = Eigen::Map<Mat<S>>;
template <typename S>
using ConstMatView = Eigen::Map<const Mat<S>>;
template <typename S>
using VecView = Eigen::Map<Vec<S>>;
template <typename S>
using ConstVecView = Eigen::Map<const Vec<S>>;

// Dense n-dimensional array, row-major. Values live in a flat vector whose
// length always equals the product of the shape.
template <typename S>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int64_t> shape)
      : shape_(std::move(shape)), data_(checked_size(shape_), S(0)) {}

  Tensor(std::vector<int64_t> shape, AlignedVec<S> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (static_cast<int64_t>(data_.size()) != checked_size(shape_))
      throw ShapeError(cat("tensor data length ", data_.size(),
                           " does not match shape product ",
                           checked_size(shape_)));
  }

  static Tensor zeros(std::vector<int64_t> shape) {
    return Tensor(std::move(shape));
  }

  static Tensor full(std::vector<int64_t> shape, S value) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
  }

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t dim(int i) const { return shape_.at(i); }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }

  S* data() { return data_.data(); }
  const S* data() const { return data_.data(); }
  AlignedVec<S>& values() { return data_; }
  const AlignedVec<S>& values() const { return data_; }

  S& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  S operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  void fill(S value) { std::fill(data_.begin(), data_.end(), value); }

  bool all_finite() const {
    for (S v : data_)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  // 2-d views onto the flat storage. rows*cols must equal size().
  MatView<S> mat(int64_t rows, int64_t cols) {
    check_view(rows * cols);
    return MatView<S>(data_.data(), rows, cols);
  }
  ConstMatView<S> mat(int64_t rows, int64_t cols) const {
    check_view(rows * cols);
    return ConstMatView<S>(data_.data(), rows, cols);
  }
  VecView<S> vec() {
    return VecView<S>(data_.data(), static_cast<int64_t>(data_.size()));
  }
  ConstVecView<S> vec() const {
    return ConstVecView<S>(data_.data(), static_cast<int64_t>(data_.size()));
  }

  template <typename T>
  Tensor<T> cast() const {
    AlignedVec<T> out(data_.size());
    for (size_t i = 0; i < data_.size(); ++i)
      out[i] = static_cast<T>(data_[i]);
    return Tensor<T>(shape_, std::move(out));
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  static int64_t checked_size(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
      if (d <= 0) throw ShapeError(cat("non-positive tensor dimension ", d));
      n *= d;
    }
    return n;
  }

  void check_view(int64_t n) const {
    if (n != size())
      throw ShapeError(
          cat("view of ", n, " elements over tensor of size ", size()));
  }

  std::vector<int64_t> shape_;
  AlignedVec<S> data_;
};

}  // namespace seqemo

#endif  // SEQEMO_TENSOR_HPP
