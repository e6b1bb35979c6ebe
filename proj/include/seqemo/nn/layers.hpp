#ifndef SEQEMO_NN_LAYERS_HPP
#define SEQEMO_NN_LAYERS_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "seqemo/common.hpp"
#include "seqemo/nn/init.hpp"
#include "seqemo/rng.hpp"
#include "seqemo/tensor.hpp"

namespace seqemo {

// Per-call execution flags. The rng is only consulted by stochastic layers
// (dropout) and only in train mode.
struct Pass {
  bool train = false;
  Rng* rng = nullptr;
};

template <typename S>
using ParamVisitor =
    std::function<void(const std::string&, Tensor<S>&, Tensor<S>&)>;

// A differentiable stage. Sequences travel as rank-2 tensors (time x
// channels), pooled features as rank-1 tensors. forward caches whatever its
// backward needs; backward returns the input gradient and accumulates
// parameter gradients, so call zero_grad before a fresh accumulation.
template <typename S>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string name() const = 0;
  virtual Tensor<S> forward(const Tensor<S>& x, const Pass& pass) = 0;
  virtual Tensor<S> backward(const Tensor<S>& dy) = 0;
  virtual void init(Rng&) {}
  // Visits (name, parameter, gradient) pairs in a fixed order.
  virtual void visit_params(const ParamVisitor<S>&) {}

  void zero_grad() {
    visit_params([](const std::string&, Tensor<S>&, Tensor<S>& g) { g.fill(S(0)); });
  }

 protected:
  static void require_seq(const Tensor<S>& x, int64_t channels,
                          const std::string& who) {
    if (x.rank() != 2)
      throw ShapeError(cat(who, ": expected a time x channel matrix, got rank ",
                           x.rank()));
    if (x.dim(1) != channels)
      throw ShapeError(cat(who, ": expected ", channels, " channels, got ",
                           x.dim(1)));
  }
};

// Valid cross-correlation along time with stride and optional ReLU.
// Input (T_in x C_in), output (T_out x C_out) with
// T_out = floor((T_in - width)/stride) + 1. The kernel is stored as
// (width, in_channels, out_channels); flattened row-major that is exactly the
// (width*in_channels) x out_channels matrix multiplying each input window.
template <typename S>
class Conv1d : public Layer<S> {
 public:
  Conv1d(int64_t in_ch, int64_t out_ch, int64_t width, int64_t stride, bool relu)
      : in_ch_(in_ch), out_ch_(out_ch), width_(width), stride_(stride), relu_(relu),
        kernel_({width, in_ch, out_ch}), bias_({out_ch}),
        d_kernel_({width, in_ch, out_ch}), d_bias_({out_ch}) {
    if (in_ch < 1 || out_ch < 1 || width < 1 || stride < 1)
      throw ConfigError(cat(name(), ": all dimensions must be positive"));
  }

  std::string name() const override {
    return cat("conv1d(", out_ch_, " filters, width ", width_, ", stride ",
               stride_, ")");
  }

  void init(Rng& rng) override {
    kernel_ = glorot_uniform_init<S>(rng, width_ * in_ch_, width_ * out_ch_,
                                     {width_, in_ch_, out_ch_});
    bias_.fill(S(0));
  }

  static int64_t output_length(int64_t t_in, int64_t width, int64_t stride) {
    return (t_in - width) / stride + 1;
  }

  Tensor<S> forward(const Tensor<S>& x, const Pass&) override {
    this->require_seq(x, in_ch_, name());
    const int64_t t_in = x.dim(0);
    if (t_in < width_)
      throw ShapeError(cat(name(), ": input length ", t_in,
                           " is shorter than the kernel width"));
    const int64_t t_out = output_length(t_in, width_, stride_);

    input_ = x;
    Tensor<S> y({t_out, out_ch_});
    auto ym = y.mat(t_out, out_ch_);
    ym.noalias() = patches(input_) * kernel_.mat(width_ * in_ch_, out_ch_);
    ym.rowwise() += bias_.vec().transpose();
    if (relu_) ym = ym.cwiseMax(S(0));
    output_ = y;
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) override {
    const int64_t t_in = input_.dim(0);
    const int64_t t_out = dy.dim(0);
    if (dy.rank() != 2 || dy.dim(1) != out_ch_ ||
        t_out != output_length(t_in, width_, stride_))
      throw ShapeError(cat(name(), ": gradient shape mismatch"));

    Mat<S> dpre = dy.mat(t_out, out_ch_);
    if (relu_) {
      auto ym = output_.mat(t_out, out_ch_);
      dpre = ((ym.array() > S(0)).template cast<S>() * dpre.array()).matrix();
    }

    auto p = patches(input_);
    d_kernel_.mat(width_ * in_ch_, out_ch_).noalias() += p.transpose() * dpre;
    d_bias_.vec().noalias() += dpre.colwise().sum().transpose();

    Mat<S> dp(t_out, width_ * in_ch_);
    dp.noalias() = dpre * kernel_.mat(width_ * in_ch_, out_ch_).transpose();

    Tensor<S> dx({t_in, in_ch_});
    auto dxm = dx.mat(t_in, in_ch_);
    // Windows overlap when stride < width, so scatter row by row.
    for (int64_t t = 0; t < t_out; ++t)
      dxm.block(t * stride_, 0, width_, in_ch_) +=
          ConstMatView<S>(dp.row(t).data(), width_, in_ch_);
    return dx;
  }

  void visit_params(const ParamVisitor<S>& visit) override {
    visit("kernel", kernel_, d_kernel_);
    visit("bias", bias_, d_bias_);
  }

  int64_t in_channels() const { return in_ch_; }
  int64_t out_channels() const { return out_ch_; }
  int64_t width() const { return width_; }
  int64_t stride() const { return stride_; }

 private:
  using PatchMap = Eigen::Map<const Mat<S>, Eigen::Unaligned, Eigen::OuterStride<>>;

  // Row t is the flattened input window starting at frame t*stride. Rows are
  // contiguous slices of the row-major input, so this is a zero-copy view.
  PatchMap patches(const Tensor<S>& x) const {
    const int64_t t_out = output_length(x.dim(0), width_, stride_);
    return PatchMap(x.data(), t_out, width_ * in_ch_,
                    Eigen::OuterStride<>(stride_ * in_ch_));
  }

  int64_t in_ch_, out_ch_, width_, stride_;
  bool relu_;
  Tensor<S> kernel_, bias_, d_kernel_, d_bias_;
  Tensor<S> input_, output_;
};

// Non-overlapping max pooling over time. Remainder frames beyond the last
// full window are dropped. Gradient flows to the first maximal element of
// each window.
template <typename S>
class MaxPool1d : public Layer<S> {
 public:
  explicit MaxPool1d(int64_t pool) : pool_(pool) {
    if (pool < 1) throw ConfigError(cat(name(), ": pool size must be positive"));
  }

  std::string name() const override { return cat("maxpool1d(", pool_, ")"); }

  Tensor<S> forward(const Tensor<S>& x, const Pass&) override {
    if (x.rank() != 2)
      throw ShapeError(cat(name(), ": expected a time x channel matrix"));
    const int64_t t_in = x.dim(0), ch = x.dim(1);
    if (t_in < pool_)
      throw ShapeError(cat(name(), ": input length ", t_in,
                           " is shorter than the pool size"));
    const int64_t t_out = t_in / pool_;

    t_in_ = t_in;
    ch_ = ch;
    argmax_.assign(static_cast<size_t>(t_out * ch), 0);
    Tensor<S> y({t_out, ch});
    auto xm = x.mat(t_in, ch);
    auto ym = y.mat(t_out, ch);
    for (int64_t t = 0; t < t_out; ++t) {
      for (int64_t c = 0; c < ch; ++c) {
        S best = xm(t * pool_, c);
        int64_t best_row = t * pool_;
        for (int64_t k = 1; k < pool_; ++k) {
          const S v = xm(t * pool_ + k, c);
          if (v > best) {
            best = v;
            best_row = t * pool_ + k;
          }
        }
        ym(t, c) = best;
        argmax_[static_cast<size_t>(t * ch + c)] = best_row;
      }
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) override {
    const int64_t t_out = t_in_ / pool_;
    if (dy.rank() != 2 || dy.dim(0) != t_out || dy.dim(1) != ch_)
      throw ShapeError(cat(name(), ": gradient shape mismatch"));
    Tensor<S> dx({t_in_, ch_});
    auto dxm = dx.mat(t_in_, ch_);
    auto dym = dy.mat(t_out, ch_);
    for (int64_t t = 0; t < t_out; ++t)
      for (int64_t c = 0; c < ch_; ++c)
        dxm(argmax_[static_cast<size_t>(t * ch_ + c)], c) += dym(t, c);
    return dx;
  }

 private:
  int64_t pool_;
  int64_t t_in_ = 0, ch_ = 0;
  std::vector<int64_t> argmax_;
};

// Per-channel max over the whole time axis; (T x C) -> (C). First maximal
// frame wins the gradient.
template <typename S>
class GlobalMaxPool : public Layer<S> {
 public:
  std::string name() const override { return "global_maxpool"; }

  Tensor<S> forward(const Tensor<S>& x, const Pass&) override {
    if (x.rank() != 2)
      throw ShapeError(cat(name(), ": expected a time x channel matrix"));
    const int64_t t = x.dim(0), ch = x.dim(1);
    t_in_ = t;
    ch_ = ch;
    argmax_.assign(static_cast<size_t>(ch), 0);
    Tensor<S> y({ch});
    auto xm = x.mat(t, ch);
    for (int64_t c = 0; c < ch; ++c) {
      int64_t best = 0;
      for (int64_t r = 1; r < t; ++r)
        if (xm(r, c) > xm(best, c)) best = r;
      argmax_[static_cast<size_t>(c)] = best;
      y[c] = xm(best, c);
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) override {
    if (dy.rank() != 1 || dy.dim(0) != ch_)
      throw ShapeError(cat(name(), ": gradient shape mismatch"));
    Tensor<S> dx({t_in_, ch_});
    auto dxm = dx.mat(t_in_, ch_);
    for (int64_t c = 0; c < ch_; ++c)
      dxm(argmax_[static_cast<size_t>(c)], c) = dy[c];
    return dx;
  }

 private:
  int64_t t_in_ = 0, ch_ = 0;
  std::vector<int64_t> argmax_;
};

// Per-channel mean over time; (T x C) -> (C).
template <typename S>
class GlobalAvgPool : public Layer<S> {
 public:
  std::string name() const override { return "global_avgpool"; }

  Tensor<S> forward(const Tensor<S>& x, const Pass&) override {
    if (x.rank() != 2)
      throw ShapeError(cat(name(), ": expected a time x channel matrix"));
    t_in_ = x.dim(0);
    ch_ = x.dim(1);
    Tensor<S> y({ch_});
    y.vec() = x.mat(t_in_, ch_).colwise().mean().transpose();
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) override {
    if (dy.rank() != 1 || dy.dim(0) != ch_)
      throw ShapeError(cat(name(), ": gradient shape mismatch"));
    Tensor<S> dx({t_in_, ch_});
    auto dxm = dx.mat(t_in_, ch_);
    dxm.rowwise() = dy.vec().transpose() / static_cast<S>(t_in_);
    return dx;
  }

 private:
  int64_t t_in_ = 0, ch_ = 0;
};

// Takes the final timestep of a sequence; (T x C) -> (C).
template <typename S>
class LastState : public Layer<S> {
 public:
  std::string name() const override { return "last_state"; }

  Tensor<S> forward(const Tensor<S>& x, const Pass&) override {
    if (x.rank() != 2)
      throw ShapeError(cat(name(), ": expected a time x channel matrix"));
    t_in_ = x.dim(0);
    ch_ = x.dim(1);
    Tensor<S> y({ch_});
    y.vec() = x.mat(t_in_, ch_).row(t_in_ - 1).transpose();
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) override {
    if (dy.rank() != 1 || dy.dim(0) != ch_)
      throw ShapeError(cat(name(), ": gradient shape mismatch"));
    Tensor<S> dx({t_in_, ch_});
    dx.mat(t_in_, ch_).row(t_in_ - 1) = dy.vec().transpose();
    return dx;
  }

 private:
  int64_t t_in_ = 0, ch_ = 0;
};

// Bidirectional LSTM. Each direction owns an input kernel W (F x 4h), a
// recurrent kernel U (h x 4h), and a bias (4h), with the gate blocks laid out
// in the fixed order [input i, forget f, cell candidate g, output o]. Both
// directions start from zero state; the backward direction consumes the
// time-reversed sequence. Outputs are concatenated per timestep as
// [forward_t ; backward_t], giving (T x 2h).
template <typename S>
class Blstm : public Layer<S> {
 public:
  Blstm(int64_t in_dim, int64_t hidden_per_dir)
      : in_(in_dim), h_(hidden_per_dir) {
    if (in_dim < 1 || hidden_per_dir < 1)
      throw ConfigError(cat(name(), ": dimensions must be positive"));
    for (auto* d : {&fw_, &bw_}) {
      d->w = Tensor<S>({in_, 4 * h_});
      d->u = Tensor<S>({h_, 4 * h_});
      d->b = Tensor<S>({4 * h_});
      d->dw = Tensor<S>({in_, 4 * h_});
      d->du = Tensor<S>({h_, 4 * h_});
      d->db = Tensor<S>({4 * h_});
    }
  }

  std::string name() const override { return cat("blstm(", 2 * h_, " units)"); }

  void init(Rng& rng) override {
    for (auto* d : {&fw_, &bw_}) {
      d->w = glorot_uniform_init<S>(rng, in_, 4 * h_, {in_, 4 * h_});
      d->u = orthogonal_init<S>(rng, h_, 4 * h_);
      d->b.fill(S(0));
      // Forget gates start open so early training does not wipe the cell.
      d->b.vec().segment(h_, h_).setConstant(S(1));
    }
  }

  Tensor<S> forward(const Tensor<S>& x, const Pass&) override {
    this->require_seq(x, in_, name());
    const int64_t t = x.dim(0);
    t_ = t;

    fw_.x = x.mat(t, in_);
    bw_.x = fw_.x.colwise().reverse();
    run_direction(fw_);
    run_direction(bw_);

    Tensor<S> y({t, 2 * h_});
    auto ym = y.mat(t, 2 * h_);
    ym.leftCols(h_) = fw_.h;
    ym.rightCols(h_) = bw_.h.colwise().reverse();
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) override {
    if (dy.rank() != 2 || dy.dim(0) != t_ || dy.dim(1) != 2 * h_)
      throw ShapeError(cat(name(), ": gradient shape mismatch"));
    auto dym = dy.mat(t_, 2 * h_);

    Mat<S> dx_f = backprop_direction(fw_, dym.leftCols(h_));
    Mat<S> dh_b = dym.rightCols(h_).colwise().reverse();
    Mat<S> dx_b = backprop_direction(bw_, dh_b);

    Tensor<S> dx({t_, in_});
    dx.mat(t_, in_) = dx_f + dx_b.colwise().reverse();
    return dx;
  }

  void visit_params(const ParamVisitor<S>& visit) override {
    visit("fw.W", fw_.w, fw_.dw);
    visit("fw.U", fw_.u, fw_.du);
    visit("fw.b", fw_.b, fw_.db);
    visit("bw.W", bw_.w, bw_.dw);
    visit("bw.U", bw_.u, bw_.du);
    visit("bw.b", bw_.b, bw_.db);
  }

  int64_t output_dim() const { return 2 * h_; }

 private:
  struct Direction {
    Tensor<S> w, u, b, dw, du, db;
    // Caches in processing order: inputs, post-activation gates, cell state,
    // tanh of cell state, and hidden state.
    Mat<S> x, gi, gf, gg, go, c, tc, h;
  };

  static S sigmoid(S z) { return S(1) / (S(1) + std::exp(-z)); }

  void run_direction(Direction& d) {
    const int64_t t = t_;
    d.gi.resize(t, h_); d.gf.resize(t, h_); d.gg.resize(t, h_); d.go.resize(t, h_);
    d.c.resize(t, h_); d.tc.resize(t, h_); d.h.resize(t, h_);

    // Input contributions for every step at once; the recurrence adds the
    // hidden-state term row by row.
    Mat<S> z0(t, 4 * h_);
    z0.noalias() = d.x * d.w.mat(in_, 4 * h_);
    z0.rowwise() += d.b.vec().transpose();

    RowVec<S> h_prev = RowVec<S>::Zero(h_);
    RowVec<S> c_prev = RowVec<S>::Zero(h_);
    RowVec<S> z(4 * h_);
    for (int64_t step = 0; step < t; ++step) {
      z.noalias() = z0.row(step) + h_prev * d.u.mat(h_, 4 * h_);
      for (int64_t j = 0; j < h_; ++j) {
        const S i_g = sigmoid(z(j));
        const S f_g = sigmoid(z(h_ + j));
        const S g_g = std::tanh(z(2 * h_ + j));
        const S o_g = sigmoid(z(3 * h_ + j));
        const S c_new = f_g * c_prev(j) + i_g * g_g;
        const S tc = std::tanh(c_new);
        d.gi(step, j) = i_g;
        d.gf(step, j) = f_g;
        d.gg(step, j) = g_g;
        d.go(step, j) = o_g;
        d.c(step, j) = c_new;
        d.tc(step, j) = tc;
        d.h(step, j) = o_g * tc;
      }
      h_prev = d.h.row(step);
      c_prev = d.c.row(step);
    }
  }

  // Standard backprop through time. Accumulates dW, dU, db and returns the
  // input gradient, all in the direction's processing order.
  template <typename Derived>
  Mat<S> backprop_direction(Direction& d, const Eigen::MatrixBase<Derived>& dh_out) {
    const int64_t t = t_;
    Mat<S> dz_all(t, 4 * h_);
    RowVec<S> dh_next = RowVec<S>::Zero(h_);
    RowVec<S> dc_next = RowVec<S>::Zero(h_);

    for (int64_t step = t - 1; step >= 0; --step) {
      for (int64_t j = 0; j < h_; ++j) {
        const S i_g = d.gi(step, j), f_g = d.gf(step, j);
        const S g_g = d.gg(step, j), o_g = d.go(step, j);
        const S tc = d.tc(step, j);
        const S c_prev = step > 0 ? d.c(step - 1, j) : S(0);

        const S dh = dh_out(step, j) + dh_next(j);
        const S dc = dh * o_g * (S(1) - tc * tc) + dc_next(j);
        dz_all(step, j) = dc * g_g * i_g * (S(1) - i_g);
        dz_all(step, h_ + j) = dc * c_prev * f_g * (S(1) - f_g);
        dz_all(step, 2 * h_ + j) = dc * i_g * (S(1) - g_g * g_g);
        dz_all(step, 3 * h_ + j) = dh * tc * o_g * (S(1) - o_g);
        dc_next(j) = dc * f_g;
      }
      dh_next.noalias() = dz_all.row(step) * d.u.mat(h_, 4 * h_).transpose();
    }

    // Hidden states shifted one step back, zero row first, for dU.
    Mat<S> h_prev = Mat<S>::Zero(t, h_);
    if (t > 1) h_prev.bottomRows(t - 1) = d.h.topRows(t - 1);

    d.dw.mat(in_, 4 * h_).noalias() += d.x.transpose() * dz_all;
    d.du.mat(h_, 4 * h_).noalias() += h_prev.transpose() * dz_all;
    d.db.vec().noalias() += dz_all.colwise().sum().transpose();

    Mat<S> dx(t, in_);
    dx.noalias() = dz_all * d.w.mat(in_, 4 * h_).transpose();
    return dx;
  }

  int64_t in_, h_;
  int64_t t_ = 0;
  Direction fw_, bw_;
};

// What attention pooling produces: the weights over timesteps and their
// weighted sum of the input rows.
template <typename S>
struct AttentionOutput {
  Tensor<S> alpha;    // (T), zero on masked rows
  Tensor<S> context;  // (C)
};

// Attention pooling: score each timestep with tanh of a dot product against a
// learned vector, softmax the scores into weights, and sum the rows under
// those weights. No bias and no temperature. An optional valid length
// restricts the softmax to the leading rows; masked rows get weight zero.
template <typename S>
class AttentionPool : public Layer<S> {
 public:
  explicit AttentionPool(int64_t dim) : dim_(dim), w_({dim}), dw_({dim}) {
    if (dim < 1) throw ConfigError(cat(name(), ": dimension must be positive"));
  }

  std::string name() const override { return cat("attention(", dim_, ")"); }

  void init(Rng& rng) override {
    w_ = glorot_uniform_init<S>(rng, dim_, 1, {dim_});
  }

  AttentionOutput<S> attend(const Tensor<S>& x, int64_t valid_len) {
    this->require_seq(x, dim_, name());
    const int64_t t = x.dim(0);
    if (valid_len < 1 || valid_len > t)
      throw ShapeError(cat(name(), ": valid length ", valid_len,
                           " outside [1, ", t, "]"));
    t_ = t;
    valid_ = valid_len;
    x_ = x;

    auto xm = x.mat(t, dim_);
    f_ = (xm.topRows(valid_len) * w_.vec()).array().tanh().matrix();

    // Softmax over the valid rows with the usual max shift.
    const S fmax = f_.maxCoeff();
    alpha_.resize(valid_len);
    double denom = 0.0;
    for (int64_t i = 0; i < valid_len; ++i) {
      alpha_(i) = std::exp(f_(i) - fmax);
      denom += static_cast<double>(alpha_(i));
    }
    alpha_ /= static_cast<S>(denom);

    AttentionOutput<S> out;
    out.alpha = Tensor<S>({t});
    out.alpha.vec().head(valid_len) = alpha_;
    out.context = Tensor<S>({dim_});
    out.context.vec().noalias() = xm.topRows(valid_len).transpose() * alpha_;
    last_alpha_ = out.alpha;
    return out;
  }

  Tensor<S> forward(const Tensor<S>& x, const Pass&) override {
    return attend(x, x.dim(0)).context;
  }

  Tensor<S> backward(const Tensor<S>& dy) override {
    if (dy.rank() != 1 || dy.dim(0) != dim_)
      throw ShapeError(cat(name(), ": gradient shape mismatch"));
    auto xm = x_.mat(t_, dim_);
    auto xv = xm.topRows(valid_);
    auto dc = dy.vec();

    Vec<S> dalpha = xv * dc;
    const S mix = alpha_.dot(dalpha);
    Vec<S> df = (alpha_.array() * (dalpha.array() - mix)).matrix();
    Vec<S> ds = (df.array() * (S(1) - f_.array().square())).matrix();

    dw_.vec().noalias() += xv.transpose() * ds;

    Tensor<S> dx({t_, dim_});
    auto dxm = dx.mat(t_, dim_);
    dxm.topRows(valid_).noalias() = alpha_ * dc.transpose();
    dxm.topRows(valid_).noalias() += ds * w_.vec().transpose();
    return dx;
  }

  void visit_params(const ParamVisitor<S>& visit) override {
    visit("w", w_, dw_);
  }

  // Weights from the most recent forward, full length with masked rows zero.
  const Tensor<S>& last_alpha() const { return last_alpha_; }

 private:
  int64_t dim_;
  Tensor<S> w_, dw_;
  int64_t t_ = 0, valid_ = 0;
  Tensor<S> x_, last_alpha_;
  Vec<S> f_, alpha_;
};

// Fully connected layer on a feature vector, activation tanh or none.
template <typename S>
class Dense : public Layer<S> {
 public:
  Dense(int64_t in_dim, int64_t out_dim, bool tanh_act)
      : in_(in_dim), out_(out_dim), tanh_(tanh_act),
        w_({out_dim, in_dim}), b_({out_dim}),
        dw_({out_dim, in_dim}), db_({out_dim}) {
    if (in_dim < 1 || out_dim < 1)
      throw ConfigError(cat(name(), ": dimensions must be positive"));
  }

  std::string name() const override { return cat("dense(", out_, " units)"); }

  void init(Rng& rng) override {
    w_ = glorot_uniform_init<S>(rng, in_, out_, {out_, in_});
    b_.fill(S(0));
  }

  Tensor<S> forward(const Tensor<S>& x, const Pass&) override {
    if (x.rank() != 1 || x.dim(0) != in_)
      throw ShapeError(cat(name(), ": expected a vector of ", in_, " features"));
    x_ = x;
    Tensor<S> y({out_});
    y.vec().noalias() = w_.mat(out_, in_) * x.vec() + b_.vec();
    if (tanh_) y.vec() = y.vec().array().tanh();
    y_ = y;
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) override {
    if (dy.rank() != 1 || dy.dim(0) != out_)
      throw ShapeError(cat(name(), ": gradient shape mismatch"));
    Vec<S> dpre = dy.vec();
    if (tanh_) dpre.array() *= S(1) - y_.vec().array().square();
    dw_.mat(out_, in_).noalias() += dpre * x_.vec().transpose();
    db_.vec() += dpre;
    Tensor<S> dx({in_});
    dx.vec().noalias() = w_.mat(out_, in_).transpose() * dpre;
    return dx;
  }

  void visit_params(const ParamVisitor<S>& visit) override {
    visit("W", w_, dw_);
    visit("b", b_, db_);
  }

 private:
  int64_t in_, out_;
  bool tanh_;
  Tensor<S> w_, b_, dw_, db_;
  Tensor<S> x_, y_;
};

// Inverted dropout. Train mode zeroes each value with the given probability
// and scales survivors by 1/(1-rate) so expectations match; infer mode is the
// identity. Works on any tensor shape.
template <typename S>
class Dropout : public Layer<S> {
 public:
  explicit Dropout(double rate) : rate_(rate) {
    if (rate < 0.0 || rate >= 1.0)
      throw ConfigError(cat(name(), ": rate must be in [0, 1), got ", rate));
  }

  std::string name() const override { return cat("dropout(", rate_, ")"); }

  Tensor<S> forward(const Tensor<S>& x, const Pass& pass) override {
    active_ = pass.train && rate_ > 0.0;
    if (!active_) return x;
    if (pass.rng == nullptr)
      throw ConfigError(cat(name(), ": train mode needs an rng"));
    mask_ = Tensor<S>(x.shape());
    const S keep_scale = static_cast<S>(1.0 / (1.0 - rate_));
    Tensor<S> y(x.shape());
    for (int64_t i = 0; i < x.size(); ++i) {
      const S m = pass.rng->uniform() < rate_ ? S(0) : keep_scale;
      mask_[i] = m;
      y[i] = m * x[i];
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) override {
    if (!active_) return dy;
    if (!dy.same_shape(mask_))
      throw ShapeError(cat(name(), ": gradient shape mismatch"));
    Tensor<S> dx(dy.shape());
    for (int64_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * mask_[i];
    return dx;
  }

 private:
  double rate_;
  bool active_ = false;
  Tensor<S> mask_;
};

}  // namespace seqemo

#endif  // SEQEMO_NN_LAYERS_HPP
