#ifndef SEQEMO_NN_ADAM_HPP
#define SEQEMO_NN_ADAM_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "seqemo/tensor.hpp"

namespace seqemo {

struct OptimizerConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const {
    if (learning_rate <= 0)
      throw ConfigError(cat("learning_rate must be positive, got ", learning_rate));
    if (beta1 <= 0 || beta1 >= 1)
      throw ConfigError(cat("beta1 must be in (0,1), got ", beta1));
    if (beta2 <= 0 || beta2 >= 1)
      throw ConfigError(cat("beta2 must be in (0,1), got ", beta2));
    if (epsilon <= 0)
      throw ConfigError(cat("epsilon must be positive, got ", epsilon));
  }
};

template <typename S>
struct AdamState {
  Tensor<S> m;  // first moment, same shape as the parameter
  Tensor<S> v;  // second moment, elementwise >= 0
  int64_t t = 0;

  explicit AdamState(const std::vector<int64_t>& shape) : m(shape), v(shape) {}
  AdamState() = default;
};

// One Adam update with bias correction:
//   m <- b1 m + (1-b1) g        v <- b2 v + (1-b2) g^2
//   theta <- theta - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
template <typename S>
void adam_step(Tensor<S>& param, const Tensor<S>& grad, AdamState<S>& state,
               const OptimizerConfig& cfg) {
  if (!param.same_shape(grad) || !param.same_shape(state.m))
    throw ShapeError("adam_step shape mismatch between param, grad and state");
  state.t += 1;
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  const int64_t n = param.size();
  for (int64_t i = 0; i < n; ++i) {
    const double g = static_cast<double>(grad[i]);
    const double m = b1 * static_cast<double>(state.m[i]) + (1.0 - b1) * g;
    const double v = b2 * static_cast<double>(state.v[i]) + (1.0 - b2) * g * g;
    state.m[i] = static_cast<S>(m);
    state.v[i] = static_cast<S>(v);
    const double mhat = m / c1;
    const double vhat = v / c2;
    param[i] = static_cast<S>(static_cast<double>(param[i]) -
                              cfg.learning_rate * mhat /
                                  (std::sqrt(vhat) + cfg.epsilon));
  }
}

// Optimizer over a named parameter map, one AdamState per tensor.
template <typename S>
class AdamOptimizer {
 public:
  explicit AdamOptimizer(OptimizerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  const OptimizerConfig& config() const { return cfg_; }

  void step(std::map<std::string, Tensor<S>>& params,
            const std::map<std::string, Tensor<S>>& grads) {
    for (auto& [name, param] : params) {
      auto git = grads.find(name);
      if (git == grads.end())
        throw ShapeError(cat("missing gradient for parameter ", name));
      auto sit = states_.find(name);
      if (sit == states_.end())
        sit = states_.emplace(name, AdamState<S>(param.shape())).first;
      adam_step(param, git->second, sit->second, cfg_);
    }
  }

 private:
  OptimizerConfig cfg_;
  std::map<std::string, AdamState<S>> states_;
};

}  // namespace seqemo

#endif  // SEQEMO_NN_ADAM_HPP
