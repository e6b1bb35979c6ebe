#ifndef SEQEMO_MODELS_MODEL_HPP
#define SEQEMO_MODELS_MODEL_HPP

#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "seqemo/common.hpp"
#include "seqemo/models/spec.hpp"
#include "seqemo/nn/layers.hpp"
#include "seqemo/nn/ops.hpp"
#include "seqemo/train/batch.hpp"

namespace seqemo {

// Executable model: a ModelSpec's rows instantiated as layers, in order, plus
// the unnamed dropout stages requested by dropout_after. Forward consumes one
// item's feature matrix and yields logits; backward retraces the stages.
// Parameter names are "L<row>.<name>" keyed on the ModelSpec rows, so the
// inserted dropout stages never shift them.
template <typename S>
class Model {
 public:
  explicit Model(ModelSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    const auto in_dims = chain_dims(spec_);
    for (size_t i = 0; i < spec_.layers.size(); ++i) {
      const LayerSpec& l = spec_.layers[i];
      stages_.push_back({static_cast<int64_t>(i), make_layer(l, in_dims[i])});
      if (l.dropout_after > 0.0)
        stages_.push_back({static_cast<int64_t>(i),
                           std::make_unique<Dropout<S>>(l.dropout_after)});
    }
  }

  const ModelSpec& spec() const { return spec_; }

  void init(Rng& rng) {
    for (auto& s : stages_) s.layer->init(rng);
  }

  // valid_len selects how many leading frames are real; passing the full
  // padded length reproduces plain zero-padded execution, while passing the
  // item's true length runs the network on the unpadded sequence.
  Tensor<S> forward(const Tensor<S>& features, int64_t valid_len, const Pass& pass) {
    if (features.rank() != 2 || features.dim(1) != spec_.input_dim)
      throw ShapeError(cat("model ", spec_.name, ": expected (time x ",
                           spec_.input_dim, ") features"));
    const int64_t t = features.dim(0);
    if (valid_len < 1 || valid_len > t)
      throw ShapeError(cat("model ", spec_.name, ": valid length ", valid_len,
                           " outside [1, ", t, "]"));
    if (valid_len < spec_.min_input_len)
      throw DataError(cat("model ", spec_.name, ": sequence of ", valid_len,
                          " frames is shorter than the model minimum ",
                          spec_.min_input_len));

    Tensor<S> x;
    if (valid_len == t) {
      x = features;
    } else {
      x = Tensor<S>({valid_len, spec_.input_dim});
      std::memcpy(x.data(), features.data(),
                  static_cast<size_t>(valid_len * spec_.input_dim) * sizeof(S));
    }
    for (auto& s : stages_) x = s.layer->forward(x, pass);
    return x;  // logits
  }

  Tensor<S> backward(const Tensor<S>& dlogits) {
    Tensor<S> g = dlogits;
    for (auto it = stages_.rbegin(); it != stages_.rend(); ++it)
      g = (*it).layer->backward(g);
    return g;
  }

  void visit_params(const ParamVisitor<S>& visit) {
    for (auto& s : stages_) {
      const int64_t row = s.row;
      s.layer->visit_params(
          [&](const std::string& n, Tensor<S>& p, Tensor<S>& g) {
            visit(cat("L", row, ".", n), p, g);
          });
    }
  }

  void zero_grad() {
    for (auto& s : stages_) s.layer->zero_grad();
  }

  int64_t param_count() {
    int64_t n = 0;
    visit_params([&](const std::string&, Tensor<S>& p, Tensor<S>&) { n += p.size(); });
    return n;
  }

 private:
  struct Stage {
    int64_t row;
    std::unique_ptr<Layer<S>> layer;
  };

  static std::unique_ptr<Layer<S>> make_layer(const LayerSpec& l, int64_t in_dim) {
    switch (l.kind) {
      case LayerKind::conv1d:
        return std::make_unique<Conv1d<S>>(in_dim, l.filters, l.width, l.stride,
                                           /*relu=*/true);
      case LayerKind::maxpool1d:
        return std::make_unique<MaxPool1d<S>>(l.pool);
      case LayerKind::global_maxpool:
        return std::make_unique<GlobalMaxPool<S>>();
      case LayerKind::global_avgpool:
        return std::make_unique<GlobalAvgPool<S>>();
      case LayerKind::blstm:
        return std::make_unique<Blstm<S>>(in_dim, l.units / 2);
      case LayerKind::attention:
        return std::make_unique<AttentionPool<S>>(l.units);
      case LayerKind::last_state:
        return std::make_unique<LastState<S>>();
      case LayerKind::dense:
        return std::make_unique<Dense<S>>(in_dim, l.units, /*tanh=*/true);
      case LayerKind::dropout:
        return std::make_unique<Dropout<S>>(l.rate);
      case LayerKind::softmax_output:
        return std::make_unique<Dense<S>>(in_dim, l.classes, /*tanh=*/false);
    }
    throw ConfigError("unknown layer kind");
  }

  ModelSpec spec_;
  std::vector<Stage> stages_;
};

template <typename S>
struct ForwardResult {
  Tensor<S> logits;  // (batch, classes)
  Tensor<S> probs;   // (batch, classes), rows sum to 1
};

// Runs every item of a batch through the model. With mask_lengths the items
// are evaluated on their true lengths; otherwise the full padded length flows
// through the network.
template <typename S>
ForwardResult<S> model_forward(Model<S>& model, const SequenceBatch<S>& batch,
                               const Pass& pass, bool mask_lengths) {
  const int64_t b = batch.size();
  const int64_t classes = model.spec().num_classes;
  ForwardResult<S> out;
  out.logits = Tensor<S>({b, classes});
  for (int64_t i = 0; i < b; ++i) {
    Tensor<S> item = batch.item(i);
    const int64_t valid = mask_lengths ? batch.lengths[static_cast<size_t>(i)]
                                       : batch.padded_len();
    Tensor<S> logits = model.forward(item, valid, pass);
    std::memcpy(out.logits.data() + i * classes, logits.data(),
                static_cast<size_t>(classes) * sizeof(S));
  }
  out.probs = softmax(out.logits, 1);
  return out;
}

}  // namespace seqemo

#endif  // SEQEMO_MODELS_MODEL_HPP
