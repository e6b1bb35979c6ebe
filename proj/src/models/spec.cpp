#include "seqemo/models/spec.hpp"

#include <unordered_map>

#include "seqemo/common.hpp"

namespace seqemo {

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv1d: return "conv1d";
    case LayerKind::maxpool1d: return "maxpool1d";
    case LayerKind::global_maxpool: return "global_maxpool";
    case LayerKind::global_avgpool: return "global_avgpool";
    case LayerKind::blstm: return "blstm";
    case LayerKind::attention: return "attention";
    case LayerKind::last_state: return "last_state";
    case LayerKind::dense: return "dense";
    case LayerKind::dropout: return "dropout";
    case LayerKind::softmax_output: return "softmax_output";
  }
  throw ConfigError("unknown layer kind");
}

LayerKind parse_layer_kind(const std::string& name) {
  static const std::unordered_map<std::string, LayerKind> kMap = {
      {"conv1d", LayerKind::conv1d},
      {"maxpool1d", LayerKind::maxpool1d},
      {"global_maxpool", LayerKind::global_maxpool},
      {"global_avgpool", LayerKind::global_avgpool},
      {"blstm", LayerKind::blstm},
      {"attention", LayerKind::attention},
      {"last_state", LayerKind::last_state},
      {"dense", LayerKind::dense},
      {"dropout", LayerKind::dropout},
      {"softmax_output", LayerKind::softmax_output},
  };
  auto it = kMap.find(name);
  if (it == kMap.end()) throw ConfigError(cat("unknown layer kind \"", name, "\""));
  return it->second;
}

const char* seq2vec_name(Seq2Vec pooling) {
  switch (pooling) {
    case Seq2Vec::attention: return "attention";
    case Seq2Vec::last_state: return "last_state";
    case Seq2Vec::global_max: return "global_max";
    case Seq2Vec::global_avg: return "global_avg";
  }
  throw ConfigError("unknown pooling");
}

LayerSpec LayerSpec::conv(int64_t filters, int64_t width, int64_t stride) {
  LayerSpec s;
  s.kind = LayerKind::conv1d;
  s.filters = filters;
  s.width = width;
  s.stride = stride;
  return s;
}

LayerSpec LayerSpec::maxpool(int64_t pool) {
  LayerSpec s;
  s.kind = LayerKind::maxpool1d;
  s.pool = pool;
  return s;
}

LayerSpec LayerSpec::global_max() {
  LayerSpec s;
  s.kind = LayerKind::global_maxpool;
  return s;
}

LayerSpec LayerSpec::global_avg() {
  LayerSpec s;
  s.kind = LayerKind::global_avgpool;
  return s;
}

LayerSpec LayerSpec::lstm(int64_t units) {
  LayerSpec s;
  s.kind = LayerKind::blstm;
  s.units = units;
  return s;
}

LayerSpec LayerSpec::attend(int64_t dim) {
  LayerSpec s;
  s.kind = LayerKind::attention;
  s.units = dim;
  return s;
}

LayerSpec LayerSpec::last() {
  LayerSpec s;
  s.kind = LayerKind::last_state;
  return s;
}

LayerSpec LayerSpec::fully_connected(int64_t units) {
  LayerSpec s;
  s.kind = LayerKind::dense;
  s.units = units;
  return s;
}

LayerSpec LayerSpec::drop(double rate) {
  LayerSpec s;
  s.kind = LayerKind::dropout;
  s.rate = rate;
  return s;
}

LayerSpec LayerSpec::softmax(int64_t classes) {
  LayerSpec s;
  s.kind = LayerKind::softmax_output;
  s.classes = classes;
  return s;
}

std::vector<int64_t> chain_dims(const ModelSpec& spec) {
  std::vector<int64_t> in_dims;
  in_dims.reserve(spec.layers.size());
  bool seq = true;
  int64_t dim = spec.input_dim;

  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    const std::string where = cat("row ", i, " (", layer_kind_name(l.kind), ")");
    in_dims.push_back(dim);
    switch (l.kind) {
      case LayerKind::conv1d:
        if (!seq) throw ConfigError(cat(where, ": needs a sequence input"));
        if (l.filters < 1 || l.width < 1 || l.stride < 1)
          throw ConfigError(cat(where, ": filters, width, stride must be positive"));
        dim = l.filters;
        break;
      case LayerKind::maxpool1d:
        if (!seq) throw ConfigError(cat(where, ": needs a sequence input"));
        if (l.pool < 1) throw ConfigError(cat(where, ": pool must be positive"));
        break;
      case LayerKind::blstm:
        if (!seq) throw ConfigError(cat(where, ": needs a sequence input"));
        if (l.units < 2 || l.units % 2 != 0)
          throw ConfigError(cat(where, ": units must be even and positive"));
        dim = l.units;
        break;
      case LayerKind::global_maxpool:
      case LayerKind::global_avgpool:
      case LayerKind::last_state:
        if (!seq) throw ConfigError(cat(where, ": needs a sequence input"));
        seq = false;
        break;
      case LayerKind::attention:
        if (!seq) throw ConfigError(cat(where, ": needs a sequence input"));
        if (l.units != dim)
          throw ConfigError(cat(where, ": dimension ", l.units,
                                " does not match incoming features ", dim));
        seq = false;
        break;
      case LayerKind::dense:
        if (seq) throw ConfigError(cat(where, ": needs a pooled vector input"));
        if (l.units < 1) throw ConfigError(cat(where, ": units must be positive"));
        dim = l.units;
        break;
      case LayerKind::dropout:
        if (l.rate < 0.0 || l.rate >= 1.0)
          throw ConfigError(cat(where, ": rate must be in [0, 1)"));
        break;
      case LayerKind::softmax_output:
        if (seq) throw ConfigError(cat(where, ": needs a pooled vector input"));
        if (l.classes < 2) throw ConfigError(cat(where, ": needs at least 2 classes"));
        dim = l.classes;
        break;
    }
    if (l.dropout_after < 0.0 || l.dropout_after >= 1.0)
      throw ConfigError(cat(where, ": dropout_after must be in [0, 1)"));
  }
  return in_dims;
}

void ModelSpec::validate() {
  if (num_classes < 2)
    throw ConfigError(cat("model needs at least 2 classes, got ", num_classes));
  if (input_dim < 1)
    throw ConfigError(cat("input dimension must be positive, got ", input_dim));
  if (layers.empty()) throw ConfigError("model has no layers");

  chain_dims(*this);

  int seq2vec = 0, softmax = 0;
  for (const auto& l : layers) {
    switch (l.kind) {
      case LayerKind::global_maxpool:
      case LayerKind::global_avgpool:
      case LayerKind::attention:
      case LayerKind::last_state:
        ++seq2vec;
        break;
      case LayerKind::softmax_output:
        ++softmax;
        if (l.classes != num_classes)
          throw ConfigError(cat("softmax classes ", l.classes,
                                " disagree with model num_classes ", num_classes));
        break;
      default:
        break;
    }
  }
  if (seq2vec != 1)
    throw ConfigError(cat("model needs exactly one sequence-to-vector layer, has ",
                          seq2vec));
  if (softmax != 1 || layers.back().kind != LayerKind::softmax_output)
    throw ConfigError("model must end with exactly one softmax_output");

  // Shortest accepted input: walk the time-axis constraints backwards from a
  // single frame at the reduction.
  int64_t need = 1;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    switch (it->kind) {
      case LayerKind::conv1d:
        // smallest T with (T - width)/stride + 1 >= need
        need = it->width + it->stride * (need - 1);
        break;
      case LayerKind::maxpool1d:
        // smallest T with floor(T/pool) >= need, and never below the window
        need = it->pool * need;
        break;
      default:
        break;
    }
  }
  min_input_len = need;
}

ModelSpec build_deep_cnn(int64_t num_classes) {
  ModelSpec spec;
  spec.name = "deep_cnn";
  spec.num_classes = num_classes;
  spec.layers = {
      LayerSpec::conv(500, 5, 1),
      LayerSpec::conv(500, 7, 2),
      LayerSpec::conv(500, 1, 2),
      LayerSpec::conv(500, 1, 1),
      LayerSpec::global_max(),
      LayerSpec::softmax(num_classes),
  };
  for (size_t i = 0; i + 1 < spec.layers.size(); ++i)
    spec.layers[i].dropout_after = 0.2;
  spec.validate();
  return spec;
}

ModelSpec build_clstm_attention(int64_t num_classes, Seq2Vec pooling,
                                double dropout) {
  ModelSpec spec;
  spec.num_classes = num_classes;
  spec.layers = {
      LayerSpec::conv(256, 5, 1),
      LayerSpec::maxpool(2),
      LayerSpec::conv(64, 5, 1),
      LayerSpec::maxpool(2),
      LayerSpec::lstm(128),
      LayerSpec::lstm(128),
      LayerSpec(),  // placeholder, replaced below
      LayerSpec::fully_connected(64),
      LayerSpec::softmax(num_classes),
  };
  switch (pooling) {
    case Seq2Vec::attention:
      spec.name = "clstm_attention";
      spec.layers[6] = LayerSpec::attend(128);
      break;
    case Seq2Vec::last_state:
      spec.name = "clstm_last_state";
      spec.layers[6] = LayerSpec::last();
      break;
    case Seq2Vec::global_max:
      spec.name = "clstm_global_max";
      spec.layers[6] = LayerSpec::global_max();
      break;
    case Seq2Vec::global_avg:
      spec.name = "clstm_global_avg";
      spec.layers[6] = LayerSpec::global_avg();
      break;
  }
  if (dropout > 0.0)
    for (size_t i = 0; i + 1 < spec.layers.size(); ++i)
      spec.layers[i].dropout_after = dropout;
  spec.validate();
  return spec;
}

}  // namespace seqemo
