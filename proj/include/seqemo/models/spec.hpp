#ifndef SEQEMO_MODELS_SPEC_HPP
#define SEQEMO_MODELS_SPEC_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace seqemo {

enum class LayerKind {
  conv1d,
  maxpool1d,
  global_maxpool,
  global_avgpool,
  blstm,
  attention,
  last_state,
  dense,
  dropout,
  softmax_output,
};

const char* layer_kind_name(LayerKind kind);
LayerKind parse_layer_kind(const std::string& name);

// One architecture row. Only the fields its kind uses are meaningful; the
// activation is implied by the kind (conv is ReLU, dense is tanh, the softmax
// output projects to logits). `dropout_after` inserts an unnamed dropout
// stage between this row and the next at execution time, which keeps the row
// list identical to the architecture table it mirrors.
struct LayerSpec {
  LayerKind kind = LayerKind::conv1d;
  int64_t filters = 0;   // conv1d output channels
  int64_t width = 0;     // conv1d kernel width
  int64_t stride = 0;    // conv1d stride
  int64_t pool = 0;      // maxpool1d window
  int64_t units = 0;     // blstm units across both directions, or dense units
  double rate = 0.0;     // dropout kind only
  int64_t classes = 0;   // softmax_output only
  double dropout_after = 0.0;

  static LayerSpec conv(int64_t filters, int64_t width, int64_t stride);
  static LayerSpec maxpool(int64_t pool);
  static LayerSpec global_max();
  static LayerSpec global_avg();
  static LayerSpec lstm(int64_t units);
  static LayerSpec attend(int64_t dim);
  static LayerSpec last();
  static LayerSpec fully_connected(int64_t units);
  static LayerSpec drop(double rate);
  static LayerSpec softmax(int64_t classes);
};

// Which sequence-to-vector reduction a recurrent model ends with.
enum class Seq2Vec { attention, last_state, global_max, global_avg };

const char* seq2vec_name(Seq2Vec pooling);

// A full architecture: ordered rows plus the I/O contract. validate() checks
// that dimensions chain, that exactly one row collapses the time axis, and
// that the model ends in a softmax output; it also computes min_input_len,
// the shortest sequence the conv/pool stack accepts.
struct ModelSpec {
  std::string name;
  std::vector<LayerSpec> layers;
  int64_t num_classes = 0;
  int64_t input_dim = 13;
  int64_t min_input_len = 0;  // filled by validate()

  void validate();
};

// Input feature dimension seen by each row, derived by chaining the rows.
// Throws ConfigError when the chain is inconsistent.
std::vector<int64_t> chain_dims(const ModelSpec& spec);

// Four stacked strided convolutions, global max pooling, and a softmax, with
// dropout 0.2 between consecutive rows.
ModelSpec build_deep_cnn(int64_t num_classes);

// Two conv/pool blocks, two bidirectional LSTM layers, a configurable
// sequence-to-vector reduction (attention by default), a tanh dense layer,
// and a softmax. Dropout defaults to off; a positive rate inserts it between
// consecutive rows.
ModelSpec build_clstm_attention(int64_t num_classes,
                                Seq2Vec pooling = Seq2Vec::attention,
                                double dropout = 0.0);

}  // namespace seqemo

#endif  // SEQEMO_MODELS_SPEC_HPP
