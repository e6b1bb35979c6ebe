#ifndef SEQEMO_TRAIN_TRAINER_HPP
#define SEQEMO_TRAIN_TRAINER_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "seqemo/common.hpp"
#include "seqemo/models/model.hpp"
#include "seqemo/nn/adam.hpp"
#include "seqemo/nn/ops.hpp"
#include "seqemo/train/batch.hpp"
#include "seqemo/train/config.hpp"
#include "seqemo/train/dataset.hpp"

namespace seqemo {

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> train_acc;
  std::vector<double> val_loss;  // NaN entries when no validation set given
  std::vector<double> val_acc;
  int64_t best_epoch = -1;  // index into the vectors above

  int64_t epochs() const { return static_cast<int64_t>(train_loss.size()); }
};

// Tabular per-epoch file; epochs are numbered from 1 in the file.
void write_history(const TrainHistory& history, const std::string& path);

// JSON echo of every field so a run can be reconstructed later.
void write_config_echo(const TrainConfig& cfg, const std::string& path);

struct ScoreResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<int64_t> predictions;  // one per item, dataset order
};

// Inference pass over a dataset: mean cross-entropy, accuracy, argmax labels.
template <typename S>
ScoreResult score_dataset(Model<S>& model, const FeatureDataset<S>& ds,
                          const TrainConfig& cfg) {
  ds.validate();
  ScoreResult result;
  double loss_sum = 0.0;
  int64_t correct = 0, seen = 0;
  Pass infer;
  const int64_t classes = model.spec().num_classes;
  for (auto& batch : make_eval_batches(ds, cfg)) {
    auto out = model_forward(model, batch, infer, cfg.mask_attention);
    for (int64_t i = 0; i < batch.size(); ++i) {
      const S* p = out.probs.data() + i * classes;
      int64_t pred = 0;
      for (int64_t c = 1; c < classes; ++c)
        if (p[c] > p[pred]) pred = c;
      result.predictions.push_back(pred);
      const double hit = std::max(static_cast<double>(p[batch.labels[i]]),
                                  kProbFloor);
      loss_sum += -std::log(hit);
      correct += pred == batch.labels[i] ? 1 : 0;
      seen += 1;
    }
  }
  result.loss = loss_sum / seen;
  result.accuracy = static_cast<double>(correct) / static_cast<double>(seen);
  return result;
}

// Adam with cross-entropy over shuffled zero-padded batches. Stops once the
// validation loss has failed to improve for more than early_stop_patience
// epochs and leaves the model holding its best-validation-epoch parameters.
template <typename S>
TrainHistory train(Model<S>& model, const FeatureDataset<S>& train_set,
                   const FeatureDataset<S>& val_set, const TrainConfig& cfg) {
  cfg.validate();
  train_set.validate();
  const bool has_val = !val_set.items.empty();
  if (has_val) val_set.validate();
  const int64_t classes = model.spec().num_classes;
  if (classes != train_set.num_classes())
    throw ConfigError(cat("model predicts ", classes, " classes, dataset has ",
                          train_set.num_classes()));

  Rng root(cfg.seed);
  std::map<std::string, AdamState<S>> opt_state;
  TrainHistory history;
  double best_val = std::numeric_limits<double>::infinity();
  int64_t bad_epochs = 0;
  std::vector<Tensor<S>> best_params;
  const auto snapshot = [&]() {
    best_params.clear();
    model.visit_params([&](const std::string&, Tensor<S>& p, Tensor<S>&) {
      best_params.push_back(p);
    });
  };
  const auto restore = [&]() {
    size_t i = 0;
    model.visit_params([&](const std::string&, Tensor<S>& p, Tensor<S>&) {
      p = best_params[i++];
    });
  };

  for (int64_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    Rng shuffle_rng = root.child(static_cast<uint64_t>(2 * epoch));
    Rng dropout_rng = root.child(static_cast<uint64_t>(2 * epoch + 1));
    Pass pass{true, &dropout_rng};
    auto batches = make_batches(train_set, cfg, shuffle_rng);

    double loss_sum = 0.0;
    int64_t correct = 0, seen = 0;
    for (size_t b = 0; b < batches.size(); ++b) {
      auto& batch = batches[b];
      const int64_t bsize = batch.size();
      model.zero_grad();
      double batch_loss = 0.0;
      try {
        for (int64_t i = 0; i < bsize; ++i) {
          Tensor<S> x = batch.item(i);
          const int64_t valid =
              cfg.mask_attention ? batch.lengths[i] : batch.padded_len();
          Tensor<S> logits = model.forward(x, valid, pass);
          Tensor<S> row({1, classes}, logits.values());
          Tensor<S> probs = softmax(row, 1);
          const int64_t label = batch.labels[i];
          batch_loss += -std::log(
              std::max(static_cast<double>(probs[label]), kProbFloor));
          int64_t pred = 0;
          for (int64_t c = 1; c < classes; ++c)
            if (probs[c] > probs[pred]) pred = c;
          correct += pred == label ? 1 : 0;

          Tensor<S> dlogits({classes});
          for (int64_t c = 0; c < classes; ++c)
            dlogits[c] = (probs[c] - static_cast<S>(c == label ? 1 : 0)) /
                         static_cast<S>(bsize);
          model.backward(dlogits);
        }
      } catch (const NumericError& e) {
        throw NumericError(cat("epoch ", epoch + 1, ", batch ", b + 1, ": ",
                               e.what()));
      }
      batch_loss /= static_cast<double>(bsize);
      if (!std::isfinite(batch_loss))
        throw NumericError(cat("training loss became non-finite (", batch_loss,
                               ") at epoch ", epoch + 1, ", batch ", b + 1));
      loss_sum += batch_loss * static_cast<double>(bsize);
      seen += bsize;

      if (cfg.grad_clip_norm > 0.0) {
        double sq = 0.0;
        model.visit_params([&](const std::string&, Tensor<S>&, Tensor<S>& g) {
          for (int64_t j = 0; j < g.size(); ++j) {
            const double v = static_cast<double>(g[j]);
            sq += v * v;
          }
        });
        const double norm = std::sqrt(sq);
        if (norm > cfg.grad_clip_norm) {
          const S scale = static_cast<S>(cfg.grad_clip_norm / norm);
          model.visit_params(
              [&](const std::string&, Tensor<S>&, Tensor<S>& g) {
                for (int64_t j = 0; j < g.size(); ++j) g[j] *= scale;
              });
        }
      }
      model.visit_params([&](const std::string& name, Tensor<S>& p,
                             Tensor<S>& g) {
        auto it = opt_state.find(name);
        if (it == opt_state.end())
          it = opt_state.emplace(name, AdamState<S>(p.shape())).first;
        adam_step(p, g, it->second, cfg.optimizer);
      });
    }
    history.train_loss.push_back(loss_sum / static_cast<double>(seen));
    history.train_acc.push_back(static_cast<double>(correct) /
                                static_cast<double>(seen));

    if (has_val) {
      const ScoreResult val = score_dataset(model, val_set, cfg);
      if (!std::isfinite(val.loss))
        throw NumericError(cat("validation loss became non-finite (", val.loss,
                               ") after epoch ", epoch + 1));
      history.val_loss.push_back(val.loss);
      history.val_acc.push_back(val.accuracy);
      if (val.loss < best_val) {
        best_val = val.loss;
        history.best_epoch = epoch;
        bad_epochs = 0;
        snapshot();
      } else {
        bad_epochs += 1;
        if (bad_epochs > cfg.early_stop_patience) break;
      }
    } else {
      history.val_loss.push_back(std::numeric_limits<double>::quiet_NaN());
      history.val_acc.push_back(std::numeric_limits<double>::quiet_NaN());
      history.best_epoch = epoch;
    }
  }

  if (has_val && !best_params.empty()) restore();
  return history;
}

}  // namespace seqemo

#endif  // SEQEMO_TRAIN_TRAINER_HPP
