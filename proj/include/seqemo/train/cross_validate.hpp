#ifndef SEQEMO_TRAIN_CROSS_VALIDATE_HPP
#define SEQEMO_TRAIN_CROSS_VALIDATE_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <numeric>
#include <thread>
#include <vector>

#include "seqemo/common.hpp"
#include "seqemo/eval/report.hpp"
#include "seqemo/models/model.hpp"
#include "seqemo/train/config.hpp"
#include "seqemo/train/dataset.hpp"
#include "seqemo/train/kfold.hpp"
#include "seqemo/train/trainer.hpp"

namespace seqemo {

template <typename S>
struct CrossValidationResult {
  FoldPlan plan;  // with per-item fold assignment filled in
  std::vector<EvalReport> fold_reports;
  std::vector<TrainHistory> histories;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population deviation over the folds
};

// Called once per finished fold, in fold order, after all folds completed.
template <typename S>
using FoldCallback =
    std::function<void(int64_t fold, Model<S>& model,
                       const FeatureNorm<S>& norm, const TrainHistory& history,
                       const EvalReport& report)>;

namespace detail {

[[noreturn]] inline void rethrow_tagged(int64_t fold, std::exception_ptr ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const ConfigError& e) {
    throw ConfigError(cat("fold ", fold, ": ", e.what()));
  } catch (const NumericError& e) {
    throw NumericError(cat("fold ", fold, ": ", e.what()));
  } catch (const ShapeError& e) {
    throw ShapeError(cat("fold ", fold, ": ", e.what()));
  } catch (const IoError& e) {
    throw IoError(cat("fold ", fold, ": ", e.what()));
  } catch (const DataError& e) {
    throw DataError(cat("fold ", fold, ": ", e.what()));
  } catch (const std::exception& e) {
    throw Error(cat("fold ", fold, ": ", e.what()));
  }
}

}  // namespace detail

// Trains one fresh model per fold on its training split (minus a validation
// carve-out) and evaluates it on the held-out fold. Every per-fold random
// stream derives from the master seed and the fold index alone, so results
// are identical no matter how many worker threads run the folds.
template <typename S>
CrossValidationResult<S> cross_validate(
    const std::function<Model<S>()>& builder, const FeatureDataset<S>& dataset,
    const FoldPlan& plan_in, const TrainConfig& cfg, int64_t workers = 1,
    const FoldCallback<S>& on_fold = nullptr) {
  cfg.validate();
  dataset.validate();
  if (!builder) throw ConfigError("cross_validate needs a model builder");

  CrossValidationResult<S> result;
  result.plan = plan_in;
  Rng split_rng = Rng(cfg.seed).child(1);
  auto splits = kfold_split(dataset.labels(), dataset.speakers(),
                            dataset.num_classes(), result.plan, split_rng);
  const int64_t k = result.plan.k;

  struct FoldOutcome {
    std::unique_ptr<Model<S>> model;
    FeatureNorm<S> norm;
    TrainHistory history;
    EvalReport report;
    std::exception_ptr error;
  };
  std::vector<FoldOutcome> outcomes(static_cast<size_t>(k));

  const auto run_fold = [&](int64_t f) {
    FoldOutcome& out = outcomes[static_cast<size_t>(f)];
    try {
      const uint64_t fold_seed = Rng::mix64(cfg.seed, 7000 + static_cast<uint64_t>(f));
      TrainConfig fold_cfg = cfg;
      fold_cfg.seed = fold_seed;

      FeatureDataset<S> pool = dataset.subset(splits[static_cast<size_t>(f)].train);
      FeatureDataset<S> test = dataset.subset(splits[static_cast<size_t>(f)].test);
      if (cfg.normalize_features) {
        out.norm = compute_feature_norm(pool);
        apply_feature_norm(out.norm, pool);
        apply_feature_norm(out.norm, test);
      }

      std::vector<int64_t> order(pool.items.size());
      std::iota(order.begin(), order.end(), 0);
      Rng val_rng = Rng(fold_seed).child(2);
      val_rng.shuffle(order);
      const int64_t n_val = static_cast<int64_t>(
          std::floor(static_cast<double>(order.size()) * cfg.validation_fraction));
      FeatureDataset<S> val = pool.subset(
          {order.begin(), order.begin() + n_val});
      FeatureDataset<S> tr = pool.subset(
          {order.begin() + n_val, order.end()});

      out.model = std::make_unique<Model<S>>(builder());
      if (out.model->spec().num_classes != dataset.num_classes())
        throw ConfigError(cat("model predicts ", out.model->spec().num_classes,
                              " classes, dataset has ",
                              dataset.num_classes()));
      Rng init_rng = Rng(fold_seed).child(3);
      out.model->init(init_rng);

      out.history = train(*out.model, tr, val, fold_cfg);
      const ScoreResult sc = score_dataset(*out.model, test, fold_cfg);
      out.report = evaluate(test.labels(), sc.predictions, dataset.classes);
    } catch (...) {
      out.error = std::current_exception();
    }
  };

  const int64_t threads = std::max<int64_t>(1, std::min(workers, k));
  if (threads == 1) {
    for (int64_t f = 0; f < k; ++f) run_fold(f);
  } else {
    std::atomic<int64_t> next{0};
    std::vector<std::thread> crew;
    for (int64_t t = 0; t < threads; ++t)
      crew.emplace_back([&]() {
        for (int64_t f = next.fetch_add(1); f < k; f = next.fetch_add(1))
          run_fold(f);
      });
    for (auto& th : crew) th.join();
  }

  for (int64_t f = 0; f < k; ++f)
    if (outcomes[static_cast<size_t>(f)].error)
      detail::rethrow_tagged(f, outcomes[static_cast<size_t>(f)].error);

  double sum = 0.0;
  for (int64_t f = 0; f < k; ++f) {
    FoldOutcome& out = outcomes[static_cast<size_t>(f)];
    result.fold_reports.push_back(out.report);
    result.histories.push_back(out.history);
    result.fold_accuracy.push_back(out.report.accuracy);
    sum += out.report.accuracy;
    if (on_fold) on_fold(f, *out.model, out.norm, out.history, out.report);
  }
  result.mean_accuracy = sum / static_cast<double>(k);
  double sq = 0.0;
  for (double a : result.fold_accuracy) {
    const double d = a - result.mean_accuracy;
    sq += d * d;
  }
  result.std_accuracy = std::sqrt(sq / static_cast<double>(k));
  return result;
}

}  // namespace seqemo

#endif  // SEQEMO_TRAIN_CROSS_VALIDATE_HPP
