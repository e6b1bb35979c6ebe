#include "pipeline.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "seqemo/audio/wav.hpp"
#include "seqemo/data/feature_cache.hpp"
#include "seqemo/dsp/mfcc.hpp"
#include "seqemo/eval/report.hpp"
#include "seqemo/models/checkpoint.hpp"
#include "seqemo/train/cross_validate.hpp"
#include "seqemo/train/trainer.hpp"

namespace seqemo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(cat("cannot open ", path, " for writing"));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out.good()) throw IoError(cat("failed while writing ", path));
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(cat("cannot create ", dir, ": ", ec.message()));
}

void write_json(const json& j, const std::string& path) {
  write_text_file(path, j.dump(2) + "\n");
}

json train_cfg_json(const TrainConfig& cfg) {
  json j;
  j["batch_size"] = cfg.batch_size;
  j["optimizer"] = {{"learning_rate", cfg.optimizer.learning_rate},
                    {"beta1", cfg.optimizer.beta1},
                    {"beta2", cfg.optimizer.beta2},
                    {"epsilon", cfg.optimizer.epsilon}};
  j["max_epochs"] = cfg.max_epochs;
  j["early_stop_patience"] = cfg.early_stop_patience;
  j["seed"] = std::to_string(cfg.seed);
  j["padding_mode"] = padding_mode_name(cfg.padding_mode);
  j["mask_attention"] = cfg.mask_attention;
  j["validation_fraction"] = cfg.validation_fraction;
  j["normalize_features"] = cfg.normalize_features;
  j["grad_clip_norm"] = cfg.grad_clip_norm;
  j["max_frames"] = cfg.max_frames;
  return j;
}

FeatureMatrix features_for_file(const std::string& wav_path) {
  WavReadOptions opts;
  opts.allow_resample = true;
  return mfcc_extract(read_wav(wav_path, opts));
}

CheckpointMeta meta_for(const TrainConfig& cfg,
                        const std::vector<std::string>& classes,
                        int64_t best_epoch, int64_t fold,
                        const FeatureNorm<float>* norm) {
  CheckpointMeta meta;
  meta.seed = cfg.seed;
  meta.epoch = best_epoch;
  meta.fold = fold;
  meta.classes = classes;
  if (norm != nullptr) {
    meta.has_feature_norm = true;
    meta.feature_mean = norm->mean;
    meta.feature_std = norm->stdev;
  }
  return meta;
}

FeatureNorm<float> norm_from_meta(const CheckpointMeta& meta) {
  FeatureNorm<float> norm;
  norm.mean = meta.feature_mean;
  norm.stdev = meta.feature_std;
  return norm;
}

// Validation carve-out shared by train and cross-validation so a standalone
// run and a fold with the same seed make the same split.
void split_validation(const FeatureDataset<float>& pool, const TrainConfig& cfg,
                      FeatureDataset<float>& tr, FeatureDataset<float>& val) {
  std::vector<int64_t> order(pool.items.size());
  std::iota(order.begin(), order.end(), 0);
  Rng val_rng = Rng(cfg.seed).child(2);
  val_rng.shuffle(order);
  const int64_t n_val = static_cast<int64_t>(std::floor(
      static_cast<double>(order.size()) * cfg.validation_fraction));
  val = pool.subset({order.begin(), order.begin() + n_val});
  tr = pool.subset({order.begin() + n_val, order.end()});
}

}  // namespace

ModelSpec arch_spec(const std::string& arch, int64_t classes, double dropout) {
  if (arch == "cnn") {
    if (dropout != 0.0)
      throw ConfigError("the cnn architecture fixes its own dropout rate");
    return build_deep_cnn(classes);
  }
  if (arch == "clstm-attn")
    return build_clstm_attention(classes, Seq2Vec::attention, dropout);
  if (arch == "clstm-last")
    return build_clstm_attention(classes, Seq2Vec::last_state, dropout);
  if (arch == "clstm-gmax")
    return build_clstm_attention(classes, Seq2Vec::global_max, dropout);
  if (arch == "clstm-gavg")
    return build_clstm_attention(classes, Seq2Vec::global_avg, dropout);
  throw ConfigError(cat("unknown architecture \"", arch,
                        "\", expected cnn, clstm-attn, clstm-last, ",
                        "clstm-gmax or clstm-gavg"));
}

std::string cache_name(const std::string& rel_path) {
  std::string name = rel_path;
  for (char& c : name)
    if (c == '/' || c == '\\') c = '_';
  const size_t dot = name.rfind('.');
  if (dot != std::string::npos && dot > 0) name.resize(dot);
  return name + ".mfcc";
}

FeatureDataset<float> load_dataset(const Manifest& m,
                                   const std::string& cache_dir) {
  FeatureDataset<float> ds;
  ds.classes = m.classes;
  ds.items.reserve(m.entries.size());
  for (const auto& entry : m.entries) {
    LabeledSequence<float> item;
    if (!cache_dir.empty()) {
      item.features = time_major(feature_cache_read(
          (fs::path(cache_dir) / cache_name(entry.path)).string()));
    } else {
      item.features = time_major(features_for_file(m.resolved_path(entry)));
    }
    item.label = m.label_index(entry.label);
    item.speaker = entry.speaker;
    ds.items.push_back(std::move(item));
  }
  return ds;
}

void cmd_synth(const SynthOptions& opt) {
  opt.spec.validate();
  ensure_dir(opt.out);
  const Manifest m = generate_synth_dataset(opt.spec, opt.out);

  json j;
  j["subcommand"] = "synth";
  j["out"] = opt.out;
  j["num_classes"] = opt.spec.num_classes;
  j["items_per_class"] = opt.spec.items_per_class;
  j["min_duration_s"] = opt.spec.min_duration_s;
  j["max_duration_s"] = opt.spec.max_duration_s;
  j["noise_level"] = opt.spec.noise_level;
  j["sample_rate"] = opt.spec.sample_rate;
  j["num_speakers"] = opt.spec.num_speakers;
  j["seed"] = std::to_string(opt.spec.seed);
  write_json(j, (fs::path(opt.out) / "config.json").string());

  std::cout << "wrote " << m.entries.size() << " clips and manifest.csv to "
            << opt.out << "\n";
}

void cmd_extract(const ExtractOptions& opt) {
  if (opt.workers < 1)
    throw ConfigError(cat("workers must be at least 1, got ", opt.workers));
  const Manifest m = load_manifest(opt.manifest);
  ensure_dir(opt.out);

  const int64_t n = static_cast<int64_t>(m.entries.size());
  std::vector<std::string> errors(static_cast<size_t>(n));
  std::vector<int64_t> frames(static_cast<size_t>(n), 0);
  const auto extract_one = [&](int64_t i) {
    const auto& entry = m.entries[static_cast<size_t>(i)];
    try {
      const FeatureMatrix fm = features_for_file(m.resolved_path(entry));
      feature_cache_write(
          fm, (fs::path(opt.out) / cache_name(entry.path)).string());
      frames[static_cast<size_t>(i)] = fm.num_frames();
    } catch (const std::exception& e) {
      errors[static_cast<size_t>(i)] = e.what();
    }
  };

  const int64_t threads = std::max<int64_t>(1, std::min(opt.workers, n));
  if (threads == 1) {
    for (int64_t i = 0; i < n; ++i) extract_one(i);
  } else {
    std::atomic<int64_t> next{0};
    std::vector<std::thread> crew;
    for (int64_t t = 0; t < threads; ++t)
      crew.emplace_back([&]() {
        for (int64_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
          extract_one(i);
      });
    for (auto& th : crew) th.join();
  }

  std::ostringstream index;
  index << "path,cache,frames\n";
  int64_t failed = 0;
  for (int64_t i = 0; i < n; ++i) {
    const auto& entry = m.entries[static_cast<size_t>(i)];
    if (errors[static_cast<size_t>(i)].empty()) {
      index << entry.path << ',' << cache_name(entry.path) << ','
            << frames[static_cast<size_t>(i)] << '\n';
    } else {
      failed += 1;
      std::cerr << "extract: " << entry.path << ": "
                << errors[static_cast<size_t>(i)] << "\n";
    }
  }
  write_text_file((fs::path(opt.out) / "index.csv").string(), index.str());

  json j;
  j["subcommand"] = "extract";
  j["manifest"] = opt.manifest;
  j["out"] = opt.out;
  j["workers"] = opt.workers;
  write_json(j, (fs::path(opt.out) / "config.json").string());

  std::cout << "cached " << (n - failed) << " of " << n << " files to "
            << opt.out << "\n";
  if (failed > 0)
    throw Error(cat(failed, " of ", n, " files failed to extract"));
}

void cmd_train(const TrainOptions& opt) {
  opt.cfg.validate();
  arch_spec(opt.arch, 2, opt.dropout);  // reject bad names before loading data
  const Manifest m = load_manifest(opt.manifest);
  FeatureDataset<float> pool = load_dataset(m, opt.cache);
  pool.validate();
  ensure_dir(opt.out);

  FeatureNorm<float> norm;
  if (opt.cfg.normalize_features) {
    norm = compute_feature_norm(pool);
    apply_feature_norm(norm, pool);
  }
  FeatureDataset<float> tr, val;
  split_validation(pool, opt.cfg, tr, val);

  Model<float> model(
      arch_spec(opt.arch, pool.num_classes(), opt.dropout));
  Rng init_rng = Rng(opt.cfg.seed).child(3);
  model.init(init_rng);
  const TrainHistory history = train(model, tr, val, opt.cfg);

  save_checkpoint(model,
                  meta_for(opt.cfg, pool.classes, history.best_epoch, -1,
                           opt.cfg.normalize_features ? &norm : nullptr),
                  (fs::path(opt.out) / "checkpoint.ckpt").string());
  write_history(history, (fs::path(opt.out) / "history.csv").string());

  json j;
  j["subcommand"] = "train";
  j["manifest"] = opt.manifest;
  j["cache"] = opt.cache;
  j["out"] = opt.out;
  j["arch"] = opt.arch;
  j["dropout"] = opt.dropout;
  j["train"] = train_cfg_json(opt.cfg);
  write_json(j, (fs::path(opt.out) / "config.json").string());

  std::cout << "trained " << opt.arch << " for " << history.epochs()
            << " epochs, best epoch " << (history.best_epoch + 1) << "\n";
  if (!history.val_loss.empty() && history.best_epoch >= 0 &&
      !val.items.empty())
    std::cout << "validation accuracy "
              << fixed4(history.val_acc[static_cast<size_t>(
                     history.best_epoch)])
              << "\n";
  std::cout << "checkpoint " << (fs::path(opt.out) / "checkpoint.ckpt").string()
            << "\n";
}

void cmd_xval(const XvalOptions& opt) {
  opt.cfg.validate();
  if (opt.workers < 1)
    throw ConfigError(cat("workers must be at least 1, got ", opt.workers));
  arch_spec(opt.arch, 2, opt.dropout);  // reject bad names before loading data
  const Manifest m = load_manifest(opt.manifest);
  FeatureDataset<float> ds = load_dataset(m, opt.cache);
  ds.validate();
  ensure_dir(opt.out);

  const int64_t classes = ds.num_classes();
  const double dropout = opt.dropout;
  const std::string arch = opt.arch;
  const auto builder = [arch, classes, dropout]() {
    return Model<float>(arch_spec(arch, classes, dropout));
  };

  const auto on_fold = [&](int64_t fold, Model<float>& model,
                           const FeatureNorm<float>& norm,
                           const TrainHistory& history,
                           const EvalReport& report) {
    const fs::path dir = fs::path(opt.out) / cat("fold_", fold + 1);
    ensure_dir(dir.string());
    emit_report(report, dir.string());
    write_history(history, (dir / "history.csv").string());
    TrainConfig fold_cfg = opt.cfg;
    fold_cfg.seed = Rng::mix64(opt.cfg.seed, 7000 + static_cast<uint64_t>(fold));
    save_checkpoint(model,
                    meta_for(fold_cfg, ds.classes, history.best_epoch, fold,
                             opt.cfg.normalize_features ? &norm : nullptr),
                    (dir / "checkpoint.ckpt").string());
  };

  const auto result = cross_validate<float>(builder, ds, opt.plan, opt.cfg,
                                            opt.workers, on_fold);

  emit_fold_summary(result.fold_accuracy,
                    (fs::path(opt.out) / "folds.csv").string());
  std::ostringstream summary;
  summary << "folds " << result.plan.k << '\n'
          << "mean_accuracy " << fixed4(result.mean_accuracy) << '\n'
          << "std_accuracy " << fixed4(result.std_accuracy) << '\n';
  write_text_file((fs::path(opt.out) / "summary.txt").string(), summary.str());

  json j;
  j["subcommand"] = "xval";
  j["manifest"] = opt.manifest;
  j["cache"] = opt.cache;
  j["out"] = opt.out;
  j["arch"] = opt.arch;
  j["dropout"] = opt.dropout;
  j["folds"] = opt.plan.k;
  j["fold_mode"] = fold_mode_name(opt.plan.mode);
  j["workers"] = opt.workers;
  j["train"] = train_cfg_json(opt.cfg);
  write_json(j, (fs::path(opt.out) / "config.json").string());

  for (size_t f = 0; f < result.fold_accuracy.size(); ++f)
    std::cout << "fold " << (f + 1) << " accuracy "
              << fixed4(result.fold_accuracy[f]) << "\n";
  std::cout << "mean accuracy " << fixed4(result.mean_accuracy) << " (std "
            << fixed4(result.std_accuracy) << ")\n";
}

void cmd_eval(const EvalOptions& opt) {
  const LoadedCheckpoint loaded = load_checkpoint(opt.checkpoint);
  const Manifest m = load_manifest(opt.manifest);
  if (!loaded.meta.classes.empty() && loaded.meta.classes != m.classes)
    throw DataError(
        cat("checkpoint was trained on different classes than the manifest ",
            "lists"));
  FeatureDataset<float> ds = load_dataset(m, opt.cache);
  ds.validate();
  if (loaded.meta.has_feature_norm) {
    const FeatureNorm<float> norm = norm_from_meta(loaded.meta);
    apply_feature_norm(norm, ds);
  }
  ensure_dir(opt.out);

  TrainConfig cfg;
  cfg.seed = loaded.meta.seed;
  const ScoreResult sc = score_dataset(*loaded.model, ds, cfg);
  const EvalReport report = evaluate(ds.labels(), sc.predictions, ds.classes);
  emit_report(report, opt.out);

  json j;
  j["subcommand"] = "eval";
  j["manifest"] = opt.manifest;
  j["cache"] = opt.cache;
  j["checkpoint"] = opt.checkpoint;
  j["out"] = opt.out;
  write_json(j, (fs::path(opt.out) / "config.json").string());

  std::cout << "evaluated " << report.total << " items, accuracy "
            << fixed4(report.accuracy) << "\n";
}

void cmd_predict(const PredictOptions& opt) {
  const LoadedCheckpoint loaded = load_checkpoint(opt.checkpoint);
  Tensor<float> features = time_major(features_for_file(opt.wav));
  if (loaded.meta.has_feature_norm) {
    const FeatureNorm<float> norm = norm_from_meta(loaded.meta);
    apply_feature_norm(norm, features);
  }

  Pass infer;
  Tensor<float> logits =
      loaded.model->forward(features, features.dim(0), infer);
  const int64_t classes = loaded.spec.num_classes;
  Tensor<float> row({1, classes}, logits.values());
  Tensor<float> probs = softmax(row, 1);

  std::vector<std::string> names = loaded.meta.classes;
  if (static_cast<int64_t>(names.size()) != classes) {
    names.clear();
    for (int64_t c = 0; c < classes; ++c)
      names.push_back(cat("class", c));
  }
  int64_t best = 0;
  std::ostringstream table;
  for (int64_t c = 0; c < classes; ++c) {
    if (probs[c] > probs[best]) best = c;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", static_cast<double>(probs[c]));
    table << names[static_cast<size_t>(c)] << ',' << buf << '\n';
  }
  std::cout << "class,probability\n" << table.str();
  std::cout << "predicted " << names[static_cast<size_t>(best)] << "\n";

  if (!opt.out.empty()) {
    ensure_dir(opt.out);
    write_text_file((fs::path(opt.out) / "probabilities.csv").string(),
                    "class,probability\n" + table.str());
    json j;
    j["subcommand"] = "predict";
    j["checkpoint"] = opt.checkpoint;
    j["wav"] = opt.wav;
    j["out"] = opt.out;
    write_json(j, (fs::path(opt.out) / "config.json").string());
  }
}

}  // namespace seqemo
