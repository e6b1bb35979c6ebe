#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "seqemo/data/synth.hpp"
#include "seqemo/dsp/mfcc.hpp"
#include "seqemo/train/batch.hpp"
#include "seqemo/train/config.hpp"
#include "seqemo/train/cross_validate.hpp"
#include "seqemo/train/dataset.hpp"
#include "seqemo/train/kfold.hpp"
#include "seqemo/train/trainer.hpp"

using namespace seqemo;
namespace fs = std::filesystem;

namespace {

// Small dataset whose label is written into one feature column, so a tiny
// model separates it quickly.
FeatureDataset<float> toy_dataset(int64_t per_class, int64_t classes,
                                  int64_t dim, uint64_t seed,
                                  int64_t min_t = 6, int64_t max_t = 12) {
  FeatureDataset<float> ds;
  for (int64_t c = 0; c < classes; ++c)
    ds.classes.push_back("c" + std::to_string(c));
  Rng rng(seed);
  for (int64_t c = 0; c < classes; ++c)
    for (int64_t j = 0; j < per_class; ++j) {
      LabeledSequence<float> item;
      const int64_t t =
          min_t + static_cast<int64_t>(rng.uniform_int(
                      static_cast<uint64_t>(max_t - min_t + 1)));
      item.features = Tensor<float>({t, dim});
      for (int64_t i = 0; i < item.features.size(); ++i)
        item.features[i] = static_cast<float>(0.3 * rng.normal());
      for (int64_t f = 0; f < t; ++f)
        item.features[f * dim + (c % dim)] += 2.0f;
      item.label = c;
      item.speaker = "s" + std::to_string(j % 4);
      ds.items.push_back(std::move(item));
    }
  return ds;
}

ModelSpec toy_spec(int64_t dim, int64_t classes) {
  ModelSpec s;
  s.name = "toy";
  s.input_dim = dim;
  s.num_classes = classes;
  s.layers = {LayerSpec::conv(8, 3, 1), LayerSpec::attend(8),
              LayerSpec::fully_connected(8), LayerSpec::softmax(classes)};
  s.validate();
  return s;
}

TrainConfig toy_config(uint64_t seed) {
  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.max_epochs = 25;
  cfg.early_stop_patience = 25;
  cfg.seed = seed;
  cfg.validation_fraction = 0.2;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("train config validation") {
  TrainConfig cfg;
  cfg.validate();
  TrainConfig bad = cfg;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.validation_fraction = 0.6;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.early_stop_patience = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.optimizer.learning_rate = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  CHECK(parse_padding_mode("global_max") == PaddingMode::global_max);
  CHECK(parse_padding_mode("per_batch") == PaddingMode::per_batch);
  CHECK(padding_mode_name(PaddingMode::per_batch) ==
        std::string("per_batch"));
  CHECK_THROWS_AS(parse_padding_mode("widest"), ConfigError);
}

TEST_CASE("time major transposes the coefficient matrix") {
  FeatureMatrix fm;
  fm.coefficients = Tensor<float>({3, 4});
  for (int64_t c = 0; c < 3; ++c)
    for (int64_t t = 0; t < 4; ++t)
      fm.coefficients[c * 4 + t] = static_cast<float>(10 * c + t);
  auto x = time_major(fm);
  REQUIRE(x.shape() == std::vector<int64_t>{4, 3});
  for (int64_t t = 0; t < 4; ++t)
    for (int64_t c = 0; c < 3; ++c)
      CHECK(x[t * 3 + c] == static_cast<float>(10 * c + t));
}

TEST_CASE("dataset validation catches inconsistencies") {
  auto ds = toy_dataset(3, 2, 4, 21);
  ds.validate();
  CHECK(ds.feature_dim() == 4);
  CHECK(ds.max_len() <= 12);
  CHECK(ds.labels().size() == 6);

  auto bad = ds;
  bad.items[1].label = 9;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad = ds;
  bad.items[2].features = Tensor<float>({5, 3});
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad = ds;
  bad.items.clear();
  CHECK_THROWS_AS(bad.validate(), DataError);

  auto sub = ds.subset({0, 5, 2});
  CHECK(sub.items.size() == 3);
  CHECK(sub.items[1].label == ds.items[5].label);
  CHECK_THROWS_AS(ds.subset({7}), DataError);
}

TEST_CASE("feature normalization centers and scales the training data") {
  FeatureDataset<float> ds;
  ds.classes = {"a", "b"};
  LabeledSequence<float> one;
  one.features = Tensor<float>({2, 2}, {1.0f, 10.0f, 3.0f, 10.0f});
  one.label = 0;
  LabeledSequence<float> two;
  two.features = Tensor<float>({2, 2}, {5.0f, 10.0f, 7.0f, 10.0f});
  two.label = 1;
  ds.items = {one, two};

  auto norm = compute_feature_norm(ds);
  CHECK(norm.mean[0] == doctest::Approx(4.0));
  CHECK(norm.mean[1] == doctest::Approx(10.0));
  CHECK(norm.stdev[0] == doctest::Approx(std::sqrt(5.0)));
  CHECK(norm.stdev[1] == doctest::Approx(1e-8));  // constant column, floored

  apply_feature_norm(norm, ds);
  double sum = 0.0, sq = 0.0;
  for (const auto& it : ds.items)
    for (int64_t t = 0; t < 2; ++t) {
      sum += it.features[t * 2 + 0];
      sq += it.features[t * 2 + 0] * it.features[t * 2 + 0];
    }
  CHECK(sum == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(sq / 4.0 == doctest::Approx(1.0).epsilon(1e-4));
  // The constant column normalizes to zero, not to a blow-up.
  CHECK(ds.items[0].features[1] == doctest::Approx(0.0));
}

TEST_CASE("batches partition one hundred items as 32 32 32 4") {
  auto ds = toy_dataset(25, 4, 3, 22);
  TrainConfig cfg;
  Rng rng(1);
  auto batches = make_batches(ds, cfg, rng);
  REQUIRE(batches.size() == 4);
  CHECK(batches[0].size() == 32);
  CHECK(batches[1].size() == 32);
  CHECK(batches[2].size() == 32);
  CHECK(batches[3].size() == 4);
  int64_t total = 0;
  for (const auto& b : batches) total += b.size();
  CHECK(total == 100);
}

TEST_CASE("global max padding uses the dataset-wide longest sequence") {
  auto ds = toy_dataset(10, 3, 3, 23, 5, 40);
  const int64_t global = ds.max_len();
  TrainConfig cfg;
  cfg.batch_size = 7;
  Rng rng(2);
  for (const auto& b : make_batches(ds, cfg, rng))
    CHECK(b.padded_len() == global);

  cfg.padding_mode = PaddingMode::per_batch;
  Rng rng2(2);
  for (const auto& b : make_batches(ds, cfg, rng2)) {
    int64_t longest = 0;
    for (int64_t len : b.lengths) longest = std::max(longest, len);
    CHECK(b.padded_len() == longest);
  }
}

TEST_CASE("per batch padding follows each batch on a handmade case") {
  FeatureDataset<float> ds;
  ds.classes = {"a"};
  for (int64_t t : {5, 7, 20}) {
    LabeledSequence<float> item;
    item.features = Tensor<float>::full({t, 2}, 1.0f);
    item.label = 0;
    ds.items.push_back(std::move(item));
  }
  TrainConfig cfg;
  cfg.batch_size = 2;
  cfg.padding_mode = PaddingMode::per_batch;
  auto batches = make_eval_batches(ds, cfg);
  REQUIRE(batches.size() == 2);
  CHECK(batches[0].padded_len() == 7);
  CHECK(batches[1].padded_len() == 20);
  cfg.padding_mode = PaddingMode::global_max;
  auto wide = make_eval_batches(ds, cfg);
  CHECK(wide[0].padded_len() == 20);
  CHECK(wide[1].padded_len() == 20);
}

TEST_CASE("padded cells are exactly zero and real cells survive") {
  auto ds = toy_dataset(6, 2, 3, 24, 4, 9);
  TrainConfig cfg;
  cfg.batch_size = 5;
  auto batches = make_eval_batches(ds, cfg);
  int64_t item_index = 0;
  for (const auto& b : batches) {
    const int64_t t_pad = b.padded_len(), d = b.feature_dim();
    for (int64_t i = 0; i < b.size(); ++i, ++item_index) {
      const auto& src = ds.items[static_cast<size_t>(item_index)].features;
      for (int64_t t = 0; t < t_pad; ++t)
        for (int64_t c = 0; c < d; ++c) {
          const float v = b.features[(i * t_pad + t) * d + c];
          if (t < b.lengths[i]) {
            CHECK(v == src[t * d + c]);
          } else {
            CHECK(v == 0.0f);
          }
        }
    }
  }
}

TEST_CASE("batch composition is reproducible under the seed") {
  auto ds = toy_dataset(20, 3, 3, 25);
  TrainConfig cfg;
  cfg.batch_size = 16;
  Rng a(99), b(99), c(100);
  auto ba = make_batches(ds, cfg, a);
  auto bb = make_batches(ds, cfg, b);
  auto bc = make_batches(ds, cfg, c);
  REQUIRE(ba.size() == bb.size());
  bool all_equal_to_c = true;
  for (size_t i = 0; i < ba.size(); ++i) {
    CHECK(ba[i].labels == bb[i].labels);
    CHECK(ba[i].lengths == bb[i].lengths);
    CHECK(ba[i].features.values() == bb[i].features.values());
    if (ba[i].labels != bc[i].labels) all_equal_to_c = false;
  }
  CHECK_FALSE(all_equal_to_c);
}

TEST_CASE("items over the configured frame cap are rejected") {
  auto ds = toy_dataset(4, 2, 3, 26, 6, 12);
  TrainConfig cfg;
  cfg.max_frames = 5;
  try {
    make_eval_batches(ds, cfg);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("cap of 5") != std::string::npos);
  }
}

TEST_CASE("stratified five folds of six hundred items") {
  std::vector<int64_t> labels;
  std::vector<std::string> speakers;
  for (int64_t c = 0; c < 6; ++c)
    for (int64_t j = 0; j < 100; ++j) {
      labels.push_back(c);
      speakers.push_back("spk" + std::to_string(j % 10));
    }
  FoldPlan plan;
  Rng rng(31);
  auto splits = kfold_split(labels, speakers, 6, plan, rng);
  REQUIRE(splits.size() == 5);

  std::set<int64_t> seen;
  for (const auto& s : splits) {
    CHECK(s.test.size() == 120);
    CHECK(s.train.size() == 480);
    for (int64_t i : s.test) {
      CHECK_FALSE(seen.count(i));
      seen.insert(i);
    }
    // Each fold holds exactly twenty of each class.
    std::vector<int64_t> per_class(6, 0);
    for (int64_t i : s.test) per_class[static_cast<size_t>(labels[static_cast<size_t>(i)])]++;
    for (int64_t c = 0; c < 6; ++c) CHECK(per_class[static_cast<size_t>(c)] == 20);
  }
  CHECK(seen.size() == 600);
  CHECK(plan.assignment.size() == 600);

  // Same seed reproduces the split, a different seed moves it.
  FoldPlan plan2;
  Rng rng2(31);
  auto splits2 = kfold_split(labels, speakers, 6, plan2, rng2);
  CHECK(plan2.assignment == plan.assignment);
  FoldPlan plan3;
  Rng rng3(32);
  kfold_split(labels, speakers, 6, plan3, rng3);
  CHECK(plan3.assignment != plan.assignment);
}

TEST_CASE("fold partition holds across sizes and fold counts") {
  Rng rng(33);
  for (int64_t k : {2, 3, 5}) {
    for (int64_t classes : {2, 4}) {
      std::vector<int64_t> labels;
      for (int64_t c = 0; c < classes; ++c) {
        const int64_t count =
            k + static_cast<int64_t>(rng.uniform_int(11));
        for (int64_t j = 0; j < count; ++j) labels.push_back(c);
      }
      rng.shuffle(labels);
      FoldPlan plan;
      plan.k = k;
      auto splits = kfold_split(labels, {}, classes, plan, rng);

      std::vector<int64_t> count_in_fold(static_cast<size_t>(k), 0);
      std::set<int64_t> seen;
      for (int64_t f = 0; f < k; ++f) {
        const auto& s = splits[static_cast<size_t>(f)];
        for (int64_t i : s.test) {
          CHECK_FALSE(seen.count(i));
          seen.insert(i);
          CHECK(plan.assignment[static_cast<size_t>(i)] == f);
        }
        std::set<int64_t> test_set(s.test.begin(), s.test.end());
        for (int64_t i : s.train) CHECK_FALSE(test_set.count(i));
        CHECK(s.train.size() + s.test.size() == labels.size());
      }
      CHECK(seen.size() == labels.size());

      // Per class, fold counts differ by at most one.
      for (int64_t c = 0; c < classes; ++c) {
        std::vector<int64_t> per_fold(static_cast<size_t>(k), 0);
        for (size_t i = 0; i < labels.size(); ++i)
          if (labels[i] == c)
            per_fold[static_cast<size_t>(plan.assignment[i])]++;
        const auto [lo, hi] =
            std::minmax_element(per_fold.begin(), per_fold.end());
        CHECK(*hi - *lo <= 1);
      }
    }
  }
}

TEST_CASE("a class smaller than the fold count is rejected") {
  std::vector<int64_t> labels = {0, 0, 0, 0, 0, 1, 1, 1, 1};
  FoldPlan plan;
  Rng rng(34);
  CHECK_THROWS_AS(kfold_split(labels, {}, 2, plan, rng), ConfigError);
}

TEST_CASE("speaker grouped folds never split a speaker") {
  std::vector<int64_t> labels;
  std::vector<std::string> speakers;
  for (int64_t spk = 0; spk < 10; ++spk)
    for (int64_t j = 0; j < 6; ++j) {
      labels.push_back(j % 3);
      speakers.push_back("spk" + std::to_string(spk));
    }
  FoldPlan plan;
  plan.mode = FoldMode::speaker_grouped;
  Rng rng(35);
  auto splits = kfold_split(labels, speakers, 3, plan, rng);

  for (const auto& s : splits) {
    std::set<std::string> test_spk, train_spk;
    for (int64_t i : s.test) test_spk.insert(speakers[static_cast<size_t>(i)]);
    for (int64_t i : s.train) train_spk.insert(speakers[static_cast<size_t>(i)]);
    CHECK(test_spk.size() == 2);  // ten equal speakers over five folds
    for (const auto& spk : test_spk) CHECK_FALSE(train_spk.count(spk));
    CHECK(s.test.size() == 12);
  }

  // Uneven speakers still give disjoint, nonempty folds.
  std::vector<int64_t> labels2;
  std::vector<std::string> speakers2;
  const std::vector<int64_t> sizes = {7, 5, 3, 2, 2, 1};
  for (size_t spk = 0; spk < sizes.size(); ++spk)
    for (int64_t j = 0; j < sizes[spk]; ++j) {
      labels2.push_back(0);
      speakers2.push_back("v" + std::to_string(spk));
    }
  FoldPlan plan2;
  plan2.mode = FoldMode::speaker_grouped;
  plan2.k = 3;
  Rng rng2(36);
  auto splits2 = kfold_split(labels2, speakers2, 1, plan2, rng2);
  for (const auto& s : splits2) {
    CHECK_FALSE(s.test.empty());
    std::set<std::string> test_spk, train_spk;
    for (int64_t i : s.test) test_spk.insert(speakers2[static_cast<size_t>(i)]);
    for (int64_t i : s.train) train_spk.insert(speakers2[static_cast<size_t>(i)]);
    for (const auto& spk : test_spk) CHECK_FALSE(train_spk.count(spk));
  }

  FoldPlan plan3;
  plan3.mode = FoldMode::speaker_grouped;
  Rng rng3(37);
  CHECK_THROWS_AS(
      kfold_split({0, 1, 0}, {"a", "a", "b"}, 2, plan3, rng3), ConfigError);
}

TEST_CASE("training separates the toy dataset and is reproducible") {
  auto ds = toy_dataset(10, 3, 4, 41);
  auto val = ds.subset({0, 10, 20, 5, 15, 25});
  auto tr = ds.subset({1, 2, 3, 4, 6, 7, 8, 9, 11, 12, 13, 14,
                       16, 17, 18, 19, 21, 22, 23, 24, 26, 27, 28, 29});
  TrainConfig cfg = toy_config(4242);

  Model<float> model(toy_spec(4, 3));
  Rng init(7);
  model.init(init);
  auto h = train(model, tr, val, cfg);

  REQUIRE(h.epochs() >= 1);
  CHECK(h.train_loss.size() == h.train_acc.size());
  CHECK(h.val_loss.size() == h.train_loss.size());
  CHECK(h.best_epoch >= 0);
  CHECK(h.best_epoch < h.epochs());
  CHECK(h.train_acc.back() > 0.9);
  const double first = h.train_loss.front();
  const double last_min =
      *std::min_element(h.train_loss.begin(), h.train_loss.end());
  CHECK(last_min < first);

  // Identical seed and config reproduce the history bit for bit.
  Model<float> model2(toy_spec(4, 3));
  Rng init2(7);
  model2.init(init2);
  auto h2 = train(model2, tr, val, cfg);
  CHECK(h2.train_loss == h.train_loss);
  CHECK(h2.train_acc == h.train_acc);
  CHECK(h2.val_loss == h.val_loss);
  CHECK(h2.val_acc == h.val_acc);
  CHECK(h2.best_epoch == h.best_epoch);
  std::vector<float> p1, p2;
  model.visit_params([&](const std::string&, Tensor<float>& p, Tensor<float>&) {
    p1.insert(p1.end(), p.values().begin(), p.values().end());
  });
  model2.visit_params([&](const std::string&, Tensor<float>& p, Tensor<float>&) {
    p2.insert(p2.end(), p.values().begin(), p.values().end());
  });
  CHECK(p1 == p2);
}

TEST_CASE("the model keeps its best validation epoch parameters") {
  auto ds = toy_dataset(10, 3, 4, 43);
  auto val = ds.subset({0, 10, 20, 9, 19, 29});
  auto tr = ds.subset({1, 2, 3, 4, 5, 6, 7, 8, 11, 12, 13, 14, 15, 16, 17, 18,
                       21, 22, 23, 24, 25, 26, 27, 28});
  TrainConfig cfg = toy_config(77);
  cfg.max_epochs = 20;
  cfg.early_stop_patience = 3;

  Model<float> model(toy_spec(4, 3));
  Rng init(8);
  model.init(init);
  auto h = train(model, tr, val, cfg);

  const double recorded = h.val_loss[static_cast<size_t>(h.best_epoch)];
  const double best =
      *std::min_element(h.val_loss.begin(), h.val_loss.end());
  CHECK(recorded == best);
  const ScoreResult rescore = score_dataset(model, val, cfg);
  CHECK(rescore.loss == doctest::Approx(recorded).epsilon(1e-12));
}

TEST_CASE("zero patience stops at the first non-improving epoch") {
  auto tr = toy_dataset(8, 3, 4, 44);
  auto val = toy_dataset(4, 3, 4, 45);
  Rng scramble(46);
  for (auto& item : val.items)
    item.label = static_cast<int64_t>(scramble.uniform_int(3));

  TrainConfig cfg = toy_config(88);
  cfg.max_epochs = 50;
  cfg.early_stop_patience = 0;

  Model<float> model(toy_spec(4, 3));
  Rng init(9);
  model.init(init);
  auto h = train(model, tr, val, cfg);

  REQUIRE(h.epochs() < 50);
  const int64_t last = h.epochs() - 1;
  double best = std::numeric_limits<double>::infinity();
  for (int64_t e = 0; e < last; ++e) {
    CHECK(h.val_loss[static_cast<size_t>(e)] < best);
    best = std::min(best, h.val_loss[static_cast<size_t>(e)]);
  }
  CHECK(h.val_loss[static_cast<size_t>(last)] >= best);
}

TEST_CASE("a poisoned parameter aborts with epoch and batch diagnostics") {
  auto tr = toy_dataset(8, 3, 4, 47);
  TrainConfig cfg = toy_config(99);
  Model<float> model(toy_spec(4, 3));
  Rng init(10);
  model.init(init);
  bool first = true;
  model.visit_params([&](const std::string&, Tensor<float>& p, Tensor<float>&) {
    if (first) {
      p[0] = std::numeric_limits<float>::infinity();
      first = false;
    }
  });
  try {
    train(model, tr, tr, cfg);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("epoch 1") != std::string::npos);
    CHECK(msg.find("batch") != std::string::npos);
  }
}

TEST_CASE("score dataset matches a direct per-item forward pass") {
  auto ds = toy_dataset(2, 3, 4, 48);
  Model<float> model(toy_spec(4, 3));
  Rng init(11);
  model.init(init);
  TrainConfig cfg = toy_config(1);

  const ScoreResult sc = score_dataset(model, ds, cfg);
  REQUIRE(sc.predictions.size() == ds.items.size());
  Pass infer;
  double loss = 0.0;
  int64_t correct = 0;
  for (size_t i = 0; i < ds.items.size(); ++i) {
    Tensor<float> logits = model.forward(
        ds.items[i].features, ds.items[i].features.dim(0), infer);
    Tensor<float> row({1, 3}, logits.values());
    Tensor<float> probs = softmax(row, 1);
    int64_t pred = 0;
    for (int64_t c = 1; c < 3; ++c)
      if (probs[c] > probs[pred]) pred = c;
    CHECK(sc.predictions[i] == pred);
    loss += -std::log(std::max(static_cast<double>(probs[ds.items[i].label]),
                               kProbFloor));
    correct += pred == ds.items[i].label ? 1 : 0;
  }
  CHECK(sc.loss == loss / static_cast<double>(ds.items.size()));
  CHECK(sc.accuracy ==
        static_cast<double>(correct) / static_cast<double>(ds.items.size()));
}

TEST_CASE("attention masking makes logits independent of padding width") {
  ModelSpec spec;
  spec.name = "masked";
  spec.input_dim = 5;
  spec.num_classes = 3;
  spec.layers = {LayerSpec::conv(8, 5, 1), LayerSpec::maxpool(2),
                 LayerSpec::lstm(8), LayerSpec::attend(8),
                 LayerSpec::fully_connected(8), LayerSpec::softmax(3)};
  spec.validate();
  Model<float> model(spec);
  Rng init(12);
  model.init(init);

  Rng rng(13);
  const int64_t t_real = 300;
  std::vector<float> frames(static_cast<size_t>(t_real) * 5);
  for (auto& v : frames) v = static_cast<float>(rng.normal());

  auto padded_batch = [&](int64_t t_pad) {
    SequenceBatch<float> b;
    b.features = Tensor<float>::zeros({1, t_pad, 5});
    std::copy(frames.begin(), frames.end(), b.features.data());
    b.lengths = {t_real};
    b.labels = {0};
    return b;
  };
  auto narrow = padded_batch(500);
  auto wide = padded_batch(800);
  Pass infer;
  auto out_narrow = model_forward(model, narrow, infer, true);
  auto out_wide = model_forward(model, wide, infer, true);
  for (int64_t c = 0; c < 3; ++c)
    CHECK(std::abs(out_narrow.logits[c] - out_wide.logits[c]) <= 1e-5f);
}

TEST_CASE("history and config files are deterministic and complete") {
  TrainHistory h;
  h.train_loss = {1.5, 0.75};
  h.train_acc = {0.5, 0.875};
  h.val_loss = {1.25, 0.9};
  h.val_acc = {0.5, 0.75};
  h.best_epoch = 1;

  fs::path dir = fs::temp_directory_path() / "seqemo_history";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string path = (dir / "history.csv").string();
  write_history(h, path);
  CHECK(slurp(path) ==
        "epoch,train_loss,train_acc,val_loss,val_acc\n"
        "1,1.500000,0.500000,1.250000,0.500000\n"
        "2,0.750000,0.875000,0.900000,0.750000\n"
        "# best_epoch 2\n");
  write_history(h, path);
  CHECK(slurp(path).find("# best_epoch 2") != std::string::npos);

  TrainConfig cfg;
  cfg.seed = 77;
  const std::string cfg_path = (dir / "config.json").string();
  write_config_echo(cfg, cfg_path);
  const std::string echo = slurp(cfg_path);
  CHECK(echo.find("\"seed\": \"77\"") != std::string::npos);
  CHECK(echo.find("\"padding_mode\": \"global_max\"") != std::string::npos);
  CHECK(echo.find("\"batch_size\": 32") != std::string::npos);
  CHECK(echo.find("\"learning_rate\": 0.001") != std::string::npos);
  write_config_echo(cfg, cfg_path);
  CHECK(slurp(cfg_path) == echo);
}

TEST_CASE("cross validation mechanics on the toy dataset") {
  auto ds = toy_dataset(10, 3, 4, 51);
  FoldPlan plan;
  TrainConfig cfg = toy_config(5150);
  cfg.max_epochs = 3;
  auto builder = []() { return Model<float>(toy_spec(4, 3)); };

  auto result = cross_validate<float>(builder, ds, plan, cfg);
  REQUIRE(result.fold_reports.size() == 5);
  REQUIRE(result.histories.size() == 5);
  REQUIRE(result.fold_accuracy.size() == 5);
  CHECK(result.plan.assignment.size() == 30);
  for (const auto& r : result.fold_reports) CHECK(r.total == 6);

  double sum = 0.0;
  for (double a : result.fold_accuracy) sum += a;
  CHECK(result.mean_accuracy == sum / 5.0);
  double sq = 0.0;
  for (double a : result.fold_accuracy) {
    const double d = a - result.mean_accuracy;
    sq += d * d;
  }
  CHECK(result.std_accuracy == std::sqrt(sq / 5.0));

  // A second run reproduces everything, and extra workers change nothing.
  auto again = cross_validate<float>(builder, ds, plan, cfg);
  CHECK(again.fold_accuracy == result.fold_accuracy);
  for (int f = 0; f < 5; ++f) {
    CHECK(again.histories[f].train_loss == result.histories[f].train_loss);
    CHECK(again.fold_reports[f].confusion == result.fold_reports[f].confusion);
  }
  auto parallel = cross_validate<float>(builder, ds, plan, cfg, 3);
  CHECK(parallel.fold_accuracy == result.fold_accuracy);
  for (int f = 0; f < 5; ++f)
    CHECK(parallel.histories[f].train_loss ==
          result.histories[f].train_loss);

  // The callback sees folds in order with a usable model and normalizer.
  std::vector<int64_t> seen;
  auto with_cb = cross_validate<float>(
      builder, ds, plan, cfg, 1,
      [&](int64_t fold, Model<float>& model, const FeatureNorm<float>& norm,
          const TrainHistory& history, const EvalReport& report) {
        seen.push_back(fold);
        CHECK(norm.mean.size() == 4);
        CHECK(history.epochs() >= 1);
        CHECK(report.total == 6);
        CHECK(model.spec().num_classes == 3);
      });
  CHECK(seen == std::vector<int64_t>{0, 1, 2, 3, 4});
  CHECK(with_cb.mean_accuracy == result.mean_accuracy);
}

TEST_CASE("fold errors carry the fold index") {
  auto ds = toy_dataset(10, 3, 4, 52);
  FoldPlan plan;
  TrainConfig cfg = toy_config(5151);
  cfg.max_frames = 5;  // every item is longer than this
  auto builder = []() { return Model<float>(toy_spec(4, 3)); };
  try {
    cross_validate<float>(builder, ds, plan, cfg);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("fold 0:") != std::string::npos);
  }
}

TEST_CASE("a tiny network overfits two dozen synthetic voices") {
  FeatureDataset<float> ds;
  ds.classes = synth_class_names(6);
  Rng rng(61);
  for (int c = 0; c < 6; ++c)
    for (int j = 0; j < 4; ++j) {
      Rng item_rng = rng.child(static_cast<uint64_t>(c * 4 + j));
      const double dur = item_rng.uniform(0.4, 0.8);
      AudioClip clip;
      clip.samples =
          render_synth_clip(c, dur, 1.0, 0.005, kSampleRate, item_rng);
      clip.sample_rate = kSampleRate;
      LabeledSequence<float> item;
      item.features = time_major(mfcc_extract(clip));
      item.label = c;
      item.speaker = "s" + std::to_string(j);
      ds.items.push_back(std::move(item));
    }
  const auto norm = compute_feature_norm(ds);
  apply_feature_norm(norm, ds);

  ModelSpec spec;
  spec.name = "overfit";
  spec.input_dim = kNumCepstra;
  spec.num_classes = 6;
  spec.layers = {LayerSpec::conv(16, 5, 1), LayerSpec::maxpool(2),
                 LayerSpec::lstm(32), LayerSpec::attend(32),
                 LayerSpec::fully_connected(16), LayerSpec::softmax(6)};
  spec.validate();
  Model<float> model(spec);
  Rng init(62);
  model.init(init);

  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.max_epochs = 150;
  cfg.early_stop_patience = 150;
  cfg.seed = 6161;
  cfg.validation_fraction = 0.0;

  auto h = train(model, ds, ds, cfg);
  CHECK(h.epochs() <= 150);
  const double top =
      *std::max_element(h.train_acc.begin(), h.train_acc.end());
  CHECK(top == 1.0);

  // Windowed minimum of the training loss keeps falling or holds level.
  const int64_t window = 20;
  if (h.epochs() > window) {
    for (int64_t s = 0; s + window < h.epochs(); ++s) {
      const double a = *std::min_element(h.train_loss.begin() + s,
                                         h.train_loss.begin() + s + window);
      const double b = *std::min_element(h.train_loss.begin() + s + 1,
                                         h.train_loss.begin() + s + 1 + window);
      CHECK(b <= a + 1e-12);
    }
  }
}
