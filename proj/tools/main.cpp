#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pipeline.hpp"

namespace {

using seqemo::TrainConfig;

// Training flags shared by train and xval. Enum-like values arrive as
// strings and are parsed after CLI11 finishes, so a bad value is reported
// the same way as any other usage error.
struct TrainFlags {
  TrainConfig cfg;
  std::string padding = "global_max";
  bool no_mask = false;
  bool no_normalize = false;

  void add_to(CLI::App* app) {
    app->add_option("--batch-size", cfg.batch_size, "items per optimizer step")
        ->capture_default_str();
    app->add_option("--lr", cfg.optimizer.learning_rate, "Adam learning rate")
        ->capture_default_str();
    app->add_option("--epochs", cfg.max_epochs, "maximum training epochs")
        ->capture_default_str();
    app->add_option("--patience", cfg.early_stop_patience,
                    "epochs without validation improvement before stopping")
        ->capture_default_str();
    app->add_option("--seed", cfg.seed, "master random seed")
        ->capture_default_str();
    app->add_option("--padding", padding, "global_max or per_batch")
        ->capture_default_str();
    app->add_flag("--no-mask", no_mask,
                  "let models see batch padding instead of trimming it");
    app->add_option("--val-fraction", cfg.validation_fraction,
                    "fraction of training items held out for early stopping")
        ->capture_default_str();
    app->add_flag("--no-normalize", no_normalize,
                  "skip per-coefficient feature normalization");
    app->add_option("--clip", cfg.grad_clip_norm,
                    "global gradient norm cap, 0 disables")
        ->capture_default_str();
    app->add_option("--max-frames", cfg.max_frames,
                    "reject items longer than this many frames, 0 disables")
        ->capture_default_str();
  }

  TrainConfig resolve() const {
    TrainConfig out = cfg;
    out.padding_mode = seqemo::parse_padding_mode(padding);
    out.mask_attention = !no_mask;
    out.normalize_features = !no_normalize;
    out.validate();
    return out;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speech emotion recognition pipeline"};
  app.require_subcommand(1);

  seqemo::SynthOptions synth;
  CLI::App* c_synth =
      app.add_subcommand("synth", "generate a labeled synthetic dataset");
  c_synth->add_option("--out", synth.out, "output directory")->required();
  c_synth->add_option("--classes", synth.spec.num_classes, "number of classes")
      ->capture_default_str();
  c_synth
      ->add_option("--per-class", synth.spec.items_per_class,
                   "clips per class")
      ->capture_default_str();
  c_synth
      ->add_option("--min-dur", synth.spec.min_duration_s,
                   "shortest clip in seconds")
      ->capture_default_str();
  c_synth
      ->add_option("--max-dur", synth.spec.max_duration_s,
                   "longest clip in seconds")
      ->capture_default_str();
  c_synth->add_option("--noise", synth.spec.noise_level, "white noise level")
      ->capture_default_str();
  c_synth
      ->add_option("--speakers", synth.spec.num_speakers,
                   "synthetic speaker count")
      ->capture_default_str();
  c_synth->add_option("--seed", synth.spec.seed, "master random seed")
      ->capture_default_str();

  seqemo::ExtractOptions extract;
  CLI::App* c_extract =
      app.add_subcommand("extract", "cache MFCC features for a manifest");
  c_extract->add_option("--manifest", extract.manifest, "manifest.csv path")
      ->required();
  c_extract->add_option("--out", extract.out, "cache directory")->required();
  c_extract->add_option("--workers", extract.workers, "parallel file workers")
      ->capture_default_str();

  seqemo::TrainOptions train;
  TrainFlags train_flags;
  CLI::App* c_train = app.add_subcommand("train", "train a single model");
  c_train->add_option("--manifest", train.manifest, "manifest.csv path")
      ->required();
  c_train->add_option("--cache", train.cache,
                      "feature cache directory, omit to extract from audio");
  c_train->add_option("--out", train.out, "output directory")->required();
  c_train
      ->add_option("--arch", train.arch,
                   "cnn, clstm-attn, clstm-last, clstm-gmax or clstm-gavg")
      ->required();
  c_train->add_option("--dropout", train.dropout, "recurrent-stack dropout")
      ->capture_default_str();
  train_flags.add_to(c_train);

  seqemo::XvalOptions xval;
  TrainFlags xval_flags;
  std::string fold_mode = "stratified_random";
  CLI::App* c_xval =
      app.add_subcommand("xval", "k-fold cross-validated training");
  c_xval->add_option("--manifest", xval.manifest, "manifest.csv path")
      ->required();
  c_xval->add_option("--cache", xval.cache,
                     "feature cache directory, omit to extract from audio");
  c_xval->add_option("--out", xval.out, "output directory")->required();
  c_xval
      ->add_option("--arch", xval.arch,
                   "cnn, clstm-attn, clstm-last, clstm-gmax or clstm-gavg")
      ->required();
  c_xval->add_option("--dropout", xval.dropout, "recurrent-stack dropout")
      ->capture_default_str();
  c_xval->add_option("--folds", xval.plan.k, "number of folds")
      ->capture_default_str();
  c_xval
      ->add_option("--fold-mode", fold_mode,
                   "stratified_random or speaker_grouped")
      ->capture_default_str();
  c_xval->add_option("--workers", xval.workers, "parallel fold workers")
      ->capture_default_str();
  xval_flags.add_to(c_xval);

  seqemo::EvalOptions eval;
  CLI::App* c_eval =
      app.add_subcommand("eval", "score a checkpoint against a manifest");
  c_eval->add_option("--manifest", eval.manifest, "manifest.csv path")
      ->required();
  c_eval->add_option("--cache", eval.cache,
                     "feature cache directory, omit to extract from audio");
  c_eval->add_option("--checkpoint", eval.checkpoint, "checkpoint file")
      ->required();
  c_eval->add_option("--out", eval.out, "output directory")->required();

  seqemo::PredictOptions predict;
  CLI::App* c_predict =
      app.add_subcommand("predict", "class probabilities for one WAV file");
  c_predict->add_option("--checkpoint", predict.checkpoint, "checkpoint file")
      ->required();
  c_predict->add_option("--wav", predict.wav, "input WAV file")->required();
  c_predict->add_option("--out", predict.out,
                        "optional directory for probabilities.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(c_synth)) {
      seqemo::cmd_synth(synth);
    } else if (app.got_subcommand(c_extract)) {
      seqemo::cmd_extract(extract);
    } else if (app.got_subcommand(c_train)) {
      train.cfg = train_flags.resolve();
      seqemo::cmd_train(train);
    } else if (app.got_subcommand(c_xval)) {
      xval.cfg = xval_flags.resolve();
      xval.plan.mode = seqemo::parse_fold_mode(fold_mode);
      seqemo::cmd_xval(xval);
    } else if (app.got_subcommand(c_eval)) {
      seqemo::cmd_eval(eval);
    } else if (app.got_subcommand(c_predict)) {
      seqemo::cmd_predict(predict);
    }
  } catch (const seqemo::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
