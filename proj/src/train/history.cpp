#include "seqemo/train/trainer.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace seqemo {

namespace {

std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(cat("cannot open ", path, " for writing"));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out.good()) throw IoError(cat("failed while writing ", path));
}

}  // namespace

void write_history(const TrainHistory& history, const std::string& path) {
  std::ostringstream out;
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (int64_t e = 0; e < history.epochs(); ++e) {
    const size_t i = static_cast<size_t>(e);
    out << (e + 1) << ',' << fixed6(history.train_loss[i]) << ','
        << fixed6(history.train_acc[i]) << ',' << fixed6(history.val_loss[i])
        << ',' << fixed6(history.val_acc[i]) << '\n';
  }
  out << "# best_epoch " << (history.best_epoch + 1) << '\n';
  write_text_file(path, out.str());
}

void write_config_echo(const TrainConfig& cfg, const std::string& path) {
  nlohmann::json j;
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
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace seqemo
