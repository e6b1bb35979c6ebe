#include "seqemo/data/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "seqemo/audio/wav.hpp"
#include "seqemo/common.hpp"

namespace seqemo {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Instantaneous F0 in Hz for template `klass` at normalized time u in [0,1]
// and absolute time t in seconds (the vibrato rate is fixed in real time).
double contour_f0(int klass, double u, double t) {
  switch (klass) {
    case 0: return 150.0;                                        // flat
    case 1: return 120.0 + 120.0 * u;                            // rise
    case 2: return 240.0 - 120.0 * u;                            // fall
    case 3:                                                      // risefall
      return u < 0.5 ? 120.0 + 240.0 * u : 240.0 - 240.0 * (u - 0.5);
    case 4:                                                      // fallrise
      return u < 0.5 ? 240.0 - 240.0 * u : 120.0 + 240.0 * (u - 0.5);
    case 5: return 180.0 * (1.0 + 0.12 * std::sin(2.0 * kPi * 6.0 * t));  // vibrato
    default: throw ConfigError(cat("no contour template for class ", klass));
  }
}

// Fast attack, then a decay that ends near a third of the peak regardless of
// clip length. The decaying loudness ties "loud" to "early", which keeps the
// contour direction recoverable from joint pitch/energy features.
double envelope(double t, double duration_s) {
  const double attack_s = 0.03;
  double gain = 1.0;
  if (t < attack_s) gain = 0.5 * (1.0 - std::cos(kPi * t / attack_s));
  const double tau = (duration_s - attack_s) / std::log(1.0 / 0.35);
  if (t > attack_s) gain *= std::exp(-(t - attack_s) / tau);
  return gain;
}

}  // namespace

void SynthSpec::validate() const {
  if (num_classes < 1 || num_classes > 6)
    throw ConfigError(cat("num_classes must be in [1,6], got ", num_classes));
  if (items_per_class < 1)
    throw ConfigError(cat("items_per_class must be positive, got ", items_per_class));
  if (min_duration_s <= 0.0 || max_duration_s < min_duration_s)
    throw ConfigError(cat("bad duration range [", min_duration_s, ", ",
                          max_duration_s, "]"));
  if (noise_level < 0.0)
    throw ConfigError(cat("noise_level must be non-negative, got ", noise_level));
  if (sample_rate != 16000)
    throw ConfigError(cat("sample_rate must be 16000, got ", sample_rate));
  if (num_speakers < 1)
    throw ConfigError(cat("num_speakers must be positive, got ", num_speakers));
}

std::vector<std::string> synth_class_names(int num_classes) {
  static const std::vector<std::string> kNames = {
      "flat", "rise", "fall", "risefall", "fallrise", "vibrato"};
  if (num_classes < 1 || num_classes > static_cast<int>(kNames.size()))
    throw ConfigError(cat("num_classes must be in [1,6], got ", num_classes));
  return {kNames.begin(), kNames.begin() + num_classes};
}

std::vector<float> render_synth_clip(int class_index, double duration_s,
                                     double f0_scale, double noise_level,
                                     int sample_rate, Rng& rng) {
  if (duration_s <= 0.0) throw ConfigError("duration must be positive");
  const int n = static_cast<int>(std::lround(duration_s * sample_rate));
  std::vector<float> out(static_cast<size_t>(n));

  // Phase accumulation keeps the waveform continuous while F0 moves.
  double phase = 0.0;
  const double tone_gain = 0.4;  // harmonic amplitudes sum to 1.75, so peak ~0.7
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double u = static_cast<double>(i) / n;
    const double f0 = f0_scale * contour_f0(class_index, u, t);
    phase += 2.0 * kPi * f0 / sample_rate;
    double s = std::sin(phase) + 0.5 * std::sin(2.0 * phase) +
               0.25 * std::sin(3.0 * phase);
    s *= tone_gain * envelope(t, duration_s);
    if (noise_level > 0.0) s += noise_level * rng.normal();
    out[static_cast<size_t>(i)] = static_cast<float>(s);
  }
  return out;
}

Manifest generate_synth_dataset(const SynthSpec& spec, const std::string& out_dir) {
  spec.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(cat("cannot create ", out_dir, ": ", ec.message()));

  Manifest m;
  m.root = out_dir;
  m.classes = synth_class_names(spec.num_classes);

  for (int c = 0; c < spec.num_classes; ++c) {
    for (int j = 0; j < spec.items_per_class; ++j) {
      const int item_index = c * spec.items_per_class + j;
      Rng item_rng(Rng::mix64(spec.seed, static_cast<std::uint64_t>(item_index)));

      const double duration = item_rng.uniform(spec.min_duration_s, spec.max_duration_s);
      const double jitter = item_rng.uniform(0.9, 1.1);  // per-item F0 spread
      const int speaker = j % spec.num_speakers;
      // Mild per-voice pitch offset so speaker-grouped folds see real groups.
      const double voice_scale =
          spec.num_speakers > 1
              ? 0.9 + 0.2 * speaker / (spec.num_speakers - 1)
              : 1.0;

      auto samples = render_synth_clip(c, duration, voice_scale * jitter,
                                       spec.noise_level, spec.sample_rate, item_rng);

      char name[64];
      std::snprintf(name, sizeof(name), "%s_%04d_spk%d.wav",
                    m.classes[static_cast<size_t>(c)].c_str(), j, speaker);
      write_wav((fs::path(out_dir) / name).string(),
                AudioClip{std::move(samples), spec.sample_rate});

      ManifestEntry e;
      e.path = name;
      e.label = m.classes[static_cast<size_t>(c)];
      e.speaker = cat("spk", speaker);
      e.duration_s = static_cast<double>(
                         std::lround(duration * spec.sample_rate)) / spec.sample_rate;
      m.entries.push_back(std::move(e));
    }
  }

  save_manifest(m, (fs::path(out_dir) / "manifest.csv").string());
  return m;
}

}  // namespace seqemo
