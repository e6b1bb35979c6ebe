#ifndef SEQEMO_DATA_SYNTH_HPP
#define SEQEMO_DATA_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "seqemo/data/manifest.hpp"
#include "seqemo/rng.hpp"

namespace seqemo {

// Settings for the synthetic prosody dataset. Each class is a pitch-contour
// template rendered as a harmonic tone, so the classes differ in how F0 moves
// over time rather than in any single spectral snapshot.
struct SynthSpec {
  int num_classes = 6;  // at most 6, one contour template per class
  int items_per_class = 100;
  double min_duration_s = 1.0;
  double max_duration_s = 4.0;
  std::uint64_t seed = 1234;
  double noise_level = 0.01;  // standard deviation of added white noise
  int sample_rate = 16000;
  int num_speakers = 10;  // synthetic voices, assigned round-robin

  void validate() const;  // throws ConfigError
};

// Class names for the first `num_classes` contour templates, in template
// order: flat, rise, fall, risefall, fallrise, vibrato.
std::vector<std::string> synth_class_names(int num_classes);

// Renders one clip: the class's F0 contour scaled by `f0_scale`, three
// harmonics, a fast-attack decaying amplitude envelope, and white noise drawn
// from `rng`. Exposed so tests can probe the contours directly.
std::vector<float> render_synth_clip(int class_index, double duration_s,
                                     double f0_scale, double noise_level,
                                     int sample_rate, Rng& rng);

// Writes `num_classes * items_per_class` WAV files plus manifest.csv into
// `out_dir` and returns the manifest. Deterministic: the same spec always
// produces byte-identical files. Item parameters come from per-item child
// seeds, so generation order does not matter.
Manifest generate_synth_dataset(const SynthSpec& spec, const std::string& out_dir);

}  // namespace seqemo

#endif  // SEQEMO_DATA_SYNTH_HPP
