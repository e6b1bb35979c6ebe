#ifndef SEQEMO_AUDIO_WAV_HPP
#define SEQEMO_AUDIO_WAV_HPP

#include <string>

#include "seqemo/dsp/mfcc.hpp"

namespace seqemo {

struct WavReadOptions {
  // Opt-in linear resampling to 16 kHz. Off by default: a wrong-rate file is
  // a data error, never a silent conversion.
  bool allow_resample = false;
};

// Parses RIFF/WAVE, accepting PCM 16-bit mono at 16 kHz. Samples are scaled
// by 1/32768 into [-1, 1). Violations raise DataError naming the property
// and the file.
AudioClip read_wav(const std::string& path, const WavReadOptions& opts = {});

// Writes canonical PCM 16-bit mono 16 kHz. Samples are clamped to [-1, 1)
// and rounded to the nearest integer value.
void write_wav(const std::string& path, const AudioClip& clip);

// Linear-interpolation resampler used by the opt-in conversion path.
AudioClip resample_linear(const AudioClip& clip, int target_rate);

}  // namespace seqemo

#endif  // SEQEMO_AUDIO_WAV_HPP
