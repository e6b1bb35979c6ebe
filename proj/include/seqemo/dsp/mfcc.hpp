#ifndef SEQEMO_DSP_MFCC_HPP
#define SEQEMO_DSP_MFCC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "seqemo/common.hpp"
#include "seqemo/tensor.hpp"

namespace seqemo {

inline constexpr int kSampleRate = 16000;
inline constexpr int kFrameLength = 400;   // 25 ms at 16 kHz
inline constexpr int kFrameShift = 160;    // 10 ms
inline constexpr int kFftSize = 512;
inline constexpr int kFftBins = kFftSize / 2 + 1;  // 257
inline constexpr int kNumMelFilters = 26;
inline constexpr int kNumCepstra = 13;
inline constexpr double kLogFloor = 1e-10;

// Mono audio, samples in [-1, 1], 16 kHz only.
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = kSampleRate;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// 13 x T MFCC matrix, stored row-major (row = coefficient, column = frame).
struct FeatureMatrix {
  Tensor<float> coefficients;  // shape {13, T}

  int64_t num_frames() const {
    return coefficients.rank() == 2 ? coefficients.dim(1) : 0;
  }
};

// 26 triangular filters over the 257 FFT bins, 0 to 8 kHz on the mel scale.
struct MelFilterbank {
  Tensor<double> weights;  // shape {26, 257}
};

inline int64_t frame_count(int64_t num_samples) {
  return (num_samples - kFrameLength) / kFrameShift + 1;
}

// mel(f) = 2595 * log10(1 + f/700)
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Split into 400-sample frames every 160 samples and apply the Hamming
// window 0.54 - 0.46*cos(2*pi*n/399). A trailing partial frame is dropped.
// Throws DataError when the clip is shorter than one frame.
std::vector<std::vector<double>> frame_and_window(const AudioClip& clip);

// |FFT|^2 of the zero-padded 400-sample frame, bins 0..256.
std::vector<double> power_spectrum(const std::vector<double>& frame);

MelFilterbank build_mel_filterbank();

// Full pipeline: frames -> power spectra -> log mel energies (natural log,
// floor 1e-10) -> orthonormal DCT-II, coefficients 0..12 kept.
FeatureMatrix mfcc_extract(const AudioClip& clip);

// In-place iterative radix-2 FFT; n must be a power of two.
void fft_radix2(std::vector<double>& re, std::vector<double>& im);

}  // namespace seqemo

#endif  // SEQEMO_DSP_MFCC_HPP
