#include "seqemo/dsp/mfcc.hpp"

#include <cmath>

namespace seqemo {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<std::vector<double>> frame_and_window(const AudioClip& clip) {
  if (clip.sample_rate != kSampleRate)
    throw DataError(cat("expected ", kSampleRate, " Hz audio, got ",
                        clip.sample_rate, " Hz"));
  const int64_t n = static_cast<int64_t>(clip.samples.size());
  if (n < kFrameLength)
    throw DataError(cat("clip of ", n, " samples is shorter than one ",
                        kFrameLength, "-sample frame"));

  static const std::vector<double> hamming = [] {
    std::vector<double> w(kFrameLength);
    for (int i = 0; i < kFrameLength; ++i)
      w[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (kFrameLength - 1));
    return w;
  }();

  const int64_t frames = frame_count(n);
  std::vector<std::vector<double>> out(static_cast<size_t>(frames));
  for (int64_t f = 0; f < frames; ++f) {
    auto& frame = out[static_cast<size_t>(f)];
    frame.resize(kFrameLength);
    const int64_t start = f * kFrameShift;
    for (int i = 0; i < kFrameLength; ++i)
      frame[i] = static_cast<double>(clip.samples[start + i]) * hamming[i];
  }
  return out;
}

void fft_radix2(std::vector<double>& re, std::vector<double>& im) {
  const size_t n = re.size();
  if (n == 0 || (n & (n - 1)) != 0 || im.size() != n)
    throw ShapeError(cat("fft size ", n, " is not a power of two"));
  // bit reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const double wr = std::cos(ang), wi = std::sin(ang);
    for (size_t i = 0; i < n; i += len) {
      double cr = 1.0, ci = 0.0;
      for (size_t k = 0; k < len / 2; ++k) {
        const size_t a = i + k, b = i + k + len / 2;
        const double tr = re[b] * cr - im[b] * ci;
        const double ti = re[b] * ci + im[b] * cr;
        re[b] = re[a] - tr;
        im[b] = im[a] - ti;
        re[a] += tr;
        im[a] += ti;
        const double ncr = cr * wr - ci * wi;
        ci = cr * wi + ci * wr;
        cr = ncr;
      }
    }
  }
}

std::vector<double> power_spectrum(const std::vector<double>& frame) {
  if (frame.size() != kFrameLength)
    throw ShapeError(cat("power_spectrum expects ", kFrameLength,
                         " samples, got ", frame.size()));
  std::vector<double> re(kFftSize, 0.0), im(kFftSize, 0.0);
  std::copy(frame.begin(), frame.end(), re.begin());
  fft_radix2(re, im);
  std::vector<double> power(kFftBins);
  for (int k = 0; k < kFftBins; ++k)
    power[k] = re[k] * re[k] + im[k] * im[k];
  return power;
}

MelFilterbank build_mel_filterbank() {
  MelFilterbank fb;
  fb.weights = Tensor<double>({kNumMelFilters, kFftBins});
  auto w = fb.weights.mat(kNumMelFilters, kFftBins);

  // 28 boundary points equally spaced in mel between 0 and 8 kHz; filter m
  // rises from boundary m to m+1 and falls to m+2.
  const double mel_lo = hz_to_mel(0.0);
  const double mel_hi = hz_to_mel(kSampleRate / 2.0);
  std::vector<double> boundary_hz(kNumMelFilters + 2);
  for (int i = 0; i < kNumMelFilters + 2; ++i)
    boundary_hz[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i /
                                            (kNumMelFilters + 1));

  const double hz_per_bin =
      static_cast<double>(kSampleRate) / static_cast<double>(kFftSize);
  for (int m = 0; m < kNumMelFilters; ++m) {
    const double left = boundary_hz[m], center = boundary_hz[m + 1],
                 right = boundary_hz[m + 2];
    for (int k = 0; k < kFftBins; ++k) {
      const double hz = k * hz_per_bin;
      double v = 0.0;
      if (hz > left && hz < center)
        v = (hz - left) / (center - left);
      else if (hz >= center && hz < right)
        v = (right - hz) / (right - center);
      w(m, k) = v;
    }
  }
  return fb;
}

FeatureMatrix mfcc_extract(const AudioClip& clip) {
  const auto frames = frame_and_window(clip);
  static const MelFilterbank fb = build_mel_filterbank();
  const auto w = fb.weights.mat(kNumMelFilters, kFftBins);

  // orthonormal DCT-II over the 26 log energies
  static const std::vector<double> dct = [] {
    std::vector<double> d(kNumCepstra * kNumMelFilters);
    for (int k = 0; k < kNumCepstra; ++k) {
      const double scale = k == 0 ? std::sqrt(1.0 / kNumMelFilters)
                                  : std::sqrt(2.0 / kNumMelFilters);
      for (int n = 0; n < kNumMelFilters; ++n)
        d[k * kNumMelFilters + n] =
            scale * std::cos(M_PI * k * (2 * n + 1) / (2.0 * kNumMelFilters));
    }
    return d;
  }();

  const int64_t t_frames = static_cast<int64_t>(frames.size());
  FeatureMatrix features;
  features.coefficients = Tensor<float>({kNumCepstra, t_frames});
  auto out = features.coefficients.mat(kNumCepstra, t_frames);

  std::vector<double> mel_log(kNumMelFilters);
  for (int64_t t = 0; t < t_frames; ++t) {
    const auto power = power_spectrum(frames[static_cast<size_t>(t)]);
    for (int m = 0; m < kNumMelFilters; ++m) {
      double e = 0.0;
      for (int k = 0; k < kFftBins; ++k) e += w(m, k) * power[k];
      mel_log[m] = std::log(e + kLogFloor);
    }
    for (int k = 0; k < kNumCepstra; ++k) {
      double c = 0.0;
      for (int n = 0; n < kNumMelFilters; ++n)
        c += dct[k * kNumMelFilters + n] * mel_log[n];
      out(k, t) = static_cast<float>(c);
    }
  }
  return features;
}

}  // namespace seqemo
