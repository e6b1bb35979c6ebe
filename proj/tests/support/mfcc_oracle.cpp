#include "support/mfcc_oracle.hpp"

#include <cmath>
#include <cstddef>

namespace seqemo::oracle {

namespace {

constexpr int kWin = 400;
constexpr int kHop = 160;
constexpr int kN = 512;
constexpr int kBins = kN / 2 + 1;
constexpr int kMels = 26;
constexpr int kCeps = 13;

const double* twiddle_cos() {
  static std::vector<double> t = [] {
    std::vector<double> v(static_cast<size_t>(kN) * kN);
    for (int k = 0; k < kN; ++k)
      for (int n = 0; n < kN; ++n)
        v[static_cast<size_t>(k) * kN + n] =
            std::cos(-2.0 * M_PI * k * n / kN);
    return v;
  }();
  return t.data();
}

const double* twiddle_sin() {
  static std::vector<double> t = [] {
    std::vector<double> v(static_cast<size_t>(kN) * kN);
    for (int k = 0; k < kN; ++k)
      for (int n = 0; n < kN; ++n)
        v[static_cast<size_t>(k) * kN + n] =
            std::sin(-2.0 * M_PI * k * n / kN);
    return v;
  }();
  return t.data();
}

double mel_of(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double hz_of(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

std::vector<double> naive_power_spectrum(const std::vector<double>& frame) {
  const double* tc = twiddle_cos();
  const double* ts = twiddle_sin();
  std::vector<double> power(kBins);
  for (int k = 0; k < kBins; ++k) {
    double re = 0.0, im = 0.0;
    const double* ck = tc + static_cast<size_t>(k) * kN;
    const double* sk = ts + static_cast<size_t>(k) * kN;
    for (size_t n = 0; n < frame.size() && n < kN; ++n) {
      re += frame[n] * ck[n];
      im += frame[n] * sk[n];
    }
    power[k] = re * re + im * im;
  }
  return power;
}

std::vector<std::vector<double>> naive_mfcc(const std::vector<float>& samples) {
  const long n = static_cast<long>(samples.size());
  const long frames = n < kWin ? 0 : (n - kWin) / kHop + 1;

  std::vector<double> window(kWin);
  for (int i = 0; i < kWin; ++i)
    window[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (kWin - 1));

  // triangular mel filters, 28 boundaries equally spaced in mel over 0..8000
  std::vector<double> bounds(kMels + 2);
  for (int i = 0; i < kMels + 2; ++i)
    bounds[i] = hz_of(mel_of(8000.0) * i / (kMels + 1));
  std::vector<std::vector<double>> filters(kMels,
                                           std::vector<double>(kBins, 0.0));
  for (int m = 0; m < kMels; ++m) {
    for (int k = 0; k < kBins; ++k) {
      const double hz = k * 16000.0 / kN;
      if (hz > bounds[m] && hz < bounds[m + 1])
        filters[m][k] = (hz - bounds[m]) / (bounds[m + 1] - bounds[m]);
      else if (hz >= bounds[m + 1] && hz < bounds[m + 2])
        filters[m][k] = (bounds[m + 2] - hz) / (bounds[m + 2] - bounds[m + 1]);
    }
  }

  std::vector<std::vector<double>> out(
      kCeps, std::vector<double>(static_cast<size_t>(frames)));
  std::vector<double> frame(kWin), logmel(kMels);
  for (long f = 0; f < frames; ++f) {
    for (int i = 0; i < kWin; ++i)
      frame[i] = static_cast<double>(samples[f * kHop + i]) * window[i];
    const auto power = naive_power_spectrum(frame);
    for (int m = 0; m < kMels; ++m) {
      double e = 0.0;
      for (int k = 0; k < kBins; ++k) e += filters[m][k] * power[k];
      logmel[m] = std::log(e + 1e-10);
    }
    for (int k = 0; k < kCeps; ++k) {
      const double scale =
          k == 0 ? std::sqrt(1.0 / kMels) : std::sqrt(2.0 / kMels);
      double c = 0.0;
      for (int m = 0; m < kMels; ++m)
        c += scale * std::cos(M_PI * k * (2 * m + 1) / (2.0 * kMels)) *
             logmel[m];
      out[k][static_cast<size_t>(f)] = c;
    }
  }
  return out;
}

}  // namespace seqemo::oracle
