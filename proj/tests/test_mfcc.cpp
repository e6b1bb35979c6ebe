#include <cmath>

#include "doctest.h"
#include "seqemo/dsp/mfcc.hpp"
#include "seqemo/rng.hpp"
#include "support/mfcc_oracle.hpp"

using namespace seqemo;

namespace {

AudioClip make_clip(std::vector<float> samples) {
  AudioClip c;
  c.samples = std::move(samples);
  return c;
}

AudioClip random_clip(Rng& rng, int num_samples) {
  std::vector<float> s(static_cast<size_t>(num_samples));
  for (auto& v : s) v = static_cast<float>(rng.uniform(-0.5, 0.5));
  return make_clip(std::move(s));
}

AudioClip sine_clip(double freq, double seconds, double amp = 0.5) {
  const int n = static_cast<int>(seconds * kSampleRate);
  std::vector<float> s(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    s[static_cast<size_t>(i)] =
        static_cast<float>(amp * std::sin(2.0 * M_PI * freq * i / kSampleRate));
  return make_clip(std::move(s));
}

}  // namespace

TEST_CASE("frame arithmetic") {
  CHECK(frame_count(248000) == 1548);  // the 15.5 s padding target
  CHECK(frame_count(32000) == 198);
  CHECK(frame_count(400) == 1);
  CHECK(frame_count(559) == 1);
  CHECK(frame_count(560) == 2);

  AudioClip tiny = make_clip(std::vector<float>(399, 0.1f));
  CHECK_THROWS_AS(frame_and_window(tiny), DataError);
}

TEST_CASE("hamming window endpoints and identity on constant signal") {
  AudioClip ones = make_clip(std::vector<float>(800, 1.0f));
  auto frames = frame_and_window(ones);
  CHECK(frames.size() == 3);
  CHECK(frames[0][0] == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(frames[0][399] == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(frames[0][200] ==
        doctest::Approx(0.54 - 0.46 * std::cos(2.0 * M_PI * 200 / 399))
            .epsilon(1e-12));
  // every frame of the constant signal is the window itself
  for (const auto& f : frames)
    for (int i = 0; i < kFrameLength; ++i)
      CHECK(f[i] == doctest::Approx(0.54 - 0.46 * std::cos(2.0 * M_PI * i / 399))
                        .epsilon(1e-12));
}

TEST_CASE("power spectrum closed forms") {
  std::vector<double> zero(kFrameLength, 0.0);
  for (double p : power_spectrum(zero)) CHECK(p == 0.0);

  // unit impulse at n=0 carries the window value 0.08; |X[k]| = 0.08 for all k
  std::vector<double> impulse(kFrameLength, 0.0);
  impulse[0] = 0.08;
  for (double p : power_spectrum(impulse))
    CHECK(p == doctest::Approx(0.0064).epsilon(1e-12));
}

TEST_CASE("power spectrum matches the naive DFT oracle") {
  Rng rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> frame(kFrameLength);
    for (auto& v : frame) v = rng.uniform(-1.0, 1.0);
    const auto fast = power_spectrum(frame);
    const auto slow = oracle::naive_power_spectrum(frame);
    for (int k = 0; k < kFftBins; ++k) {
      const double denom = std::max(1e-12, std::abs(slow[k]));
      CHECK(std::abs(fast[k] - slow[k]) / denom < 1e-6);
    }
  }
}

TEST_CASE("mel scale and filterbank shape") {
  CHECK(hz_to_mel(8000.0) == doctest::Approx(2840.0).epsilon(1e-4));
  CHECK(mel_to_hz(hz_to_mel(3456.0)) == doctest::Approx(3456.0).epsilon(1e-9));

  const auto fb = build_mel_filterbank();
  CHECK(fb.weights.shape() == std::vector<int64_t>{26, 257});
  auto w = fb.weights.mat(26, 257);
  for (int m = 0; m < 26; ++m) {
    bool positive = false;
    for (int k = 0; k < 257; ++k) {
      CHECK(w(m, k) >= 0.0);
      if (w(m, k) > 0.0) positive = true;
    }
    CHECK(positive);
  }
  // each filter is a single triangle: rises then falls
  for (int m = 0; m < 26; ++m) {
    int peak = 0;
    for (int k = 1; k < 257; ++k)
      if (w(m, k) > w(m, peak)) peak = k;
    for (int k = 1; k <= peak; ++k) CHECK(w(m, k) >= w(m, k - 1) - 1e-12);
    for (int k = peak + 1; k < 257; ++k) CHECK(w(m, k) <= w(m, k - 1) + 1e-12);
  }
}

TEST_CASE("mfcc of silence is the DCT of a constant") {
  AudioClip silent = make_clip(std::vector<float>(32000, 0.0f));
  auto feat = mfcc_extract(silent);
  CHECK(feat.coefficients.shape() == std::vector<int64_t>{13, 198});
  auto m = feat.coefficients.mat(13, 198);
  const double c0 = std::sqrt(26.0) * std::log(1e-10);
  for (int t = 0; t < 198; ++t) {
    CHECK(m(0, t) == doctest::Approx(c0).epsilon(1e-6));
    for (int k = 1; k < 13; ++k)
      CHECK(m(k, t) == doctest::Approx(0.0).epsilon(1e-6));
  }
}

TEST_CASE("mfcc shape for a two second clip") {
  Rng rng(5);
  auto clip = random_clip(rng, 32000);
  auto feat = mfcc_extract(clip);
  CHECK(feat.coefficients.dim(0) == 13);
  CHECK(feat.coefficients.dim(1) == 198);
  CHECK(feat.coefficients.all_finite());
}

TEST_CASE("mfcc matches the end-to-end naive oracle on a sine") {
  auto clip = sine_clip(1000.0, 1.0);
  auto fast = mfcc_extract(clip);
  auto slow = oracle::naive_mfcc(clip.samples);
  auto m = fast.coefficients.mat(13, fast.num_frames());
  REQUIRE(static_cast<int64_t>(slow[0].size()) == fast.num_frames());
  for (int k = 0; k < 13; ++k)
    for (int64_t t = 0; t < fast.num_frames(); ++t)
      CHECK(std::abs(static_cast<double>(m(k, t)) -
                     slow[static_cast<size_t>(k)][static_cast<size_t>(t)]) <
            1e-5);
}

TEST_CASE("mfcc is a pure function of the clip") {
  Rng rng(77);
  auto clip = random_clip(rng, 24000);
  auto a = mfcc_extract(clip);
  auto b = mfcc_extract(clip);
  CHECK(a.coefficients.values() == b.coefficients.values());
}

TEST_CASE("amplitude scaling shifts only c0") {
  Rng rng(13);
  auto clip = random_clip(rng, 16000);
  AudioClip scaled = clip;
  const float gain = 3.7f;
  for (auto& s : scaled.samples) s *= gain;

  auto base = mfcc_extract(clip);
  auto amp = mfcc_extract(scaled);
  auto mb = base.coefficients.mat(13, base.num_frames());
  auto ma = amp.coefficients.mat(13, amp.num_frames());
  // log power gains 2*ln(g) per band, so c0 shifts by sqrt(26)*2*ln(g)
  const double shift = std::sqrt(26.0) * 2.0 * std::log(gain);
  for (int64_t t = 0; t < base.num_frames(); ++t) {
    CHECK(static_cast<double>(ma(0, t) - mb(0, t)) ==
          doctest::Approx(shift).epsilon(1e-4));
    for (int k = 1; k < 13; ++k)
      CHECK(std::abs(ma(k, t) - mb(k, t)) < 1e-4);
  }
}
