// nrt/tests/features_test.cc

// Copyright 2026  The noisy-rnnt Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "nrt/features.h"

namespace nrt {
namespace {

AudioClip Sine(double hz, std::size_t n, double rate = 16000.0) {
  AudioClip clip;
  clip.sample_rate = rate;
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    clip.samples[i] = 0.5 * std::sin(2.0 * std::numbers::pi * hz * i / rate);
  return clip;
}

AudioClip WhiteNoise(std::size_t n, std::uint64_t seed) {
  AudioClip clip;
  RngStream rng(seed);
  clip.samples.resize(n);
  for (auto &s : clip.samples) s = 0.1 * rng.Normal();
  return clip;
}

std::size_t PeakBin(const std::vector<double> &x, std::size_t n_fft) {
  std::vector<double> frame(x.begin(), x.begin() + n_fft);
  const auto hann = HannWindow(n_fft);
  for (std::size_t i = 0; i < n_fft; ++i) frame[i] *= hann[i];
  const auto mag = MagnitudeSpectrum(frame, n_fft);
  return static_cast<std::size_t>(std::max_element(mag.begin(), mag.end()) - mag.begin());
}

TEST(SpeedPerturb, UnitRatioIsIdentity) {
  AudioClip clip = WhiteNoise(777, 1);
  EXPECT_EQ(SpeedPerturb(clip, 1.0).samples, clip.samples);
}

TEST(SpeedPerturb, LengthArithmetic) {
  AudioClip clip = WhiteNoise(1000, 2);
  const auto n = SpeedPerturb(clip, 0.9).samples.size();
  EXPECT_GE(n, 1110u);
  EXPECT_LE(n, 1112u);
  EXPECT_NEAR(static_cast<double>(SpeedPerturb(clip, 1.1).samples.size()), 1000 / 1.1, 1.0);
}

TEST(SpeedPerturb, EmptyClipStaysEmpty) {
  EXPECT_TRUE(SpeedPerturb(AudioClip{}, 0.9).samples.empty());
}

TEST(SpeedPerturb, RoundTripDuration) {
  for (double ratio : {0.9, 1.1, 0.75, 1.3}) {
    for (std::size_t n : {1000u, 1601u, 16000u}) {
      AudioClip clip = WhiteNoise(n, n);
      auto back = SpeedPerturb(SpeedPerturb(clip, ratio), 1.0 / ratio);
      EXPECT_LE(std::abs(static_cast<long>(back.samples.size()) - static_cast<long>(n)), 2)
          << ratio << " " << n;
    }
  }
}

TEST(SpeedPerturb, SinePeakMovesByRatio) {
  const std::size_t n_fft = 8192;
  const double bin_hz = 16000.0 / n_fft;
  AudioClip clip = Sine(100.0, 16000);
  EXPECT_NEAR(static_cast<double>(PeakBin(clip.samples, n_fft)), 100.0 / bin_hz, 1.0);
  auto fast = SpeedPerturb(clip, 1.1);
  EXPECT_NEAR(static_cast<double>(PeakBin(fast.samples, n_fft)), 110.0 / bin_hz, 1.0);
  auto slow = SpeedPerturb(clip, 0.9);
  EXPECT_NEAR(static_cast<double>(PeakBin(slow.samples, n_fft)), 90.0 / bin_hz, 1.0);
}

TEST(LogMel, SilenceMapsToLogFloor) {
  AudioClip clip;
  clip.samples.assign(16000, 0.0);
  auto feat = ComputeLogMel(clip);
  ASSERT_EQ(feat.num_channels(), 80u);
  for (double v : feat.frames.data()) ASSERT_EQ(v, std::log(1e-10));
}

TEST(LogMel, FrameArithmetic) {
  AudioClip clip = WhiteNoise(16000, 3);
  EXPECT_EQ(ComputeLogMel(clip).num_frames(), 98u);
  clip.samples.resize(400);
  EXPECT_EQ(ComputeLogMel(clip).num_frames(), 1u);
  clip.samples.resize(559);
  EXPECT_EQ(ComputeLogMel(clip).num_frames(), 1u);
  clip.samples.resize(560);
  EXPECT_EQ(ComputeLogMel(clip).num_frames(), 2u);
}

TEST(LogMel, ShortClipIsEmptyFeatureError) {
  AudioClip clip = WhiteNoise(399, 4);
  EXPECT_THROW(ComputeLogMel(clip), DataError);
}

TEST(LogMel, Deterministic) {
  AudioClip clip = WhiteNoise(4000, 5);
  EXPECT_EQ(ComputeLogMel(clip).frames.vec(), ComputeLogMel(clip).frames.vec());
}

// Independent path: direct O(N^2) DFT, filters rebuilt from the HTK formula.
TEST(LogMel, MatchesDirectSummationOracle) {
  AudioClip clip = WhiteNoise(1200, 6);
  auto feat = ComputeLogMel(clip);
  const std::size_t win = 400, hop = 160, nfft = 512, bins = 257, mels = 80;
  auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  const double mel_hi = mel(8000.0), step = mel_hi / (mels + 1);
  for (std::size_t t = 0; t < feat.num_frames(); ++t) {
    std::vector<double> spec(bins);
    for (std::size_t k = 0; k < bins; ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t i = 0; i < win; ++i) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (win - 1.0));
        const double x = clip.samples[t * hop + i] * w;
        acc += x * std::polar(1.0, -2.0 * std::numbers::pi * k * i / nfft);
      }
      spec[k] = std::abs(acc);
    }
    for (std::size_t m = 0; m < mels; ++m) {
      const double l = step * m, c = step * (m + 1), r = step * (m + 2);
      double e = 0.0;
      for (std::size_t k = 0; k < bins; ++k) {
        const double f = mel(k * 16000.0 / nfft);
        double w = 0.0;
        if (f > l && f <= c) w = (f - l) / (c - l);
        if (f > c && f < r) w = (r - f) / (r - c);
        e += w * spec[k];
      }
      const double expected = std::log(std::max(e, 1e-10));
      const double got = feat.frames.at(t, m);
      ASSERT_LE(std::abs(got - expected), 1e-10 * std::max(1.0, std::abs(expected)))
          << "frame " << t << " mel " << m;
    }
  }
}

FeatureMatrix Ones(std::size_t frames, std::size_t channels) {
  FeatureMatrix f;
  f.frames = Tensor::Full({frames, channels}, 1.0);
  return f;
}

TEST(SpecAugment, NoOpConfig) {
  SpecAugmentConfig cfg{.freq_mask_param = 0, .num_freq_masks = 1, .num_time_masks = 0};
  RngStream rng(1);
  FeatureMatrix f;
  RngStream init(2);
  f.frames = Tensor::RandomNormal({50, 80}, init);
  EXPECT_EQ(SpecAugment(f, cfg, rng).frames.vec(), f.frames.vec());
}

TEST(SpecAugment, ZeroRatioMasksNoTime) {
  SpecAugmentConfig cfg{.freq_mask_param = 0, .num_time_masks = 10, .max_time_mask_ratio = 0.0};
  RngStream rng(1);
  auto out = SpecAugment(Ones(200, 80), cfg, rng);
  for (double v : out.frames.data()) ASSERT_EQ(v, 1.0);
}

TEST(SpecAugment, FrequencyMaskWidthMonteCarlo) {
  SpecAugmentConfig cfg{.freq_mask_param = 27, .num_time_masks = 0};
  RngStream rng(123);
  auto ones = Ones(1, 80);
  double total = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    auto out = SpecAugment(ones, cfg, rng);
    for (double v : out.frames.data()) total += (v == 0.0);
  }
  const double mean = total / draws;
  EXPECT_GE(mean, 13.0);
  EXPECT_LE(mean, 14.0);
}

TEST(SpecAugment, NeverIncreasesMagnitudeAndKeepsUnmaskedBits) {
  SpecAugmentConfig cfg{.freq_mask_param = 27, .num_time_masks = 10, .max_time_mask_ratio = 0.05};
  RngStream rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    FeatureMatrix f;
    f.frames = Tensor::RandomNormal({300, 80}, rng, 3.0);
    auto out = SpecAugment(f, cfg, rng);
    for (std::size_t i = 0; i < f.frames.numel(); ++i) {
      const double a = f.frames.vec()[i], b = out.frames.vec()[i];
      ASSERT_TRUE(b == 0.0 || b == a);
      ASSERT_LE(std::abs(b), std::abs(a));
    }
  }
}

TEST(SpecAugment, InvalidConfig) {
  RngStream rng(1);
  SpecAugmentConfig cfg{.freq_mask_param = 81};
  EXPECT_THROW(SpecAugment(Ones(10, 80), cfg, rng), ConfigError);
  cfg = {.max_time_mask_ratio = 1.5};
  EXPECT_THROW(SpecAugment(Ones(10, 80), cfg, rng), ConfigError);
}

TEST(FileFormats, WavAndFeatureRoundTrip) {
  auto dir = std::filesystem::temp_directory_path() / "nrt_features_test";
  std::filesystem::create_directories(dir);
  AudioClip clip = Sine(440.0, 3200);
  WriteWav((dir / "a.wav").string(), clip);
  AudioClip back = ReadWav((dir / "a.wav").string());
  ASSERT_EQ(back.samples.size(), clip.samples.size());
  EXPECT_EQ(back.sample_rate, 16000.0);
  for (std::size_t i = 0; i < clip.samples.size(); ++i)
    ASSERT_NEAR(back.samples[i], clip.samples[i], 1.0 / 32768.0);

  auto feat = ComputeLogMel(back);
  WriteFeatures((dir / "a.feat").string(), feat);
  auto fb = ReadFeatures((dir / "a.feat").string());
  ASSERT_EQ(fb.frames.shape(), feat.frames.shape());
  for (std::size_t i = 0; i < feat.frames.numel(); ++i)
    ASSERT_EQ(fb.frames.vec()[i], static_cast<double>(static_cast<float>(feat.frames.vec()[i])));
  std::filesystem::remove_all(dir);
  EXPECT_THROW(ReadFeatures((dir / "missing.feat").string()), DataError);
}

}  // namespace
}  // namespace nrt
