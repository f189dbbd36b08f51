// nrt/features.h

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

#ifndef NRT_FEATURES_H_
#define NRT_FEATURES_H_

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "nrt/rng.h"
#include "nrt/tensor.h"

namespace nrt {

struct AudioClip {
  std::vector<double> samples;
  double sample_rate = 16000.0;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// T x n_mels log filterbank energies, one row per frame.
struct FeatureMatrix {
  Tensor frames;
  double frame_shift_ms = 10.0;
  double frame_length_ms = 25.0;

  std::size_t num_frames() const { return frames.defined() ? frames.rows() : 0; }
  std::size_t num_channels() const { return frames.defined() ? frames.cols() : 0; }
};

// Resamples the time axis by linear interpolation so the clip plays `ratio`
// times faster: output sample i is the input read at position i * ratio.
// Output length is floor((n - 1) / ratio) + 1. Empty in, empty out.
AudioClip SpeedPerturb(const AudioClip &clip, double ratio);

struct LogMelOptions {
  int num_mels = 80;
  int fft_size = 512;
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  double low_freq = 0.0;
  double high_freq = 0.0;  // <= 0 means Nyquist
  double log_floor = 1e-10;
};

// HTK mel scale.
double HzToMel(double hz);
double MelToHz(double mel);

// Triangular filters on the HTK mel scale, num_mels x (fft_size / 2 + 1).
class MelFilterbank {
 public:
  MelFilterbank(const LogMelOptions &opts, double sample_rate);

  std::size_t num_mels() const { return num_mels_; }
  std::size_t num_bins() const { return num_bins_; }
  double weight(std::size_t mel, std::size_t bin) const {
    return weights_[mel * num_bins_ + bin];
  }
  // Applies the filters to one magnitude spectrum.
  std::vector<double> Apply(const std::vector<double> &spectrum) const;

 private:
  std::size_t num_mels_;
  std::size_t num_bins_;
  std::vector<double> weights_;
};

// In-place iterative radix-2 FFT; size must be a power of two.
void Fft(std::vector<std::complex<double>> &a);

// |X_k| for k = 0 .. n/2 of a zero-padded real frame.
std::vector<double> MagnitudeSpectrum(const std::vector<double> &frame,
                                      std::size_t fft_size);

// Symmetric Hann window of length n.
std::vector<double> HannWindow(std::size_t n);

// Frames = floor((n - window) / hop) + 1. Throws DataError when the clip is
// shorter than one window.
FeatureMatrix ComputeLogMel(const AudioClip &clip, const LogMelOptions &opts = {});

struct SpecAugmentConfig {
  int freq_mask_param = 27;      // F
  int num_freq_masks = 1;
  int num_time_masks = 10;       // T
  double max_time_mask_ratio = 0.05;  // p

  void Validate(std::size_t num_channels) const;
};

// Zeroes one frequency band of width f ~ U{0..F} and up to T time spans of
// width t ~ U{0..floor(p * frames)}. Unmasked cells are copied bit-exactly.
FeatureMatrix SpecAugment(const FeatureMatrix &feat, const SpecAugmentConfig &cfg,
                          RngStream &rng);

// 16-bit mono PCM WAV.
AudioClip ReadWav(const std::string &path);
void WriteWav(const std::string &path, const AudioClip &clip);

// Feature file: "NRTF" magic, u32 version (1), u32 rows, u32 cols, then
// rows * cols little-endian float32 values, row-major.
void WriteFeatures(const std::string &path, const FeatureMatrix &feat);
FeatureMatrix ReadFeatures(const std::string &path);

}  // namespace nrt

#endif  // NRT_FEATURES_H_
