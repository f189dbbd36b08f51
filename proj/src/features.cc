// nrt/src/features.cc

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

#include "nrt/features.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "nrt/binary_io.h"

namespace nrt {

AudioClip SpeedPerturb(const AudioClip &clip, double ratio) {
  if (!(ratio > 0)) throw ConfigError("SpeedPerturb: ratio must be positive");
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  const std::size_t n = clip.samples.size();
  if (n == 0) return out;
  if (ratio == 1.0) {
    out.samples = clip.samples;
    return out;
  }
  const auto out_len =
      static_cast<std::size_t>(std::floor(static_cast<double>(n - 1) / ratio)) + 1;
  out.samples.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * ratio;
    const auto j = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(j);
    if (j + 1 < n) {
      out.samples[i] = clip.samples[j] * (1.0 - frac) + clip.samples[j + 1] * frac;
    } else {
      out.samples[i] = clip.samples[n - 1];
    }
  }
  return out;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(const LogMelOptions &opts, double sample_rate)
    : num_mels_(static_cast<std::size_t>(opts.num_mels)),
      num_bins_(static_cast<std::size_t>(opts.fft_size / 2 + 1)) {
  if (opts.num_mels <= 0) throw ConfigError("MelFilterbank: num_mels must be positive");
  const double nyquist = sample_rate / 2.0;
  const double high = opts.high_freq > 0 ? opts.high_freq : nyquist;
  if (!(opts.low_freq >= 0 && opts.low_freq < high && high <= nyquist)) {
    throw ConfigError("MelFilterbank: bad frequency range");
  }
  const double mel_lo = HzToMel(opts.low_freq), mel_hi = HzToMel(high);
  const double delta = (mel_hi - mel_lo) / static_cast<double>(num_mels_ + 1);
  weights_.assign(num_mels_ * num_bins_, 0.0);
  for (std::size_t m = 0; m < num_mels_; ++m) {
    const double left = mel_lo + delta * static_cast<double>(m);
    const double center = left + delta;
    const double right = center + delta;
    for (std::size_t k = 0; k < num_bins_; ++k) {
      const double hz = static_cast<double>(k) * sample_rate / opts.fft_size;
      const double mel = HzToMel(hz);
      double w = 0.0;
      if (mel > left && mel <= center) {
        w = (mel - left) / (center - left);
      } else if (mel > center && mel < right) {
        w = (right - mel) / (right - center);
      }
      weights_[m * num_bins_ + k] = w;
    }
  }
}

std::vector<double> MelFilterbank::Apply(const std::vector<double> &spectrum) const {
  std::vector<double> out(num_mels_, 0.0);
  for (std::size_t m = 0; m < num_mels_; ++m) {
    const double *w = weights_.data() + m * num_bins_;
    double acc = 0.0;
    for (std::size_t k = 0; k < num_bins_; ++k) acc += w[k] * spectrum[k];
    out[m] = acc;
  }
  return out;
}

void Fft(std::vector<std::complex<double>> &a) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw ConfigError("Fft: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> w(std::cos(ang * k), std::sin(ang * k));
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

std::vector<double> MagnitudeSpectrum(const std::vector<double> &frame,
                                      std::size_t fft_size) {
  if (frame.size() > fft_size) throw ConfigError("MagnitudeSpectrum: frame longer than FFT");
  std::vector<std::complex<double>> buf(fft_size);
  for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i];
  Fft(buf);
  std::vector<double> mag(fft_size / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(buf[k]);
  return mag;
}

std::vector<double> HannWindow(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / static_cast<double>(n - 1));
  return w;
}

FeatureMatrix ComputeLogMel(const AudioClip &clip, const LogMelOptions &opts) {
  const auto window =
      static_cast<std::size_t>(std::lround(clip.sample_rate * opts.frame_length_ms / 1000.0));
  const auto hop =
      static_cast<std::size_t>(std::lround(clip.sample_rate * opts.frame_shift_ms / 1000.0));
  if (window == 0 || hop == 0) throw ConfigError("ComputeLogMel: empty window or hop");
  if (window > static_cast<std::size_t>(opts.fft_size)) {
    throw ConfigError("ComputeLogMel: window longer than FFT size");
  }
  if (clip.samples.size() < window) {
    throw DataError("ComputeLogMel: clip of " + std::to_string(clip.samples.size()) +
                    " samples is shorter than one " + std::to_string(window) +
                    "-sample window; no features");
  }
  const std::size_t num_frames = (clip.samples.size() - window) / hop + 1;
  MelFilterbank bank(opts, clip.sample_rate);
  const auto hann = HannWindow(window);

  FeatureMatrix feat;
  feat.frame_length_ms = opts.frame_length_ms;
  feat.frame_shift_ms = opts.frame_shift_ms;
  feat.frames = Tensor({num_frames, bank.num_mels()});
  std::vector<double> frame(window);
  for (std::size_t t = 0; t < num_frames; ++t) {
    for (std::size_t i = 0; i < window; ++i) frame[i] = clip.samples[t * hop + i] * hann[i];
    const auto energies = bank.Apply(MagnitudeSpectrum(frame, opts.fft_size));
    for (std::size_t m = 0; m < energies.size(); ++m)
      feat.frames.at(t, m) = std::log(std::max(energies[m], opts.log_floor));
  }
  return feat;
}

void SpecAugmentConfig::Validate(std::size_t num_channels) const {
  if (freq_mask_param < 0 || static_cast<std::size_t>(freq_mask_param) > num_channels) {
    throw ConfigError("SpecAugment: frequency mask parameter F=" +
                      std::to_string(freq_mask_param) + " exceeds " +
                      std::to_string(num_channels) + " channels");
  }
  if (num_time_masks < 0 || num_freq_masks < 0) {
    throw ConfigError("SpecAugment: mask counts must be non-negative");
  }
  if (!(max_time_mask_ratio >= 0.0 && max_time_mask_ratio <= 1.0)) {
    throw ConfigError("SpecAugment: max time-mask ratio must be in [0, 1]");
  }
}

FeatureMatrix SpecAugment(const FeatureMatrix &feat, const SpecAugmentConfig &cfg,
                          RngStream &rng) {
  const std::size_t frames = feat.num_frames(), channels = feat.num_channels();
  cfg.Validate(channels);
  FeatureMatrix out = feat;
  out.frames = feat.frames.Clone();
  if (frames == 0) return out;

  for (int k = 0; k < cfg.num_freq_masks; ++k) {
    const auto f = rng.UniformInt(0, cfg.freq_mask_param);
    const auto f0 = rng.UniformInt(0, static_cast<std::int64_t>(channels) - f);
    for (std::size_t t = 0; t < frames; ++t)
      for (auto c = f0; c < f0 + f; ++c) out.frames.at(t, static_cast<std::size_t>(c)) = 0.0;
  }

  const auto max_width = static_cast<std::int64_t>(
      std::floor(cfg.max_time_mask_ratio * static_cast<double>(frames)));
  if (max_width > 0) {
    for (int k = 0; k < cfg.num_time_masks; ++k) {
      const auto w = rng.UniformInt(0, max_width);
      const auto t0 = rng.UniformInt(0, static_cast<std::int64_t>(frames) - w);
      for (auto t = t0; t < t0 + w; ++t)
        for (std::size_t c = 0; c < channels; ++c) out.frames.at(static_cast<std::size_t>(t), c) = 0.0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// WAV

namespace {

std::string ReadTag(std::istream &is) {
  char tag[4];
  if (!is.read(tag, 4)) throw DataError("truncated WAV header");
  return std::string(tag, 4);
}

}  // namespace

AudioClip ReadWav(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open WAV file " + path);
  if (ReadTag(is) != "RIFF") throw DataError(path + ": not a RIFF file");
  io::ReadLE<std::uint32_t>(is, "RIFF size");
  if (ReadTag(is) != "WAVE") throw DataError(path + ": not a WAVE file");

  bool have_fmt = false;
  std::uint32_t sample_rate = 0;
  while (true) {
    const std::string tag = ReadTag(is);
    const auto size = io::ReadLE<std::uint32_t>(is, "chunk size");
    if (tag == "fmt ") {
      const auto format = io::ReadLE<std::uint16_t>(is);
      const auto channels = io::ReadLE<std::uint16_t>(is);
      sample_rate = io::ReadLE<std::uint32_t>(is);
      io::ReadLE<std::uint32_t>(is);  // byte rate
      io::ReadLE<std::uint16_t>(is);  // block align
      const auto bits = io::ReadLE<std::uint16_t>(is);
      if (format != 1 || channels != 1 || bits != 16) {
        throw DataError(path + ": only 16-bit mono PCM is supported");
      }
      if (size > 16) is.ignore(size - 16 + (size & 1));
      have_fmt = true;
    } else if (tag == "data") {
      if (!have_fmt) throw DataError(path + ": data chunk before fmt chunk");
      AudioClip clip;
      clip.sample_rate = sample_rate;
      clip.samples.resize(size / 2);
      for (auto &s : clip.samples) s = io::ReadLE<std::int16_t>(is, "PCM sample") / 32768.0;
      return clip;
    } else {
      is.ignore(size + (size & 1));
    }
  }
}

void WriteWav(const std::string &path, const AudioClip &clip) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write WAV file " + path);
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  const auto rate = static_cast<std::uint32_t>(clip.sample_rate);
  os.write("RIFF", 4);
  io::WriteLE<std::uint32_t>(os, 36 + data_bytes);
  os.write("WAVEfmt ", 8);
  io::WriteLE<std::uint32_t>(os, 16);
  io::WriteLE<std::uint16_t>(os, 1);
  io::WriteLE<std::uint16_t>(os, 1);
  io::WriteLE<std::uint32_t>(os, rate);
  io::WriteLE<std::uint32_t>(os, rate * 2);
  io::WriteLE<std::uint16_t>(os, 2);
  io::WriteLE<std::uint16_t>(os, 16);
  os.write("data", 4);
  io::WriteLE<std::uint32_t>(os, data_bytes);
  for (double s : clip.samples) {
    const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    io::WriteLE<std::int16_t>(os, static_cast<std::int16_t>(scaled));
  }
}

// ---------------------------------------------------------------------------
// Feature files

void WriteFeatures(const std::string &path, const FeatureMatrix &feat) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write feature file " + path);
  os.write("NRTF", 4);
  io::WriteLE<std::uint32_t>(os, 1);
  io::WriteLE<std::uint32_t>(os, static_cast<std::uint32_t>(feat.num_frames()));
  io::WriteLE<std::uint32_t>(os, static_cast<std::uint32_t>(feat.num_channels()));
  if (feat.frames.defined())
    for (double v : feat.frames.data()) io::WriteLE<float>(os, static_cast<float>(v));
  if (!os) throw DataError("write failed for " + path);
}

FeatureMatrix ReadFeatures(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open feature file " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "NRTF") {
    throw DataError(path + ": bad feature-file magic");
  }
  const auto version = io::ReadLE<std::uint32_t>(is, "version");
  if (version != 1) throw DataError(path + ": unsupported feature-file version");
  const auto rows = io::ReadLE<std::uint32_t>(is, "rows");
  const auto cols = io::ReadLE<std::uint32_t>(is, "cols");
  FeatureMatrix feat;
  feat.frames = Tensor({rows, cols});
  for (auto &v : feat.frames.vec()) v = io::ReadLE<float>(is, "feature value");
  return feat;
}

}  // namespace nrt
