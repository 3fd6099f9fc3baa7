// cmdnn/features.hpp

// Copyright 2026  The cmdnn authors

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

#ifndef CMDNN_FEATURES_HPP_
#define CMDNN_FEATURES_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmdnn/tensor.hpp"

namespace cmdnn {

/* Audio input
 * -----------
 */

struct AudioSignal {
  std::vector<double> samples;  // in [-1, 1]
  double sample_rate = 16000.0;
};

namespace detail {

inline std::int16_t pcm16_from_bytes(const unsigned char* b) {
  return static_cast<std::int16_t>(static_cast<std::uint16_t>(b[0]) |
                                   (static_cast<std::uint16_t>(b[1]) << 8));
}

}  // namespace detail

/// Mono PCM 16-bit little-endian RIFF/WAVE reader. Unknown chunks are
/// skipped; fmt and data chunks are required.
inline AudioSignal read_wav(std::istream& is, const std::string& name = "<wav>") {
  auto fail = [&name](const std::string& what) -> void {
    throw std::runtime_error("read_wav: " + name + ": " + what);
  };
  unsigned char hdr[12];
  if (!is.read(reinterpret_cast<char*>(hdr), 12)) fail("truncated RIFF header");
  if (std::string(reinterpret_cast<char*>(hdr), 4) != "RIFF" ||
      std::string(reinterpret_cast<char*>(hdr) + 8, 4) != "WAVE") {
    fail("not a RIFF/WAVE file");
  }
  double sample_rate = 0.0;
  int channels = 0, bits = 0, format = 0;
  std::vector<double> samples;
  bool got_fmt = false, got_data = false;
  while (!got_data) {
    unsigned char chunk_hdr[8];
    if (!is.read(reinterpret_cast<char*>(chunk_hdr), 8)) {
      fail("missing data chunk");
    }
    const std::string id(reinterpret_cast<char*>(chunk_hdr), 4);
    const std::uint32_t size = static_cast<std::uint32_t>(chunk_hdr[4]) |
                               (static_cast<std::uint32_t>(chunk_hdr[5]) << 8) |
                               (static_cast<std::uint32_t>(chunk_hdr[6]) << 16) |
                               (static_cast<std::uint32_t>(chunk_hdr[7]) << 24);
    if (id == "fmt ") {
      std::vector<unsigned char> body(size);
      if (size < 16 || !is.read(reinterpret_cast<char*>(body.data()), size)) {
        fail("truncated fmt chunk");
      }
      format = body[0] | (body[1] << 8);
      channels = body[2] | (body[3] << 8);
      sample_rate = static_cast<double>(
          static_cast<std::uint32_t>(body[4]) | (static_cast<std::uint32_t>(body[5]) << 8) |
          (static_cast<std::uint32_t>(body[6]) << 16) |
          (static_cast<std::uint32_t>(body[7]) << 24));
      bits = body[14] | (body[15] << 8);
      got_fmt = true;
    } else if (id == "data") {
      if (!got_fmt) fail("data chunk precedes fmt chunk");
      if (format != 1) fail("only PCM (format 1) is supported");
      if (channels != 1) {
        fail("only mono input is supported, file has " + std::to_string(channels) +
             " channels");
      }
      if (bits != 16) fail("only 16-bit samples are supported");
      const std::size_t n = size / 2;
      samples.resize(n);
      std::vector<unsigned char> body(size);
      if (!is.read(reinterpret_cast<char*>(body.data()), size)) {
        fail("truncated data chunk");
      }
      for (std::size_t i = 0; i < n; ++i) {
        samples[i] = static_cast<double>(detail::pcm16_from_bytes(&body[2 * i])) / 32768.0;
      }
      got_data = true;
    } else {
      is.seekg(static_cast<std::streamoff>(size + (size & 1)), std::ios::cur);
      if (!is) fail("truncated chunk '" + id + "'");
    }
  }
  return AudioSignal{std::move(samples), sample_rate};
}

inline AudioSignal read_wav_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_wav: cannot open " + path);
  return read_wav(is, path);
}

/// Headerless PCM 16-bit little-endian with a caller-declared sample rate.
inline AudioSignal read_raw_pcm16(std::istream& is, double sample_rate) {
  if (!(sample_rate > 0.0)) {
    throw std::invalid_argument("read_raw_pcm16: sample rate must be positive");
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  AudioSignal sig;
  sig.sample_rate = sample_rate;
  sig.samples.resize(bytes.size() / 2);
  for (std::size_t i = 0; i < sig.samples.size(); ++i) {
    sig.samples[i] = static_cast<double>(detail::pcm16_from_bytes(&bytes[2 * i])) / 32768.0;
  }
  return sig;
}

inline AudioSignal read_raw_pcm16_file(const std::string& path, double sample_rate) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_raw_pcm16: cannot open " + path);
  return read_raw_pcm16(is, sample_rate);
}

/* Framing and windowing
 * ---------------------
 */

inline std::size_t frame_length_samples(double sample_rate, double win_ms = 23.0) {
  if (!(sample_rate > 0.0) || !(win_ms > 0.0)) {
    throw std::invalid_argument("frame_length_samples: rate and window must be positive");
  }
  return static_cast<std::size_t>(std::lround(win_ms * sample_rate / 1000.0));
}

/// Slice the signal into windows of win_ms milliseconds advancing by half a
/// window; the tail shorter than one window is dropped.
inline std::vector<std::vector<double>> frame_signal(const AudioSignal& signal,
                                                     double win_ms = 23.0) {
  const std::size_t N = frame_length_samples(signal.sample_rate, win_ms);
  const std::size_t H = N / 2;
  if (N < 2) {
    throw std::invalid_argument("frame_signal: window of " + std::to_string(N) +
                                " samples is too short");
  }
  if (signal.samples.size() < N) {
    std::ostringstream msg;
    msg << "frame_signal: signal of " << signal.samples.size()
        << " samples is shorter than one window of " << N;
    throw std::invalid_argument(msg.str());
  }
  const std::size_t count = (signal.samples.size() - N) / H + 1;
  std::vector<std::vector<double>> frames(count);
  for (std::size_t i = 0; i < count; ++i) {
    frames[i].assign(signal.samples.begin() + static_cast<std::ptrdiff_t>(i * H),
                     signal.samples.begin() + static_cast<std::ptrdiff_t>(i * H + N));
  }
  return frames;
}

inline std::vector<double> hamming_window(std::size_t N) {
  std::vector<double> w(N, 1.0);
  const double denom = N > 1 ? static_cast<double>(N - 1) : 1.0;
  for (std::size_t i = 0; i < N; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * 3.14159265358979323846 *
                                  static_cast<double>(i) / denom);
  }
  return w;
}

inline std::vector<double> apply_hamming(const std::vector<double>& frame) {
  const std::vector<double> w = hamming_window(frame.size());
  std::vector<double> out(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) out[i] = frame[i] * w[i];
  return out;
}

/* Power spectrum
 * --------------
 */

inline std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

namespace detail {

/// Iterative radix-2 decimation-in-time transform; size must be a power of
/// two. Twiddles are recomputed per butterfly column from std::polar to keep
/// round-off independent of the stage order.
inline void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("fft_inplace: size " + std::to_string(n) +
                                " is not a power of two");
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j |= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * 3.14159265358979323846 / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> w = std::polar(1.0, ang * static_cast<double>(j));
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
      }
    }
  }
}

}  // namespace detail

/// Zero-pad to the next power of two M and return |X[k]|^2 for the M/2+1
/// nonnegative-frequency bins.
inline std::vector<double> power_spectrum(const std::vector<double>& frame) {
  if (frame.empty()) {
    throw std::invalid_argument("power_spectrum: empty frame");
  }
  const std::size_t M = next_pow2(frame.size());
  std::vector<std::complex<double>> a(M, {0.0, 0.0});
  for (std::size_t i = 0; i < frame.size(); ++i) a[i] = {frame[i], 0.0};
  detail::fft_inplace(a);
  std::vector<double> p(M / 2 + 1);
  for (std::size_t k = 0; k <= M / 2; ++k) p[k] = std::norm(a[k]);
  return p;
}

/* Critical-band filter bank
 * -------------------------
 * Centers are equally spaced on the Bark scale between 0 and the Nyquist
 * frequency; each filter is a Hamming-shaped bump whose support runs from
 * the previous center to the next one (virtual edges at 0 and Nyquist).
 */

inline double hz_to_bark(double hz) {
  return 13.0 * std::atan(0.00076 * hz) + 3.5 * std::atan((hz / 7500.0) * (hz / 7500.0));
}

inline double bark_to_hz(double bark, double hz_max) {
  double lo = 0.0, hi = hz_max;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hz_to_bark(mid) < bark) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct FilterBank {
  std::size_t n_filters = 0;
  Tensor weights;  // [n_filters, n_bins]
  std::vector<double> centers_hz;
};

inline FilterBank build_filterbank(std::size_t n_filters, double sample_rate,
                                   std::size_t n_bins) {
  if (n_filters < 1) {
    throw std::invalid_argument("build_filterbank: need at least one filter");
  }
  if (n_bins < 3) {
    throw std::invalid_argument("build_filterbank: need at least 3 spectral bins");
  }
  if (!(sample_rate > 0.0)) {
    throw std::invalid_argument("build_filterbank: sample rate must be positive");
  }
  const double nyquist = sample_rate / 2.0;
  const double bark_max = hz_to_bark(nyquist);
  const double denom = static_cast<double>(n_filters + 1);

  FilterBank fb;
  fb.n_filters = n_filters;
  fb.weights = Tensor({n_filters, n_bins});
  fb.centers_hz.resize(n_filters);

  std::vector<double> bin_bark(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    const double hz = static_cast<double>(k) * nyquist / static_cast<double>(n_bins - 1);
    bin_bark[k] = hz_to_bark(hz);
  }

  std::size_t prev_peak_bin = 0;
  for (std::size_t i = 0; i < n_filters; ++i) {
    // Band edges as exact fractions of the warped band, so the first support
    // starts at 0 and the last ends at bark_max with no rounding gap.
    const double lo = bark_max * (static_cast<double>(i) / denom);
    const double center = bark_max * (static_cast<double>(i + 1) / denom);
    const double hi = bark_max * (static_cast<double>(i + 2) / denom);
    fb.centers_hz[i] = bark_to_hz(center, nyquist);
    double best_w = 0.0;
    std::size_t best_bin = 0;
    bool tie = false;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double b = bin_bark[k];
      if (b < lo || b > hi) continue;
      const double t = (b - lo) / (hi - lo);
      const double w = 0.54 - 0.46 * std::cos(2.0 * 3.14159265358979323846 * t);
      fb.weights.at(i, k) = w;
      if (w > best_w) {
        best_w = w;
        best_bin = k;
        tie = false;
      } else if (w == best_w && w > 0.0) {
        tie = true;
      }
    }
    if (best_w <= 0.0 || tie || (i > 0 && best_bin <= prev_peak_bin)) {
      std::ostringstream msg;
      msg << "build_filterbank: " << n_filters
          << " filters are too many for " << n_bins
          << " bins at " << sample_rate << " Hz (filter " << i
          << " has no unique peak bin)";
      throw std::invalid_argument(msg.str());
    }
    prev_peak_bin = best_bin;
  }
  return fb;
}

/// ln(max(filter . spectrum, 1e-10)) per filter.
inline Tensor lhcb_vector(const std::vector<double>& spectrum, const FilterBank& fb) {
  if (spectrum.size() != fb.weights.dim(1)) {
    throw std::invalid_argument("lhcb_vector: spectrum of " +
                                std::to_string(spectrum.size()) +
                                " bins does not match filter bank " +
                                fb.weights.shape_string());
  }
  const double floor_eps = 1e-10;
  Tensor out({fb.n_filters});
  for (std::size_t i = 0; i < fb.n_filters; ++i) {
    double acc = 0.0;
    const double* row = fb.weights.raw() + i * spectrum.size();
    for (std::size_t k = 0; k < spectrum.size(); ++k) acc += row[k] * spectrum[k];
    out[i] = std::log(std::max(acc, floor_eps));
  }
  return out;
}

/* Context stacking and normalization
 * ----------------------------------
 */

/// Window t concatenates frames t-floor(w/2) .. t+ceil(w/2)-1, replicating
/// the first and last frame past the boundaries; one window per frame.
inline Tensor stack_context(const Tensor& frames, std::size_t width) {
  if (frames.rank() != 2) {
    throw std::invalid_argument("stack_context: expected [n_frames, n_filters], got " +
                                frames.shape_string());
  }
  if (width < 1) {
    throw std::invalid_argument("stack_context: width must be >= 1");
  }
  const std::size_t n = frames.dim(0), f = frames.dim(1);
  if (n == 0) {
    throw std::invalid_argument("stack_context: empty frame sequence");
  }
  const std::ptrdiff_t left = static_cast<std::ptrdiff_t>(width / 2);
  Tensor out({n, width * f});
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t w = 0; w < width; ++w) {
      std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) -
                           left + static_cast<std::ptrdiff_t>(w);
      src = std::clamp<std::ptrdiff_t>(src, 0, static_cast<std::ptrdiff_t>(n) - 1);
      std::copy(frames.raw() + static_cast<std::size_t>(src) * f,
                frames.raw() + (static_cast<std::size_t>(src) + 1) * f,
                out.raw() + t * width * f + w * f);
    }
  }
  return out;
}

struct FeatureStats {
  Tensor mean;   // [n_filters]
  Tensor stdev;  // [n_filters]
};

inline FeatureStats compute_feature_stats(const Tensor& frames) {
  if (frames.rank() != 2 || frames.dim(0) == 0) {
    throw std::invalid_argument("compute_feature_stats: expected nonempty [n, f], got " +
                                frames.shape_string());
  }
  const std::size_t n = frames.dim(0), f = frames.dim(1);
  FeatureStats stats{Tensor({f}), Tensor({f})};
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < f; ++j) stats.mean[j] += frames.at(t, j);
  }
  for (std::size_t j = 0; j < f; ++j) stats.mean[j] /= static_cast<double>(n);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < f; ++j) {
      const double d = frames.at(t, j) - stats.mean[j];
      stats.stdev[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < f; ++j) {
    stats.stdev[j] = std::sqrt(stats.stdev[j] / static_cast<double>(n));
  }
  return stats;
}

/// Per-coefficient (x - mean) / max(stdev, 1e-8), applied before stacking.
inline Tensor apply_feature_norm(const Tensor& frames, const FeatureStats& stats) {
  if (frames.rank() != 2 || frames.dim(1) != stats.mean.dim(0)) {
    throw std::invalid_argument("apply_feature_norm: frames " + frames.shape_string() +
                                " do not match stats of " +
                                std::to_string(stats.mean.dim(0)) + " coefficients");
  }
  const std::size_t n = frames.dim(0), f = frames.dim(1);
  Tensor out({n, f});
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < f; ++j) {
      out.at(t, j) = (frames.at(t, j) - stats.mean[j]) / std::max(stats.stdev[j], 1e-8);
    }
  }
  return out;
}

/* Whole-signal front end
 * ----------------------
 */

struct FeatureConfig {
  std::size_t n_filters = 24;
  double win_ms = 23.0;
  std::size_t context_width = 15;
  bool normalize = true;
};

/// Raw per-frame coefficients (before normalization and stacking).
inline Tensor lhcb_frames(const AudioSignal& signal, const FeatureConfig& cfg) {
  const std::vector<std::vector<double>> frames = frame_signal(signal, cfg.win_ms);
  const std::size_t N = frames[0].size();
  const std::size_t n_bins = next_pow2(N) / 2 + 1;
  const FilterBank fb = build_filterbank(cfg.n_filters, signal.sample_rate, n_bins);
  Tensor out({frames.size(), cfg.n_filters});
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::vector<double> p = power_spectrum(apply_hamming(frames[i]));
    const Tensor v = lhcb_vector(p, fb);
    std::copy(v.raw(), v.raw() + cfg.n_filters, out.raw() + i * cfg.n_filters);
  }
  return out;
}

}  // namespace cmdnn

#endif  // CMDNN_FEATURES_HPP_
