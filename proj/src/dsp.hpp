// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef GASS_DSP_HPP_
#define GASS_DSP_HPP_

#include <complex>
#include <span>
#include <vector>

#include "audio_io.hpp"
#include "common.hpp"

namespace gass {

struct StftConfig {
  int frame_len = 1536;  // 32 ms at 48 kHz
  int hop = 384;         // 8 ms at 48 kHz
  enum class Window { kHann } window = Window::kHann;

  int bins() const { return frame_len / 2 + 1; }
  void validate() const;

  // 32 ms / 8 ms pair at an arbitrary rate; frame length forced to a
  // multiple of 4 so hop stays integral.
  static StftConfig for_rate(int32_t sample_rate_hz);
};

struct Spectrogram {
  int64_t frames = 0;  // T
  int bins = 0;        // B = frame_len/2 + 1
  StftConfig config;
  int64_t original_len = 0;
  int32_t sample_rate_hz = 0;
  std::vector<std::complex<double>> data;  // row-major T x B

  std::complex<double>& at(int64_t t, int b) { return data[t * bins + b]; }
  const std::complex<double>& at(int64_t t, int b) const {
    return data[t * bins + b];
  }
};

// Analysis with Hann window and frame_len/2 reflection padding at both ends;
// T = ceil((len + frame_len) / hop).
Spectrogram stft(const AudioClip& clip, const StftConfig& config);

// Overlap-add synthesis with window-square normalization, trimmed to
// original_len. Round trip istft(stft(x)) matches x to ~1e-6 max abs error.
AudioClip istft(const Spectrogram& spec);

// Length-N real FFT pair used by stft/istft and the toy separator adjoint.
// forward: out has n/2+1 bins (unnormalized DFT); inverse scales by 1/n.
void real_fft_forward(const double* in, int n, std::complex<double>* out);
void real_fft_inverse(const std::complex<double>* in, int n, double* out);

// Periodic Hann, w[i] = 0.5 - 0.5 cos(2 pi i / n).
std::vector<double> hann_window(int n);

// Polyphase Kaiser-windowed-sinc resampler (64 taps per phase, beta = 12,
// cutoff 0.95x Nyquist of the lower rate). Output length is
// round(len * target / source). Same-rate input passes through unchanged.
AudioClip resample(const AudioClip& clip, int32_t target_rate_hz);

// Scales so that max |x| == 1. Throws kSilentSource when the peak is at or
// below the 1e-6 silence floor.
AudioClip peak_normalize(const AudioClip& clip);

inline constexpr double kSilenceFloor = 1e-6;

// 10*log10(mean(x^2) + eps); silence floors at -120 dB.
double mean_energy_db(std::span<const double> samples);
double mean_energy_db(const AudioClip& clip);

}  // namespace gass

#endif  // GASS_DSP_HPP_
