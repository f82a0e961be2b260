// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>

namespace gass {

namespace {

// FFTW plan creation is not thread-safe; execution on the plan's own buffers
// is serialized per thread via thread_local caching.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftPlans {
  int n = 0;
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  explicit FftPlans(int size) : n(size) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    real = fftw_alloc_real(n);
    cplx = fftw_alloc_complex(n / 2 + 1);
    fwd = fftw_plan_dft_r2c_1d(n, real, cplx, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(n, cplx, real, FFTW_ESTIMATE);
  }
  ~FftPlans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(cplx);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
};

FftPlans& plans_for(int n) {
  thread_local std::map<int, std::unique_ptr<FftPlans>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<FftPlans>(n);
  return *slot;
}

// Mirror-fold an arbitrary index into [0, len). len == 1 maps everything
// to 0.
int64_t reflect_index(int64_t i, int64_t len) {
  if (len == 1) return 0;
  const int64_t period = 2 * (len - 1);
  int64_t m = i % period;
  if (m < 0) m += period;
  return m < len ? m : period - m;
}

double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double x2 = 0.25 * x * x;
  for (int k = 1; k < 64; ++k) {
    term *= x2 / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum;
}

constexpr int kResampleTaps = 64;
constexpr double kKaiserBeta = 12.0;

struct ResampleFilter {
  int up = 0;    // L
  int down = 0;  // M
  // taps[phase * kResampleTaps + i] applies to x[t0 - 31 + i] for output
  // time t0 + phase/L.
  std::vector<double> taps;
};

std::shared_ptr<const ResampleFilter> filter_for(int up, int down) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const ResampleFilter>>
      cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{up, down}];
  if (slot) return slot;

  auto filt = std::make_shared<ResampleFilter>();
  filt->up = up;
  filt->down = down;
  filt->taps.resize(static_cast<size_t>(up) * kResampleTaps);

  const double cutoff = 0.95 * std::min(1.0, static_cast<double>(up) / down);
  const double half = kResampleTaps / 2.0;
  const double i0_beta = bessel_i0(kKaiserBeta);
  for (int phase = 0; phase < up; ++phase) {
    const double frac = static_cast<double>(phase) / up;
    double sum = 0.0;
    double* h = &filt->taps[static_cast<size_t>(phase) * kResampleTaps];
    for (int i = 0; i < kResampleTaps; ++i) {
      const double t = frac + (kResampleTaps / 2 - 1) - i;  // 31 .. -32
      const double u = t / half;
      double v = 0.0;
      if (std::abs(u) <= 1.0) {
        const double x = std::numbers::pi * cutoff * t;
        const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
        const double win =
            bessel_i0(kKaiserBeta * std::sqrt(1.0 - u * u)) / i0_beta;
        v = cutoff * sinc * win;
      }
      h[i] = v;
      sum += v;
    }
    // Unit DC gain per phase removes passband droop at the exact output grid.
    const double scale = 1.0 / sum;
    for (int i = 0; i < kResampleTaps; ++i) h[i] *= scale;
  }
  slot = std::move(filt);
  return slot;
}

}  // namespace

void StftConfig::validate() const {
  if (frame_len <= 0 || frame_len % 2 != 0)
    raise(ErrorKind::kInvalidArgument,
          "stft: frame_len must be positive and even");
  if (hop <= 0 || hop > frame_len)
    raise(ErrorKind::kInvalidArgument, "stft: need 0 < hop <= frame_len");
}

StftConfig StftConfig::for_rate(int32_t sample_rate_hz) {
  StftConfig config;
  config.frame_len =
      4 * static_cast<int>(std::llround(sample_rate_hz * 0.032 / 4.0));
  config.frame_len = std::max(config.frame_len, 8);
  config.hop = config.frame_len / 4;
  return config;
}

void real_fft_forward(const double* in, int n, std::complex<double>* out) {
  FftPlans& plans = plans_for(n);
  std::copy(in, in + n, plans.real);
  fftw_execute(plans.fwd);
  // std::complex<double> is layout-compatible with fftw's double[2]
  std::memcpy(reinterpret_cast<double*>(out), plans.cplx,
              sizeof(fftw_complex) * (n / 2 + 1));
}

void real_fft_inverse(const std::complex<double>* in, int n, double* out) {
  FftPlans& plans = plans_for(n);
  std::memcpy(plans.cplx, reinterpret_cast<const double*>(in),
              sizeof(fftw_complex) * (n / 2 + 1));
  fftw_execute(plans.inv);
  const double scale = 1.0 / n;
  for (int i = 0; i < n; ++i) out[i] = plans.real[i] * scale;
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

Spectrogram stft(const AudioClip& clip, const StftConfig& config) {
  config.validate();
  const int64_t len = clip.length();
  if (len == 0) raise(ErrorKind::kInvalidArgument, "stft: empty input");
  for (double s : clip.samples)
    if (!std::isfinite(s))
      raise(ErrorKind::kInvalidArgument, "stft: non-finite input sample");

  const int frame_len = config.frame_len;
  const int hop = config.hop;
  const int pad = frame_len / 2;
  const int64_t frames = (len + frame_len + hop - 1) / hop;  // ceil

  Spectrogram spec;
  spec.frames = frames;
  spec.bins = config.bins();
  spec.config = config;
  spec.original_len = len;
  spec.sample_rate_hz = clip.sample_rate_hz;
  spec.data.resize(static_cast<size_t>(frames) * spec.bins);

  const std::vector<double> window = hann_window(frame_len);
  std::vector<double> frame(frame_len);
  for (int64_t t = 0; t < frames; ++t) {
    const int64_t start = t * hop - pad;
    for (int i = 0; i < frame_len; ++i) {
      const int64_t src = reflect_index(start + i, len);
      frame[i] = clip.samples[src] * window[i];
    }
    real_fft_forward(frame.data(), frame_len, &spec.at(t, 0));
  }
  return spec;
}

AudioClip istft(const Spectrogram& spec) {
  spec.config.validate();
  if (spec.bins != spec.config.bins() ||
      spec.data.size() != static_cast<size_t>(spec.frames) * spec.bins)
    raise(ErrorKind::kInvalidArgument, "istft: inconsistent spectrogram shape");

  const int frame_len = spec.config.frame_len;
  const int hop = spec.config.hop;
  const int pad = frame_len / 2;
  const int64_t padded_len = (spec.frames - 1) * hop + frame_len;

  const std::vector<double> window = hann_window(frame_len);
  std::vector<double> acc(padded_len, 0.0);
  std::vector<double> norm(padded_len, 0.0);
  std::vector<double> frame(frame_len);
  for (int64_t t = 0; t < spec.frames; ++t) {
    real_fft_inverse(&spec.at(t, 0), frame_len, frame.data());
    const int64_t off = t * hop;
    for (int i = 0; i < frame_len; ++i) {
      acc[off + i] += frame[i] * window[i];
      norm[off + i] += window[i] * window[i];
    }
  }

  AudioClip out;
  out.sample_rate_hz = spec.sample_rate_hz;
  out.samples.resize(static_cast<size_t>(spec.original_len));
  for (int64_t i = 0; i < spec.original_len; ++i)
    out.samples[i] = acc[pad + i] / (norm[pad + i] + kEps);
  return out;
}

AudioClip resample(const AudioClip& clip, int32_t target_rate_hz) {
  if (target_rate_hz <= 0)
    raise(ErrorKind::kInvalidArgument, "resample: target rate must be > 0");
  if (clip.sample_rate_hz <= 0)
    raise(ErrorKind::kInvalidArgument, "resample: source rate must be > 0");
  if (clip.sample_rate_hz == target_rate_hz) return clip;

  AudioClip out;
  out.sample_rate_hz = target_rate_hz;
  const int64_t len = clip.length();
  if (len == 0) return out;

  const int64_t g = std::gcd<int64_t>(clip.sample_rate_hz, target_rate_hz);
  const int up = static_cast<int>(target_rate_hz / g);
  const int down = static_cast<int>(clip.sample_rate_hz / g);
  const auto filter = filter_for(up, down);

  const int64_t out_len = (len * up + down / 2) / down;  // round(len*L/M)
  out.samples.resize(static_cast<size_t>(out_len));
  const double* x = clip.samples.data();
  for (int64_t n = 0; n < out_len; ++n) {
    const int64_t pos = n * down;      // in units of 1/up input samples
    const int64_t t0 = pos / up;
    const int phase = static_cast<int>(pos % up);
    const double* h = &filter->taps[static_cast<size_t>(phase) * kResampleTaps];
    const int64_t base = t0 - (kResampleTaps / 2 - 1);
    double acc = 0.0;
    if (base >= 0 && base + kResampleTaps <= len) {
      for (int i = 0; i < kResampleTaps; ++i) acc += h[i] * x[base + i];
    } else {
      for (int i = 0; i < kResampleTaps; ++i) {
        const int64_t k = base + i;
        if (k >= 0 && k < len) acc += h[i] * x[k];
      }
    }
    out.samples[static_cast<size_t>(n)] = acc;
  }
  return out;
}

AudioClip peak_normalize(const AudioClip& clip) {
  double peak = 0.0;
  for (double s : clip.samples) peak = std::max(peak, std::abs(s));
  if (peak <= kSilenceFloor)
    raise(ErrorKind::kSilentSource,
          "peak_normalize: silent source (peak <= 1e-6)");
  AudioClip out = clip;
  const double scale = 1.0 / peak;
  for (double& s : out.samples) s *= scale;
  return out;
}

double mean_energy_db(std::span<const double> samples) {
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  const double mean = samples.empty() ? 0.0 : acc / samples.size();
  return 10.0 * std::log10(mean + kEps);
}

double mean_energy_db(const AudioClip& clip) {
  return mean_energy_db(std::span<const double>(clip.samples));
}

}  // namespace gass
