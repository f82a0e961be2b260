// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "toy_separator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "dataset_io.hpp"

namespace gass {

namespace {

constexpr char kModelMagic[8] = {'G', 'A', 'S', 'S', 'T', 'O', 'Y', '1'};
constexpr double kLog10Scale = 10.0 / std::numbers::ln10;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct ForwardState {
  Spectrogram mix_spec;          // X, constant w.r.t. parameters
  std::vector<double> features;  // T x B
  std::vector<double> masks;     // T x 4B, sigmoid already applied
  std::array<AudioClip, 4> estimates;
};

ForwardState forward_pass(const ToyModel& model, const AudioClip& mixture) {
  if (mixture.sample_rate_hz != model.sample_rate_hz)
    raise(ErrorKind::kInvalidArgument,
          "toy model expects " + std::to_string(model.sample_rate_hz) +
              " Hz input, got " + std::to_string(mixture.sample_rate_hz));
  for (double w : model.weights)
    if (!std::isfinite(w))
      raise(ErrorKind::kInvalidArgument, "toy model has non-finite weights");
  for (double b : model.bias)
    if (!std::isfinite(b))
      raise(ErrorKind::kInvalidArgument, "toy model has non-finite bias");

  ForwardState state;
  state.mix_spec = stft(mixture, model.stft_config);
  const int64_t frames = state.mix_spec.frames;
  const int bins = state.mix_spec.bins;
  const int out_cols = 4 * bins;

  state.features.resize(frames * bins);
  for (size_t i = 0; i < state.mix_spec.data.size(); ++i)
    state.features[i] = std::log(std::abs(state.mix_spec.data[i]) + kEps);

  state.masks.assign(static_cast<size_t>(frames) * out_cols, 0.0);
  for (int64_t t = 0; t < frames; ++t) {
    double* row = &state.masks[t * out_cols];
    std::memcpy(row, model.bias.data(), sizeof(double) * out_cols);
    const double* feat = &state.features[t * bins];
    for (int b = 0; b < bins; ++b) {
      const double f = feat[b];
      const double* wrow = &model.weights[static_cast<size_t>(b) * out_cols];
      for (int j = 0; j < out_cols; ++j) row[j] += f * wrow[j];
    }
    for (int j = 0; j < out_cols; ++j) {
      row[j] = sigmoid(row[j]);
      if (!std::isfinite(row[j]))
        raise(ErrorKind::kDataError, "non-finite value in mask layer");
    }
  }

  Spectrogram masked = state.mix_spec;
  for (int k = 0; k < 4; ++k) {
    for (int64_t t = 0; t < frames; ++t) {
      const double* mask = &state.masks[t * out_cols + k * bins];
      for (int b = 0; b < bins; ++b)
        masked.at(t, b) = state.mix_spec.at(t, b) * mask[b];
    }
    state.estimates[k] = istft(masked);
  }
  return state;
}

// Adjoint of dsp::istft: waveform gradient -> spectrogram-bin gradient.
// G[t,b] holds dL/dRe + i*dL/dIm of the masked bin.
std::vector<std::complex<double>> istft_adjoint(
    const std::vector<double>& g_wave, const Spectrogram& spec) {
  const int frame_len = spec.config.frame_len;
  const int hop = spec.config.hop;
  const int pad = frame_len / 2;
  const int64_t padded_len = (spec.frames - 1) * hop + frame_len;

  const std::vector<double> window = hann_window(frame_len);
  std::vector<double> norm(padded_len, 0.0);
  for (int64_t t = 0; t < spec.frames; ++t)
    for (int i = 0; i < frame_len; ++i)
      norm[t * hop + i] += window[i] * window[i];

  std::vector<double> g_acc(padded_len, 0.0);
  for (size_t p = 0; p < g_wave.size(); ++p)
    g_acc[pad + p] = g_wave[p] / (norm[pad + p] + kEps);

  std::vector<std::complex<double>> g_bins(
      static_cast<size_t>(spec.frames) * spec.bins);
  std::vector<double> g_frame(frame_len);
  std::vector<std::complex<double>> g_spec(spec.bins);
  const double inv_n = 1.0 / frame_len;
  for (int64_t t = 0; t < spec.frames; ++t) {
    const int64_t off = t * hop;
    for (int i = 0; i < frame_len; ++i)
      g_frame[i] = window[i] * g_acc[off + i];
    real_fft_forward(g_frame.data(), frame_len, g_spec.data());
    for (int b = 0; b < spec.bins; ++b) {
      const double c = (b == 0 || b == spec.bins - 1) ? 1.0 : 2.0;
      g_bins[t * spec.bins + b] = g_spec[b] * (c * inv_n);
    }
  }
  return g_bins;
}

double sum_squares(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

}  // namespace

ToyModel ToyModel::create(int32_t sample_rate_hz) {
  return create(sample_rate_hz, StftConfig::for_rate(sample_rate_hz));
}

ToyModel ToyModel::create(int32_t sample_rate_hz, const StftConfig& config) {
  config.validate();
  ToyModel model;
  model.sample_rate_hz = sample_rate_hz;
  model.stft_config = config;
  model.bins = config.bins();
  model.weights.assign(static_cast<size_t>(model.bins) * 4 * model.bins, 0.0);
  model.bias.assign(static_cast<size_t>(4) * model.bins, 0.0);
  return model;
}

void ToyModel::save(const std::string& path) const {
  static_assert(std::endian::native == std::endian::little,
                "model dump is little-endian");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::kDataError, path + ": cannot write model");
  out.write(kModelMagic, sizeof(kModelMagic));
  const int32_t header[4] = {sample_rate_hz, stft_config.frame_len,
                             stft_config.hop, bins};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(weights.data()),
            static_cast<std::streamsize>(weights.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(bias.data()),
            static_cast<std::streamsize>(bias.size() * sizeof(double)));
  if (!out) raise(ErrorKind::kDataError, path + ": model write failed");
}

ToyModel ToyModel::load(const std::string& path) {
  static_assert(std::endian::native == std::endian::little,
                "model dump is little-endian");
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::kFileNotFound, path + ": cannot open model");
  char magic[8];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
    raise(ErrorKind::kMalformedFile, path + ": not a toy model file");
  int32_t header[4];
  if (!in.read(reinterpret_cast<char*>(header), sizeof(header)))
    raise(ErrorKind::kMalformedFile, path + ": truncated model header");

  StftConfig config;
  config.frame_len = header[1];
  config.hop = header[2];
  ToyModel model = create(header[0], config);
  if (model.bins != header[3])
    raise(ErrorKind::kMalformedFile, path + ": inconsistent bin count");
  if (!in.read(reinterpret_cast<char*>(model.weights.data()),
               static_cast<std::streamsize>(model.weights.size() *
                                            sizeof(double))) ||
      !in.read(reinterpret_cast<char*>(model.bias.data()),
               static_cast<std::streamsize>(model.bias.size() * sizeof(double))))
    raise(ErrorKind::kMalformedFile, path + ": truncated model parameters");
  return model;
}

std::array<AudioClip, 4> toy_forward(const ToyModel& model,
                                     const AudioClip& mixture) {
  return forward_pass(model, mixture).estimates;
}

void ToyGradient::accumulate(const ToyGradient& other, double scale) {
  if (weights.size() != other.weights.size()) {
    weights.assign(other.weights.size(), 0.0);
    bias.assign(other.bias.size(), 0.0);
  }
  for (size_t i = 0; i < weights.size(); ++i)
    weights[i] += scale * other.weights[i];
  for (size_t i = 0; i < bias.size(); ++i) bias[i] += scale * other.bias[i];
}

double toy_loss_and_grad(const ToyModel& model, const AudioClip& mixture,
                         const std::array<AudioClip, 4>& targets,
                         const LossConfig& config, ToyGradient* gradient) {
  for (const AudioClip& target : targets)
    if (target.length() != mixture.length())
      raise(ErrorKind::kInvalidArgument,
            "toy_loss_and_grad: target/mixture length mismatch");

  const ForwardState state = forward_pass(model, mixture);

  std::array<std::span<const double>, 4> target_spans, estimate_spans;
  for (int i = 0; i < 4; ++i) {
    target_spans[i] = targets[i].samples;
    estimate_spans[i] = state.estimates[i].samples;
  }
  const PitResult pit =
      pit_loss(target_spans, estimate_spans, mixture.samples, config);
  if (gradient == nullptr) return pit.loss;

  const int bins = model.bins;
  const int out_cols = 4 * bins;
  const int64_t frames = state.mix_spec.frames;
  const double tau = config.tau_linear();
  const int64_t len = mixture.length();

  gradient->weights.assign(model.weights.size(), 0.0);
  gradient->bias.assign(model.bias.size(), 0.0);

  // dL/d logits, assembled estimate by estimate
  std::vector<double> g_logits(static_cast<size_t>(frames) * out_cols, 0.0);
  std::vector<double> g_wave(static_cast<size_t>(len));
  for (int e = 0; e < 4; ++e) {
    const auto target = target_spans[pit.permutation[e]];
    const auto estimate = estimate_spans[e];
    if (is_all_zero(target)) {
      const double denom =
          sum_squares(estimate) + tau * sum_squares(mixture.samples);
      const double scale = 0.25 * 2.0 * kLog10Scale / denom;
      for (int64_t i = 0; i < len; ++i) g_wave[i] = scale * estimate[i];
    } else {
      double diff_energy = 0.0;
      for (int64_t i = 0; i < len; ++i) {
        const double d = target[i] - estimate[i];
        diff_energy += d * d;
      }
      const double denom = diff_energy + tau * sum_squares(target);
      const double scale = 0.25 * 2.0 * kLog10Scale / denom;
      for (int64_t i = 0; i < len; ++i)
        g_wave[i] = scale * (estimate[i] - target[i]);
    }

    const std::vector<std::complex<double>> g_bins =
        istft_adjoint(g_wave, state.mix_spec);
    for (int64_t t = 0; t < frames; ++t) {
      double* g_row = &g_logits[t * out_cols + e * bins];
      const double* mask = &state.masks[t * out_cols + e * bins];
      for (int b = 0; b < bins; ++b) {
        const std::complex<double> x = state.mix_spec.at(t, b);
        const std::complex<double> g = g_bins[t * bins + b];
        const double g_mask = g.real() * x.real() + g.imag() * x.imag();
        g_row[b] = g_mask * mask[b] * (1.0 - mask[b]);
      }
    }
  }

  for (int64_t t = 0; t < frames; ++t) {
    const double* feat = &state.features[t * bins];
    const double* g_row = &g_logits[t * out_cols];
    for (int b = 0; b < bins; ++b) {
      const double f = feat[b];
      double* w_row = &gradient->weights[static_cast<size_t>(b) * out_cols];
      for (int j = 0; j < out_cols; ++j) w_row[j] += f * g_row[j];
    }
    for (int j = 0; j < out_cols; ++j) gradient->bias[j] += g_row[j];
  }
  return pit.loss;
}

TrainConfig TrainConfig::from_json(const std::string& json_text) {
  TrainConfig config;
  const nlohmann::json j = nlohmann::json::parse(json_text);
  config.learning_rate = j.value("learning_rate", config.learning_rate);
  config.steps = j.value("steps", config.steps);
  config.batch_size = j.value("batch_size", config.batch_size);
  config.seed = j.value("seed", config.seed);
  config.tau_db = j.value("tau_db", config.tau_db);
  config.momentum = j.value("momentum", config.momentum);
  if (config.learning_rate < 0.0 || config.steps < 1 || config.batch_size < 1)
    raise(ErrorKind::kInvalidArgument, "invalid train config");
  return config;
}

TrainResult train_toy(ToyModel model, const std::string& dataset_dir,
                      const TrainConfig& config) {
  if (config.steps < 1)
    raise(ErrorKind::kInvalidArgument, "train_toy: steps must be >= 1");
  const std::vector<std::string> mixes = list_mix_dirs(dataset_dir);
  if (mixes.empty())
    raise(ErrorKind::kDataError, dataset_dir + ": empty dataset");

  struct Item {
    AudioClip mixture;
    std::array<AudioClip, 4> targets;
  };
  std::vector<Item> items;
  items.reserve(mixes.size());
  for (const std::string& mix : mixes) {
    StemSet set = read_stem_set(std::filesystem::path(dataset_dir) / mix);
    if (set.mixture.sample_rate_hz != model.sample_rate_hz)
      raise(ErrorKind::kDataError,
            mix + ": dataset rate " +
                std::to_string(set.mixture.sample_rate_hz) +
                " != model rate " + std::to_string(model.sample_rate_hz));
    items.push_back({std::move(set.mixture), std::move(set.stems)});
  }

  // One fixed shuffle; batches cycle through it, so runs are reproducible.
  std::vector<size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(config.seed, 0x0Bd7));
  for (size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.uniform_int(static_cast<int64_t>(i))]);

  const LossConfig loss_config{config.tau_db};
  std::vector<double> vel_w(model.weights.size(), 0.0);
  std::vector<double> vel_b(model.bias.size(), 0.0);
  ToyGradient batch_grad, item_grad;

  TrainResult result;
  result.loss_curve.reserve(config.steps);
  size_t cursor = 0;
  for (int64_t step = 0; step < config.steps; ++step) {
    batch_grad.weights.assign(model.weights.size(), 0.0);
    batch_grad.bias.assign(model.bias.size(), 0.0);
    double loss_sum = 0.0;
    for (int b = 0; b < config.batch_size; ++b) {
      const Item& item = items[order[cursor]];
      cursor = (cursor + 1) % order.size();
      loss_sum += toy_loss_and_grad(model, item.mixture, item.targets,
                                    loss_config, &item_grad);
      batch_grad.accumulate(item_grad, 1.0 / config.batch_size);
    }
    const double loss = loss_sum / config.batch_size;
    result.loss_curve.push_back(loss);

    for (size_t i = 0; i < model.weights.size(); ++i) {
      vel_w[i] = config.momentum * vel_w[i] -
                 config.learning_rate * batch_grad.weights[i];
      model.weights[i] += vel_w[i];
    }
    for (size_t i = 0; i < model.bias.size(); ++i) {
      vel_b[i] =
          config.momentum * vel_b[i] - config.learning_rate * batch_grad.bias[i];
      model.bias[i] += vel_b[i];
    }
    if ((step + 1) % 50 == 0)
      log_info("train step " + std::to_string(step + 1) + " loss " +
               std::to_string(loss));
  }
  result.model = std::move(model);
  return result;
}

std::string GradCheckReport::to_json() const {
  nlohmann::json j;
  j["instances"] = nlohmann::json::array();
  for (const GradCheckInstance& inst : instances)
    j["instances"].push_back({{"k", inst.k},
                              {"loss", inst.loss},
                              {"max_rel_error", inst.max_rel_error}});
  j["max_rel_error"] = max_rel_error;
  j["tolerance"] = tolerance;
  j["passed"] = passed();
  return j.dump();
}

GradCheckReport grad_check(uint64_t seed, int instances,
                           int coords_per_instance) {
  constexpr int32_t kRate = 8000;
  constexpr int64_t kLen = 2000;  // 0.25 s
  constexpr double kStep = 1e-4;

  GradCheckReport report;
  Rng rng(derive_seed(seed, 0x6C));
  for (int inst = 0; inst < instances; ++inst) {
    ToyModel model = ToyModel::create(kRate);
    for (double& w : model.weights) w = rng.uniform(-0.01, 0.01);
    for (double& b : model.bias) b = rng.uniform(-1.0, 1.0);

    const int k = 1 + inst % 4;
    std::array<AudioClip, 4> targets;
    AudioClip mixture;
    mixture.sample_rate_hz = kRate;
    mixture.samples.assign(kLen, 0.0);
    for (int c = 0; c < 4; ++c) {
      targets[c].sample_rate_hz = kRate;
      targets[c].samples.assign(kLen, 0.0);
      if (c >= k) continue;
      const double f1 = rng.uniform(80.0, 3500.0);
      const double f2 = rng.uniform(80.0, 3500.0);
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double amp = rng.uniform(0.2, 0.8);
      for (int64_t i = 0; i < kLen; ++i) {
        const double t = static_cast<double>(i) / kRate;
        const double v =
            amp * (std::sin(2.0 * std::numbers::pi * f1 * t + phase) +
                   0.5 * std::sin(2.0 * std::numbers::pi * f2 * t)) +
            0.01 * rng.uniform(-1.0, 1.0);
        targets[c].samples[i] = v;
        mixture.samples[i] += v;
      }
    }

    GradCheckInstance record;
    record.k = k;
    ToyGradient grad;
    record.loss =
        toy_loss_and_grad(model, mixture, targets, LossConfig{}, &grad);

    const int64_t n_weights = static_cast<int64_t>(model.weights.size());
    const int64_t n_params = model.num_params();
    for (int c = 0; c < coords_per_instance; ++c) {
      const int64_t idx = rng.uniform_int(n_params);
      double* param = idx < n_weights ? &model.weights[idx]
                                      : &model.bias[idx - n_weights];
      const double analytic =
          idx < n_weights ? grad.weights[idx] : grad.bias[idx - n_weights];
      const double saved = *param;
      *param = saved + kStep;
      const double loss_plus =
          toy_loss_and_grad(model, mixture, targets, LossConfig{}, nullptr);
      *param = saved - kStep;
      const double loss_minus =
          toy_loss_and_grad(model, mixture, targets, LossConfig{}, nullptr);
      *param = saved;
      const double numeric = (loss_plus - loss_minus) / (2.0 * kStep);
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-5});
      record.max_rel_error = std::max(record.max_rel_error, rel);
    }
    report.max_rel_error = std::max(report.max_rel_error, record.max_rel_error);
    report.instances.push_back(record);
  }
  return report;
}

}  // namespace gass
