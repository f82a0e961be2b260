// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef GASS_TOY_SEPARATOR_HPP_
#define GASS_TOY_SEPARATOR_HPP_

#include <array>
#include <string>
#include <vector>

#include "dsp.hpp"
#include "mixgen.hpp"
#include "pit_loss.hpp"

namespace gass {

// Per-frame linear mask predictor: log-magnitude features (B bins) map to
// 4*B mask logits followed by a logistic. Small enough that every gradient
// is hand-derived and checkable by finite differences.
struct ToyModel {
  int32_t sample_rate_hz = 8000;
  StftConfig stft_config;
  int bins = 0;
  std::vector<double> weights;  // row-major B x 4B
  std::vector<double> bias;     // 4B

  int64_t num_params() const {
    return static_cast<int64_t>(weights.size() + bias.size());
  }

  static ToyModel create(int32_t sample_rate_hz);
  static ToyModel create(int32_t sample_rate_hz, const StftConfig& config);

  // model.bin: magic "GASSTOY1", then int32 sample_rate/frame_len/hop/bins,
  // then weights and bias as little-endian float64.
  void save(const std::string& path) const;
  static ToyModel load(const std::string& path);
};

std::array<AudioClip, 4> toy_forward(const ToyModel& model,
                                     const AudioClip& mixture);

struct ToyGradient {
  std::vector<double> weights;
  std::vector<double> bias;
  void accumulate(const ToyGradient& other, double scale);
};

// PIT loss under the best permutation (treated as fixed, the standard
// subgradient) and its analytic gradient. Pass gradient == nullptr to get
// the loss alone.
double toy_loss_and_grad(const ToyModel& model, const AudioClip& mixture,
                         const std::array<AudioClip, 4>& targets,
                         const LossConfig& config, ToyGradient* gradient);

struct TrainConfig {
  double learning_rate = 1e-3;
  int64_t steps = 1;
  int batch_size = 4;
  uint64_t seed = 0;
  double tau_db = -30.0;
  double momentum = 0.9;

  static TrainConfig from_json(const std::string& json_text);
};

struct TrainResult {
  ToyModel model;
  std::vector<double> loss_curve;  // one entry per step
};

// Deterministic gradient descent with momentum over a mixgen dataset at the
// model's rate.
TrainResult train_toy(ToyModel model, const std::string& dataset_dir,
                      const TrainConfig& config);

struct GradCheckInstance {
  int k = 0;
  double loss = 0.0;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckInstance> instances;
  double max_rel_error = 0.0;
  double tolerance = 1e-4;
  bool passed() const { return max_rel_error <= tolerance; }
  std::string to_json() const;
};

// Compares analytic gradients against central finite differences (step 1e-4)
// on coords_per_instance randomly chosen parameters of random toy problems
// (0.25 s at 8 kHz).
GradCheckReport grad_check(uint64_t seed, int instances = 10,
                           int coords_per_instance = 50);

}  // namespace gass

#endif  // GASS_TOY_SEPARATOR_HPP_
