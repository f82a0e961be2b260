// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef GASS_PIT_LOSS_HPP_
#define GASS_PIT_LOSS_HPP_

#include <array>
#include <span>

#include "common.hpp"

namespace gass {

inline constexpr int kNumOutputs = 4;

struct LossConfig {
  double tau_db = -30.0;
  // tau enters as a power ratio on the energy terms.
  double tau_linear() const;
};

struct PitResult {
  double loss = 0.0;
  // permutation[e] = target index paired with estimate e (a bijection).
  std::array<int, kNumOutputs> permutation{};
  // per_pair_losses[e] = loss of (target permutation[e], estimate e);
  // loss is their arithmetic mean.
  std::array<double, kNumOutputs> per_pair_losses{};
};

bool is_all_zero(std::span<const double> x);

// Thresholded logarithmic MSE for one target/estimate pair:
//   target all-zero: 10*log10(|est|^2 + tau*|mix|^2)
//   otherwise:       10*log10(|target - est|^2 + tau*|target|^2)
double log_mse_single(std::span<const double> target,
                      std::span<const double> estimate,
                      std::span<const double> mixture,
                      const LossConfig& config = {});

// Minimizes the mean pair loss over all 24 estimate-to-target assignments;
// ties go to the lexicographically smallest permutation.
PitResult pit_loss(const std::array<std::span<const double>, kNumOutputs>& targets,
                   const std::array<std::span<const double>, kNumOutputs>& estimates,
                   std::span<const double> mixture,
                   const LossConfig& config = {});

}  // namespace gass

#endif  // GASS_PIT_LOSS_HPP_
