// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "pit_loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gass {

double LossConfig::tau_linear() const { return std::pow(10.0, tau_db / 10.0); }

bool is_all_zero(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
}

namespace {

double sum_squares(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double diff_sum_squares(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

double log_mse_single(std::span<const double> target,
                      std::span<const double> estimate,
                      std::span<const double> mixture,
                      const LossConfig& config) {
  if (target.size() != estimate.size() || target.size() != mixture.size())
    raise(ErrorKind::kInvalidArgument, "log_mse_single: length mismatch");
  const double tau = config.tau_linear();
  // kEps keeps the loss finite when every term vanishes (all-silent input);
  // it floors the degenerate case at -120 dB and is invisible otherwise.
  if (is_all_zero(target))
    return 10.0 * std::log10(sum_squares(estimate) +
                             tau * sum_squares(mixture) + kEps);
  return 10.0 * std::log10(diff_sum_squares(target, estimate) +
                           tau * sum_squares(target) + kEps);
}

PitResult pit_loss(
    const std::array<std::span<const double>, kNumOutputs>& targets,
    const std::array<std::span<const double>, kNumOutputs>& estimates,
    std::span<const double> mixture, const LossConfig& config) {
  double pair[kNumOutputs][kNumOutputs];
  for (int e = 0; e < kNumOutputs; ++e)
    for (int t = 0; t < kNumOutputs; ++t)
      pair[e][t] = log_mse_single(targets[t], estimates[e], mixture, config);

  // N is fixed at 4, so exhaustive enumeration in lexicographic order is
  // exact; strict improvement keeps the smallest permutation on ties.
  std::array<int, kNumOutputs> perm;
  std::iota(perm.begin(), perm.end(), 0);
  PitResult best;
  best.loss = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int e = 0; e < kNumOutputs; ++e) total += pair[e][perm[e]];
    const double mean = total / kNumOutputs;
    if (mean < best.loss) {
      best.loss = mean;
      best.permutation = perm;
      for (int e = 0; e < kNumOutputs; ++e)
        best.per_pair_losses[e] = pair[e][perm[e]];
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace gass
