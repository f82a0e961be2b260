// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef GASS_ORACLE_IRM_HPP_
#define GASS_ORACLE_IRM_HPP_

#include <array>

#include "dsp.hpp"

namespace gass {

struct IrmMaskSet {
  int64_t frames = 0;
  int bins = 0;
  StftConfig config;
  // Row-major T x B magnitude-ratio masks in [0, 1]; bins with no source
  // energy get all-zero masks.
  std::array<std::vector<double>, 4> masks;
};

// mask_k[t,b] = |S_k[t,b]| / (sum_j |S_j[t,b]| + eps)
IrmMaskSet irm_masks(const std::array<AudioClip, 4>& stems,
                     const StftConfig& config);

// estimate_k = istft(mask_k * stft(mixture)); the mixture phase is kept.
std::array<AudioClip, 4> irm_separate(const AudioClip& mixture,
                                      const std::array<AudioClip, 4>& stems,
                                      const StftConfig& config);

// Oracle-separates every mix of a generated dataset into
// <out_root>/<mix>/est1..4.wav. config == nullptr picks the 32 ms / 8 ms
// pair for each mix's rate. Returns the number of mixes processed.
int64_t run_oracle_irm(const std::string& mix_root,
                       const std::string& out_root, const StftConfig* config,
                       int workers);

}  // namespace gass

#endif  // GASS_ORACLE_IRM_HPP_
