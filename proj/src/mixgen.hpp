// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef GASS_MIXGEN_HPP_
#define GASS_MIXGEN_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "audio_io.hpp"
#include "common.hpp"

namespace gass {

enum class Task : int { kSpeech = 0, kSoundEvent = 1, kMusic = 2 };
inline constexpr int kNumTasks = 3;
const char* to_string(Task task);
Task task_from_string(const std::string& name);

struct GainRange {
  double lo_db = 0.0;
  double hi_db = 0.0;
};

struct MixConfig {
  std::array<double, kNumTasks> task_probs = {0.25, 0.25, 0.5};
  int k_min = 1;
  int k_max = 4;
  double duration_s = 8.0;
  int32_t sample_rate_hz = 48000;
  // indexed by SourceType
  std::array<GainRange, kNumSourceTypes> gain_ranges_db = {{
      {-10.0, 0.0},   // speech_fg
      {-10.0, 0.0},   // event_fg
      {-20.0, -10.0}, // event_bg
      {-3.0, 0.0},    // music_fg
      {-20.0, -10.0}, // music_bg
  }};
  double beta_alpha = 2.0;
  double beta_beta = 1.0;
  int max_bg_per_type = 1;

  void validate() const;
  // Merges the fields present in a JSON object onto the defaults.
  static MixConfig from_json(const std::string& json_text);
  std::string to_json() const;
};

struct MixComponent {
  std::string record_id;
  SourceType source_type = SourceType::kSpeechFg;
  double gain_db = 0.0;
  double clip_offset_s = 0.0;  // where the fragment starts in the recording
  double mix_onset_s = 0.0;    // where the fragment starts in the mix
};

struct MixtureSpec {
  std::string mix_id;
  Task task = Task::kSpeech;
  int k = 1;
  std::vector<MixComponent> components;
  uint64_t seed = 0;
};

struct StemSet {
  AudioClip mixture;
  std::array<AudioClip, 4> stems;  // stems[spec.k ..) are exact zeros
  MixtureSpec spec;
};

// Beta(2,1) draw mapped linearly onto [lo, hi] dB via the inverse CDF
// x = u^(1/alpha); beta_beta must be 1.
double sample_gain_db(Rng& rng, GainRange range, double beta_alpha = 2.0,
                      double beta_beta = 1.0);

Task sample_task(Rng& rng, const MixConfig& config);

// Task composition rules: slot 1 is forced to the task's foreground type;
// the remaining k-1 slots draw uniformly over the allowed set, capped at
// max_bg_per_type per background type, skipping empty buckets and records
// already used in this mix.
std::vector<MixComponent> sample_components(Rng& rng, Task task, int k,
                                            const SourceCatalog& catalog,
                                            const MixConfig& config);

// task + k + components for one mix; mix_id/seed filled by the caller.
MixtureSpec sample_spec(Rng& rng, const SourceCatalog& catalog,
                        const MixConfig& config);

// Per component: read, down-mix, resample, cut/pad to the mix duration at the
// stored offsets, peak-normalize, apply the gain. Stems are quantized to the
// float32 grid and the mixture is their left-to-right sum, so the sum
// identity survives a float32 round trip bit-exactly.
StemSet render_mixture(const MixtureSpec& spec, const SourceCatalog& catalog,
                       const MixConfig& config);

struct DatasetReport {
  int64_t num_mixes = 0;
  std::array<int64_t, kNumTasks> task_counts{};
  std::array<int64_t, 4> k_counts{};
  std::string out_dir;
  std::string to_json() const;
};

// Writes <out_dir>/mix_%06d/{mixture.wav, stem1..4.wav, meta.json}. Mix i is
// seeded with derive_seed(seed, i), so output is byte-identical for any
// worker count.
DatasetReport generate_dataset(const SourceCatalog& catalog,
                               const MixConfig& config, int64_t num_mixes,
                               uint64_t seed, const std::string& out_dir,
                               int workers);

std::string mix_dir_name(int64_t index);

}  // namespace gass

#endif  // GASS_MIXGEN_HPP_
