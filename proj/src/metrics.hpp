// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef GASS_METRICS_HPP_
#define GASS_METRICS_HPP_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "audio_io.hpp"
#include "common.hpp"

namespace gass {

// Mean energy above this marks a target as active; the paper's thresholds are
// all relative, this floor distinguishes "silent" from merely quiet audio.
inline constexpr double kActiveFloorDb = -80.0;

// Scale-invariant SDR. Throws kInvalidArgument on an all-zero reference; the
// caller filters silent-target pairs per the discard rule.
double si_sdr(std::span<const double> reference,
              std::span<const double> estimate);

// Estimate-to-target assignment maximizing the summed SI-SDR over active
// pairs (silent targets contribute 0); ties pick the lexicographically
// smallest permutation.
std::array<int, 4> align_for_eval(
    const std::array<std::span<const double>, 4>& targets,
    const std::array<std::span<const double>, 4>& estimates);

// SI-SDRs: the single-source bypass score, SI-SDR(mixture, estimate).
double si_sdr_single_source(std::span<const double> mixture,
                            std::span<const double> estimate);

// SI-SDRi: SI-SDR(target, estimate) - SI-SDR(target, mixture).
double si_sdr_improvement(std::span<const double> target,
                          std::span<const double> estimate,
                          std::span<const double> mixture);

enum class CountClass { kUnder, kEqual, kOver };
const char* to_string(CountClass c);

// Compares the number of energetic estimates against the number of active
// targets. An estimate counts as nonzero when its mean energy is above the
// softest active target minus 20 dB.
CountClass source_count_class(
    const std::array<std::span<const double>, 4>& targets,
    const std::array<std::span<const double>, 4>& estimates);

// Median over the per-chunk energy-ratio SDRs of non-overlapping chunks;
// chunks with a silent reference are skipped.
double chunked_median_sdr(std::span<const double> reference,
                          std::span<const double> estimate,
                          int32_t sample_rate_hz, double chunk_s = 1.0);

struct EvalItem {
  std::string mix_id;
  AudioClip mixture;
  std::array<AudioClip, 4> targets;
  std::array<AudioClip, 4> estimates;
  int32_t native_rate_hz = 0;
};

struct MetricsRequest {
  bool sisdr = true;
  bool counting = true;
  bool chunked_sdr = false;
};

struct PerMixRecord {
  std::string mix_id;
  int active_targets = 0;
  std::array<int, 4> alignment{};  // estimate -> target
  // (target slot, value) for each active pair
  std::vector<std::pair<int, double>> per_source_si_sdr;
  std::optional<double> si_sdrs;   // single-source mixes only
  std::optional<double> si_sdri;   // mean over this mix's active pairs
  std::vector<double> si_sdri_pairs;
  std::optional<CountClass> count_class;
  std::vector<std::pair<int, double>> track_sdr;
};

struct MetricsAggregates {
  int64_t num_mixes = 0;
  std::optional<double> si_sdrs_mean;
  std::optional<double> si_sdri_mean;  // averaged over active pairs
  std::optional<double> us_pct, es_pct, os_pct;
  std::array<std::optional<double>, 4> track_sdr_median;
};

struct MetricsReport {
  std::vector<PerMixRecord> per_mix;
  MetricsAggregates aggregates;
};

// Ground truth stays at the item's native rate; estimates produced at another
// rate (e.g. a 48 kHz separator) are resampled back before any metric.
PerMixRecord evaluate_at_native_rate(const EvalItem& item,
                                     const MetricsRequest& request);

MetricsReport aggregate_report(std::vector<PerMixRecord> records);

// Directory protocol: <ref_root>/<mix>/{mixture,stem1..4}.wav + meta.json and
// <est_root>/<mix>/est1..4.wav. native_rate_hz == 0 means "rate of the
// reference files". Writes one JSON line per mix plus a final aggregate line
// when report_path is non-empty.
MetricsReport run_evaluation(const std::string& ref_root,
                             const std::string& est_root,
                             int32_t native_rate_hz,
                             const MetricsRequest& request,
                             const std::string& report_path, int workers);

std::string record_to_json(const PerMixRecord& record);
std::string aggregates_to_json(const MetricsAggregates& aggregates);

}  // namespace gass

#endif  // GASS_METRICS_HPP_
