// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "dataset_io.hpp"
#include "dsp.hpp"

namespace gass {

namespace {

double sum_squares(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

bool all_zero(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
}

// 4-decimal report precision for dB fields
double round4(double x) { return std::round(x * 1e4) / 1e4; }

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

const char* to_string(CountClass c) {
  switch (c) {
    case CountClass::kUnder: return "US";
    case CountClass::kEqual: return "ES";
    case CountClass::kOver: return "OS";
  }
  return "?";
}

double si_sdr(std::span<const double> reference,
              std::span<const double> estimate) {
  if (reference.size() != estimate.size())
    raise(ErrorKind::kInvalidArgument, "si_sdr: length mismatch");
  if (all_zero(reference))
    raise(ErrorKind::kInvalidArgument, "si_sdr: silent reference");
  // The estimate is brought to unit energy first. The projection ratio is
  // scale-free, but the epsilon guards below are not; canonicalizing the
  // scale keeps si_sdr(s, c*e) == si_sdr(s, e) exactly while the guards
  // still bound perfect reconstruction to a large finite value.
  const double estimate_energy = sum_squares(estimate);
  const double scale =
      estimate_energy > 0.0 ? 1.0 / std::sqrt(estimate_energy) : 1.0;
  const double alpha =
      scale * dot(estimate, reference) / (sum_squares(reference) + kEps);
  double target_energy = 0.0;
  double residual_energy = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    const double t = alpha * reference[i];
    const double r = scale * estimate[i] - t;
    target_energy += t * t;
    residual_energy += r * r;
  }
  return 10.0 * std::log10((target_energy + kEps) / (residual_energy + kEps));
}

std::array<int, 4> align_for_eval(
    const std::array<std::span<const double>, 4>& targets,
    const std::array<std::span<const double>, 4>& estimates) {
  bool active[4];
  for (int t = 0; t < 4; ++t)
    active[t] = mean_energy_db(targets[t]) > kActiveFloorDb;

  double score[4][4];
  for (int e = 0; e < 4; ++e)
    for (int t = 0; t < 4; ++t)
      score[e][t] = active[t] ? si_sdr(targets[t], estimates[e]) : 0.0;

  std::array<int, 4> perm;
  std::iota(perm.begin(), perm.end(), 0);
  std::array<int, 4> best = perm;
  double best_score = -std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int e = 0; e < 4; ++e) total += score[e][perm[e]];
    if (total > best_score) {
      best_score = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double si_sdr_single_source(std::span<const double> mixture,
                            std::span<const double> estimate) {
  return si_sdr(mixture, estimate);
}

double si_sdr_improvement(std::span<const double> target,
                          std::span<const double> estimate,
                          std::span<const double> mixture) {
  return si_sdr(target, estimate) - si_sdr(target, mixture);
}

CountClass source_count_class(
    const std::array<std::span<const double>, 4>& targets,
    const std::array<std::span<const double>, 4>& estimates) {
  int active = 0;
  double softest_db = std::numeric_limits<double>::infinity();
  for (const auto& target : targets) {
    const double energy = mean_energy_db(target);
    if (energy > kActiveFloorDb) {
      ++active;
      softest_db = std::min(softest_db, energy);
    }
  }
  if (active == 0)
    raise(ErrorKind::kInvalidArgument,
          "source_count_class: no active targets");

  const double threshold_db = softest_db - 20.0;
  int nonzero = 0;
  for (const auto& estimate : estimates)
    if (mean_energy_db(estimate) > threshold_db) ++nonzero;

  if (nonzero < active) return CountClass::kUnder;
  if (nonzero > active) return CountClass::kOver;
  return CountClass::kEqual;
}

double chunked_median_sdr(std::span<const double> reference,
                          std::span<const double> estimate,
                          int32_t sample_rate_hz, double chunk_s) {
  if (reference.size() != estimate.size())
    raise(ErrorKind::kInvalidArgument, "chunked_median_sdr: length mismatch");
  const int64_t chunk_len = std::llround(chunk_s * sample_rate_hz);
  if (chunk_len <= 0)
    raise(ErrorKind::kInvalidArgument, "chunked_median_sdr: bad chunk length");
  const int64_t chunks = static_cast<int64_t>(reference.size()) / chunk_len;
  if (chunks == 0)
    raise(ErrorKind::kInvalidArgument,
          "chunked_median_sdr: track shorter than one chunk");

  std::vector<double> sdrs;
  for (int64_t c = 0; c < chunks; ++c) {
    const auto ref = reference.subspan(c * chunk_len, chunk_len);
    const auto est = estimate.subspan(c * chunk_len, chunk_len);
    if (mean_energy_db(ref) <= kActiveFloorDb) continue;
    double num = 0.0, den = 0.0;
    for (int64_t i = 0; i < chunk_len; ++i) {
      num += ref[i] * ref[i];
      const double d = ref[i] - est[i];
      den += d * d;
    }
    sdrs.push_back(10.0 * std::log10((num + kEps) / (den + kEps)));
  }
  if (sdrs.empty())
    raise(ErrorKind::kInvalidArgument,
          "chunked_median_sdr: all chunks have a silent reference");
  return median(std::move(sdrs));
}

PerMixRecord evaluate_at_native_rate(const EvalItem& item,
                                     const MetricsRequest& request) {
  const int32_t rate =
      item.native_rate_hz > 0 ? item.native_rate_hz : item.mixture.sample_rate_hz;
  if (item.mixture.sample_rate_hz != rate)
    raise(ErrorKind::kDataError,
          item.mix_id + ": reference rate " +
              std::to_string(item.mixture.sample_rate_hz) +
              " != native rate " + std::to_string(rate));
  const int64_t len = item.mixture.length();
  for (const AudioClip& target : item.targets)
    if (target.sample_rate_hz != rate || target.length() != len)
      raise(ErrorKind::kDataError, item.mix_id + ": target shape mismatch");

  // Estimates from a separator running at another rate come back to the
  // native rate before any metric; off-by-one lengths after resampling are
  // trimmed or zero-padded.
  std::array<AudioClip, 4> estimates;
  for (int e = 0; e < 4; ++e) {
    estimates[e] = item.estimates[e].sample_rate_hz == rate
                       ? item.estimates[e]
                       : resample(item.estimates[e], rate);
    estimates[e].samples.resize(static_cast<size_t>(len), 0.0);
  }

  std::array<std::span<const double>, 4> target_spans, estimate_spans;
  for (int i = 0; i < 4; ++i) {
    target_spans[i] = item.targets[i].samples;
    estimate_spans[i] = estimates[i].samples;
  }

  PerMixRecord record;
  record.mix_id = item.mix_id;
  bool active[4];
  for (int t = 0; t < 4; ++t) {
    active[t] = mean_energy_db(target_spans[t]) > kActiveFloorDb;
    if (active[t]) ++record.active_targets;
  }
  if (record.active_targets == 0)
    raise(ErrorKind::kDataError, item.mix_id + ": no active targets");

  record.alignment = align_for_eval(target_spans, estimate_spans);
  std::array<int, 4> estimate_for_target{};  // inverse alignment
  for (int e = 0; e < 4; ++e) estimate_for_target[record.alignment[e]] = e;

  if (request.sisdr) {
    for (int t = 0; t < 4; ++t) {
      if (!active[t]) continue;
      const auto est = estimate_spans[estimate_for_target[t]];
      record.per_source_si_sdr.emplace_back(t, si_sdr(target_spans[t], est));
      if (record.active_targets > 1)
        record.si_sdri_pairs.push_back(
            si_sdr_improvement(target_spans[t], est, item.mixture.samples));
    }
    if (record.active_targets == 1) {
      int slot = 0;
      while (!active[slot]) ++slot;
      record.si_sdrs = si_sdr_single_source(
          item.mixture.samples, estimate_spans[estimate_for_target[slot]]);
    } else if (!record.si_sdri_pairs.empty()) {
      record.si_sdri =
          std::accumulate(record.si_sdri_pairs.begin(),
                          record.si_sdri_pairs.end(), 0.0) /
          record.si_sdri_pairs.size();
    }
  }

  if (request.counting)
    record.count_class = source_count_class(target_spans, estimate_spans);

  if (request.chunked_sdr) {
    for (int t = 0; t < 4; ++t) {
      if (!active[t]) continue;
      record.track_sdr.emplace_back(
          t, chunked_median_sdr(target_spans[t],
                                estimate_spans[estimate_for_target[t]], rate));
    }
  }
  return record;
}

MetricsReport aggregate_report(std::vector<PerMixRecord> records) {
  if (records.empty())
    raise(ErrorKind::kInvalidArgument, "aggregate_report: no records");

  MetricsReport report;
  report.aggregates.num_mixes = static_cast<int64_t>(records.size());

  double sdrs_sum = 0.0;
  int64_t sdrs_count = 0;
  double sdri_sum = 0.0;
  int64_t sdri_pairs = 0;
  int64_t us = 0, es = 0, os = 0, counted = 0;
  std::array<std::vector<double>, 4> track;

  for (const PerMixRecord& record : records) {
    if (record.si_sdrs) {
      sdrs_sum += *record.si_sdrs;
      ++sdrs_count;
    }
    for (double v : record.si_sdri_pairs) {
      sdri_sum += v;
      ++sdri_pairs;
    }
    if (record.count_class) {
      ++counted;
      switch (*record.count_class) {
        case CountClass::kUnder: ++us; break;
        case CountClass::kEqual: ++es; break;
        case CountClass::kOver: ++os; break;
      }
    }
    for (const auto& [slot, value] : record.track_sdr)
      track[slot].push_back(value);
  }

  if (sdrs_count > 0) report.aggregates.si_sdrs_mean = sdrs_sum / sdrs_count;
  if (sdri_pairs > 0) report.aggregates.si_sdri_mean = sdri_sum / sdri_pairs;
  if (counted > 0) {
    report.aggregates.us_pct = 100.0 * us / counted;
    report.aggregates.es_pct = 100.0 * es / counted;
    report.aggregates.os_pct = 100.0 * os / counted;
  }
  for (int slot = 0; slot < 4; ++slot)
    if (!track[slot].empty())
      report.aggregates.track_sdr_median[slot] = median(std::move(track[slot]));

  report.per_mix = std::move(records);
  return report;
}

std::string record_to_json(const PerMixRecord& record) {
  nlohmann::json j;
  j["mix_id"] = record.mix_id;
  j["active_targets"] = record.active_targets;
  j["alignment"] = record.alignment;
  for (const auto& [slot, value] : record.per_source_si_sdr)
    j["per_source_si_sdr"][std::to_string(slot + 1)] = round4(value);
  if (record.si_sdrs) j["si_sdrs"] = round4(*record.si_sdrs);
  if (record.si_sdri) j["si_sdri"] = round4(*record.si_sdri);
  if (record.count_class) j["count_class"] = to_string(*record.count_class);
  for (const auto& [slot, value] : record.track_sdr)
    j["track_sdr"][std::to_string(slot + 1)] = round4(value);
  return j.dump();
}

std::string aggregates_to_json(const MetricsAggregates& aggregates) {
  nlohmann::json j;
  j["aggregate"] = true;
  j["mixes"] = aggregates.num_mixes;
  if (aggregates.si_sdrs_mean) j["si_sdrs_mean"] = round4(*aggregates.si_sdrs_mean);
  if (aggregates.si_sdri_mean) {
    j["si_sdri_mean"] = round4(*aggregates.si_sdri_mean);
    j["si_sdri_avg_over"] = "active_pairs";
  }
  if (aggregates.us_pct) {
    j["us_pct"] = round4(*aggregates.us_pct);
    j["es_pct"] = round4(*aggregates.es_pct);
    j["os_pct"] = round4(*aggregates.os_pct);
  }
  for (int slot = 0; slot < 4; ++slot)
    if (aggregates.track_sdr_median[slot])
      j["track_sdr_median"][std::to_string(slot + 1)] =
          round4(*aggregates.track_sdr_median[slot]);
  j["toolkit_version"] = kVersion;
  return j.dump();
}

MetricsReport run_evaluation(const std::string& ref_root,
                             const std::string& est_root,
                             int32_t native_rate_hz,
                             const MetricsRequest& request,
                             const std::string& report_path, int workers) {
  const std::vector<std::string> mixes = list_mix_dirs(ref_root);
  if (mixes.empty())
    raise(ErrorKind::kDataError, ref_root + ": no mix directories found");

  std::vector<PerMixRecord> records(mixes.size());
  std::atomic<size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto work = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= mixes.size()) break;
      try {
        const StemSet set =
            read_stem_set(std::filesystem::path(ref_root) / mixes[i]);
        EvalItem item;
        item.mix_id = mixes[i];
        item.mixture = set.mixture;
        item.targets = set.stems;
        item.estimates =
            read_estimates(std::filesystem::path(est_root) / mixes[i]);
        item.native_rate_hz = native_rate_hz;
        records[i] = evaluate_at_native_rate(item, request);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(mixes.size());
        break;
      }
    }
  };

  workers = std::max(1, workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(work);
    for (std::thread& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  MetricsReport report = aggregate_report(std::move(records));
  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::trunc);
    if (!out)
      raise(ErrorKind::kDataError, report_path + ": cannot write report");
    for (const PerMixRecord& record : report.per_mix)
      out << record_to_json(record) << "\n";
    out << aggregates_to_json(report.aggregates) << "\n";
  }
  return report;
}

}  // namespace gass
