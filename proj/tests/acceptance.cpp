// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the binary exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "common.hpp"
#include "dataset_io.hpp"
#include "dsp.hpp"
#include "fixture_corpus.hpp"
#include "metrics.hpp"
#include "mixgen.hpp"
#include "oracle_irm.hpp"
#include "pit_loss.hpp"
#include "test_oracles.hpp"
#include "toy_separator.hpp"

using namespace gass;
namespace fs = std::filesystem;

namespace {

int hw_workers() {
  return static_cast<int>(
      std::min(4u, std::max(1u, std::thread::hardware_concurrency())));
}

std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1fs", s);
  return buf;
}

uint64_t hash_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  uint64_t h = 1469598103934665603ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::map<std::string, uint64_t> hash_tree(const fs::path& root) {
  std::map<std::string, uint64_t> hashes;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file())
      hashes[fs::relative(entry.path(), root).string()] =
          hash_file(entry.path());
  return hashes;
}

struct Context {
  std::string root;
  std::string manifest;
  std::string dataset_dir;   // 200-mix default-config set
  std::string estimate_dir;  // IRM estimates for it
  MetricsAggregates irm_aggregates;
  double pipeline_seconds = 0.0;
};

// ---- criterion bodies; return "" on pass ---------------------------------

std::string criterion_1_irm_counting(Context& ctx) {
  const auto start = std::chrono::steady_clock::now();

  const SourceCatalog catalog = SourceCatalog::load_manifest(ctx.manifest);
  const MixConfig config;  // paper defaults: 8 s at 48 kHz
  ctx.dataset_dir = ctx.root + "/upstream_200";
  ctx.estimate_dir = ctx.root + "/irm_200";
  generate_dataset(catalog, config, 200, 20260809, ctx.dataset_dir,
                   hw_workers());
  run_oracle_irm(ctx.dataset_dir, ctx.estimate_dir, nullptr, hw_workers());
  const MetricsReport report =
      run_evaluation(ctx.dataset_dir, ctx.estimate_dir, 0, MetricsRequest{},
                     ctx.root + "/irm_report.jsonl", hw_workers());
  ctx.irm_aggregates = report.aggregates;

  ctx.pipeline_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  const double us = ctx.irm_aggregates.us_pct.value_or(-1);
  const double es = ctx.irm_aggregates.es_pct.value_or(-1);
  const double os = ctx.irm_aggregates.os_pct.value_or(-1);
  if (us != 0.0 || es != 100.0 || os != 0.0) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "US/ES/OS = %.2f/%.2f/%.2f, want 0/100/0",
                  us, es, os);
    return buf;
  }
  if (ctx.pipeline_seconds > 120.0)
    return "pipeline took " + format_seconds(ctx.pipeline_seconds) +
           ", budget is 120s";
  return "";
}

std::string criterion_2_irm_quality(Context& ctx) {
  if (!ctx.irm_aggregates.si_sdri_mean || !ctx.irm_aggregates.si_sdrs_mean)
    return "criterion 1 did not produce SI-SDR aggregates";
  const double sdri = *ctx.irm_aggregates.si_sdri_mean;
  const double sdrs = *ctx.irm_aggregates.si_sdrs_mean;
  if (sdri < 10.0)
    return "mean SI-SDRi " + std::to_string(sdri) + " dB < 10 dB";
  if (sdrs < 40.0)
    return "mean SI-SDRs " + std::to_string(sdrs) + " dB < 40 dB";
  return "";
}

std::string criterion_3_pit_oracle(Context&) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(333);
  for (int trial = 0; trial < 1000; ++trial) {
    const int64_t n = 16 + rng.uniform_int(48);
    const int active = 1 + static_cast<int>(rng.uniform_int(4));
    std::array<std::vector<double>, 4> target_data, estimate_data;
    std::array<std::span<const double>, 4> targets, estimates;
    std::vector<double> mixture(n, 0.0);
    for (int k = 0; k < 4; ++k) {
      target_data[k].assign(n, 0.0);
      estimate_data[k].assign(n, 0.0);
      if (k < active)
        for (auto& v : target_data[k]) v = rng.uniform(-1.0, 1.0);
      for (auto& v : estimate_data[k]) v = rng.uniform(-1.0, 1.0);
      for (int64_t i = 0; i < n; ++i) mixture[i] += target_data[k][i];
      targets[k] = target_data[k];
      estimates[k] = estimate_data[k];
    }
    const PitResult fast = pit_loss(targets, estimates, mixture);
    const testing::OracleAssignment oracle =
        testing::oracle_best_assignment(targets, estimates, mixture, -30.0);
    if (fast.permutation != oracle.permutation)
      return "assignment mismatch on instance " + std::to_string(trial);
    if (std::abs(fast.loss - oracle.loss) > 1e-12)
      return "loss mismatch " + std::to_string(fast.loss - oracle.loss);
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (elapsed > 10.0)
    return "took " + format_seconds(elapsed) + ", budget is 10s";
  return "";
}

std::string criterion_4_loss_spot_values(Context&) {
  const int64_t n = 1000;
  const std::vector<double> unit(n, 1.0 / std::sqrt(static_cast<double>(n)));
  const std::vector<double> zeros(n, 0.0);
  const LossConfig config;  // tau -30 dB

  const double a = log_mse_single(unit, unit, unit, config);
  const double b = log_mse_single(zeros, zeros, unit, config);
  const double c = log_mse_single(zeros, unit, unit, config);
  const double expected_c = 10.0 * std::log10(1.0 + 1e-3);
  if (std::abs(a - (-30.0)) > 1e-4)
    return "active perfect pair: " + std::to_string(a) + ", want -30";
  if (std::abs(b - (-30.0)) > 1e-4)
    return "zero/zero pair: " + std::to_string(b) + ", want -30";
  if (std::abs(c - expected_c) > 1e-4 || std::abs(c - 0.00434) > 1e-4)
    return "zero target, mix estimate: " + std::to_string(c) +
           ", want +0.00434";
  return "";
}

std::string criterion_5_si_sdr_properties(Context&) {
  Rng rng(555);
  for (int trial = 0; trial < 1000; ++trial) {
    const int64_t n = 64 + rng.uniform_int(128);
    std::vector<double> ref(n), est(n);
    for (auto& v : ref) v = rng.uniform(-1.0, 1.0);
    for (auto& v : est) v = rng.uniform(-1.0, 1.0);
    const double base = si_sdr(ref, est);
    const double c = rng.uniform(0.05, 20.0) * (trial % 2 ? -1.0 : 1.0);
    std::vector<double> scaled = est;
    for (auto& v : scaled) v *= c;
    if (std::abs(si_sdr(ref, scaled) - base) > 1e-9)
      return "scale invariance violated on trial " + std::to_string(trial);
  }

  for (int trial = 0; trial < 200; ++trial) {
    const int64_t n = 256;
    const int active = 1 + static_cast<int>(rng.uniform_int(4));
    std::vector<std::vector<double>> targets(4, std::vector<double>(n, 0.0));
    std::vector<double> mixture(n, 0.0);
    for (int k = 0; k < active; ++k) {
      for (auto& v : targets[k]) v = rng.uniform(-1.0, 1.0);
      for (int64_t i = 0; i < n; ++i) mixture[i] += targets[k][i];
    }
    for (int k = 0; k < active; ++k) {
      const double improvement =
          si_sdr_improvement(targets[k], mixture, mixture);
      if (std::abs(improvement) > 1e-9)
        return "mixture self-improvement " + std::to_string(improvement) +
               " != 0";
    }
  }
  return "";
}

std::string criterion_6_mixing_identities(Context& ctx) {
  const auto start = std::chrono::steady_clock::now();
  const SourceCatalog catalog = SourceCatalog::load_manifest(ctx.manifest);
  const MixConfig config;

  std::array<int64_t, kNumTasks> task_counts{};
  std::array<int64_t, 4> k_counts{};
  std::vector<double> gain_normalized;
  for (int64_t i = 0; i < 10000; ++i) {
    Rng rng(derive_seed(606, static_cast<uint64_t>(i)));
    const MixtureSpec spec = sample_spec(rng, catalog, config);
    ++task_counts[static_cast<int>(spec.task)];
    ++k_counts[spec.k - 1];
    for (const MixComponent& comp : spec.components) {
      const GainRange range =
          config.gain_ranges_db[static_cast<int>(comp.source_type)];
      if (comp.gain_db < range.lo_db || comp.gain_db > range.hi_db)
        return "gain " + std::to_string(comp.gain_db) + " outside range for " +
               to_string(comp.source_type);
      if (range.hi_db > range.lo_db)
        gain_normalized.push_back((comp.gain_db - range.lo_db) /
                                  (range.hi_db - range.lo_db));
    }
  }

  const double expected[3] = {0.25, 0.25, 0.5};
  for (int t = 0; t < kNumTasks; ++t) {
    const double freq = task_counts[t] / 10000.0;
    if (std::abs(freq - expected[t]) > 0.02)
      return std::string("task frequency of ") +
             to_string(static_cast<Task>(t)) + " is " + std::to_string(freq);
  }
  for (int k = 0; k < 4; ++k) {
    const double freq = k_counts[k] / 10000.0;
    if (std::abs(freq - 0.25) > 0.02)
      return "K=" + std::to_string(k + 1) + " frequency is " +
             std::to_string(freq);
  }
  const double ks = testing::ks_statistic(std::move(gain_normalized),
                                          [](double x) { return x * x; });
  if (ks > 0.02) return "gain KS statistic " + std::to_string(ks) + " > 0.02";

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (elapsed > 60.0)
    return "spec sampling took " + format_seconds(elapsed) + ", budget 60s";

  // Bit-exact sum identity, checked on the rendered 200-mix set.
  const std::vector<std::string> mixes = list_mix_dirs(ctx.dataset_dir);
  if (mixes.empty()) return "no rendered mixes available from criterion 1";
  for (const std::string& mix : mixes) {
    const StemSet set = read_stem_set(fs::path(ctx.dataset_dir) / mix);
    for (int64_t i = 0; i < set.mixture.length(); ++i) {
      const double sum = static_cast<double>(static_cast<float>(
          set.stems[0].samples[i] + set.stems[1].samples[i] +
          set.stems[2].samples[i] + set.stems[3].samples[i]));
      if (set.mixture.samples[i] != sum)
        return mix + ": mixture differs from the stem sum at sample " +
               std::to_string(i);
    }
  }
  return "";
}

std::string criterion_7_determinism(Context& ctx) {
  const SourceCatalog catalog = SourceCatalog::load_manifest(ctx.manifest);
  const MixConfig config;
  const std::string dir_w1 = ctx.root + "/det_w1";
  const std::string dir_w8 = ctx.root + "/det_w8";
  generate_dataset(catalog, config, 8, 777, dir_w1, 1);
  generate_dataset(catalog, config, 8, 777, dir_w8, 8);
  const auto h1 = hash_tree(dir_w1);
  const auto h8 = hash_tree(dir_w8);
  if (h1.size() != h8.size())
    return "tree sizes differ: " + std::to_string(h1.size()) + " vs " +
           std::to_string(h8.size());
  for (const auto& [name, hash] : h1) {
    const auto it = h8.find(name);
    if (it == h8.end()) return name + " missing from the workers=8 tree";
    if (it->second != hash) return name + " differs between worker counts";
  }
  fs::remove_all(dir_w1);
  fs::remove_all(dir_w8);
  return "";
}

std::string criterion_8_dsp(Context&) {
  // STFT round trip
  Rng rng(888);
  AudioClip x;
  x.sample_rate_hz = 48000;
  x.samples.resize(48000);
  for (auto& v : x.samples) v = rng.uniform(-1.0, 1.0);
  const AudioClip back = istft(stft(x, StftConfig{}));
  double max_err = 0.0;
  for (int64_t i = 0; i < x.length(); ++i)
    max_err = std::max(max_err, std::abs(x.samples[i] - back.samples[i]));
  if (max_err > 1e-6)
    return "stft round trip error " + std::to_string(max_err) + " > 1e-6";

  // resample round trip SNR on a 1 kHz tone
  AudioClip tone;
  tone.sample_rate_hz = 16000;
  tone.samples.resize(16000);
  for (int64_t i = 0; i < tone.length(); ++i)
    tone.samples[i] = 0.8 * std::sin(2.0 * 3.14159265358979323846 * 1000.0 *
                                     static_cast<double>(i) / 16000.0);
  const AudioClip round = resample(resample(tone, 48000), 16000);
  double sig = 0.0, err = 0.0;
  for (int64_t i = 400; i < tone.length() - 400; ++i) {
    sig += tone.samples[i] * tone.samples[i];
    const double d = tone.samples[i] - round.samples[i];
    err += d * d;
  }
  const double snr = 10.0 * std::log10(sig / (err + 1e-30));
  if (snr < 60.0)
    return "16->48->16 kHz SNR " + std::to_string(snr) + " dB < 60 dB";
  return "";
}

std::string criterion_9_grad_check(Context&) {
  const auto start = std::chrono::steady_clock::now();
  const GradCheckReport report = grad_check(909, 10, 50);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (!report.passed())
    return "max relative error " + std::to_string(report.max_rel_error) +
           " > 1e-4";
  if (elapsed > 30.0)
    return "took " + format_seconds(elapsed) + ", budget is 30s";
  return "";
}

std::string criterion_10_toy_training(Context& ctx) {
  const SourceCatalog catalog = SourceCatalog::load_manifest(ctx.manifest);
  MixConfig mix_config;
  mix_config.sample_rate_hz = 8000;
  mix_config.duration_s = 0.5;
  const std::string data_dir = ctx.root + "/toy_32";
  generate_dataset(catalog, mix_config, 32, 1010, data_dir, hw_workers());

  TrainConfig train_config;
  train_config.steps = 2000;
  train_config.seed = 4242;
  const TrainResult result =
      train_toy(ToyModel::create(8000), data_dir, train_config);

  const auto& curve = result.loss_curve;
  const int window = 100;
  const double initial =
      std::accumulate(curve.begin(), curve.begin() + window, 0.0) / window;
  const double final_loss =
      std::accumulate(curve.end() - window, curve.end(), 0.0) / window;
  if (initial - final_loss < 3.0)
    return "smoothed loss dropped " + std::to_string(initial - final_loss) +
           " dB, want >= 3 dB (start " + std::to_string(initial) + ", end " +
           std::to_string(final_loss) + ")";

  // Oracle dominance on the same mixes: toy SI-SDRi must not beat the IRM.
  const std::vector<std::string> mixes = list_mix_dirs(data_dir);
  std::vector<PerMixRecord> toy_records, irm_records;
  const MetricsRequest request{true, false, false};
  for (const std::string& mix : mixes) {
    const StemSet set = read_stem_set(fs::path(data_dir) / mix);
    EvalItem item;
    item.mix_id = mix;
    item.mixture = set.mixture;
    item.targets = set.stems;
    item.native_rate_hz = 8000;

    item.estimates = toy_forward(result.model, set.mixture);
    toy_records.push_back(evaluate_at_native_rate(item, request));

    item.estimates = irm_separate(
        set.mixture, set.stems, StftConfig::for_rate(8000));
    irm_records.push_back(evaluate_at_native_rate(item, request));
  }
  const MetricsReport toy_report = aggregate_report(std::move(toy_records));
  const MetricsReport irm_report = aggregate_report(std::move(irm_records));
  if (!toy_report.aggregates.si_sdri_mean || !irm_report.aggregates.si_sdri_mean)
    return "no multi-source mixes in the toy set";
  const double toy_sdri = *toy_report.aggregates.si_sdri_mean;
  const double irm_sdri = *irm_report.aggregates.si_sdri_mean;
  if (toy_sdri > irm_sdri)
    return "toy SI-SDRi " + std::to_string(toy_sdri) +
           " exceeds the IRM bound " + std::to_string(irm_sdri);
  return "";
}

}  // namespace

int main() {
  Context ctx;
  ctx.root = testing::make_temp_dir("acceptance");
  ctx.manifest = testing::make_fixture_corpus(ctx.root + "/corpus");

  struct Criterion {
    int id;
    const char* name;
    std::function<std::string(Context&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "IRM oracle counting 0/100/0 over 200 default-config mixes",
       criterion_1_irm_counting},
      {2, "IRM oracle quality: mean SI-SDRi >= 10 dB, mean SI-SDRs >= 40 dB",
       criterion_2_irm_quality},
      {3, "PIT equals brute-force enumeration on 1000 instances",
       criterion_3_pit_oracle},
      {4, "log-MSE spot values -30 / -30 / +0.00434 dB",
       criterion_4_loss_spot_values},
      {5, "SI-SDR scale invariance and zero self-improvement",
       criterion_5_si_sdr_properties},
      {6, "mixing identities over 10000 specs + bit-exact stem sums",
       criterion_6_mixing_identities},
      {7, "byte-identical datasets for workers 1 vs 8",
       criterion_7_determinism},
      {8, "STFT round trip <= 1e-6 and 60 dB resample round trip",
       criterion_8_dsp},
      {9, "analytic gradients within 1e-4 of finite differences",
       criterion_9_grad_check},
      {10, "toy training drops >= 3 dB and stays under the IRM bound",
       criterion_10_toy_training},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string failure;
    try {
      failure = criterion.run(ctx);
    } catch (const std::exception& e) {
      failure = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (failure.empty()) {
      std::printf("[PASS] criterion %2d: %s (%s)\n", criterion.id,
                  criterion.name, format_seconds(elapsed).c_str());
    } else {
      ++failures;
      std::printf("[FAIL] criterion %2d: %s (%s): %s\n", criterion.id,
                  criterion.name, format_seconds(elapsed).c_str(),
                  failure.c_str());
    }
    std::fflush(stdout);
  }

  std::error_code ec;
  fs::remove_all(ctx.root, ec);

  if (failures == 0) {
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
    return 0;
  }
  std::printf("%d acceptance criteria failed\n", failures);
  return 1;
}
