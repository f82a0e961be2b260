// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "oracle_irm.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "dataset_io.hpp"

namespace gass {

IrmMaskSet irm_masks(const std::array<AudioClip, 4>& stems,
                     const StftConfig& config) {
  const int64_t len = stems[0].length();
  for (const AudioClip& stem : stems)
    if (stem.length() != len)
      raise(ErrorKind::kInvalidArgument, "irm_masks: stem length mismatch");

  std::array<Spectrogram, 4> specs;
  for (int k = 0; k < 4; ++k) specs[k] = stft(stems[k], config);

  IrmMaskSet set;
  set.frames = specs[0].frames;
  set.bins = specs[0].bins;
  set.config = config;
  const size_t cells = static_cast<size_t>(set.frames) * set.bins;
  for (int k = 0; k < 4; ++k) set.masks[k].resize(cells);

  for (size_t i = 0; i < cells; ++i) {
    double total = kEps;
    double mag[4];
    for (int k = 0; k < 4; ++k) {
      mag[k] = std::abs(specs[k].data[i]);
      total += mag[k];
    }
    for (int k = 0; k < 4; ++k) set.masks[k][i] = mag[k] / total;
  }
  return set;
}

std::array<AudioClip, 4> irm_separate(const AudioClip& mixture,
                                      const std::array<AudioClip, 4>& stems,
                                      const StftConfig& config) {
  for (const AudioClip& stem : stems)
    if (stem.length() != mixture.length())
      raise(ErrorKind::kInvalidArgument,
            "irm_separate: stem/mixture length mismatch");

  const IrmMaskSet masks = irm_masks(stems, config);
  const Spectrogram mix_spec = stft(mixture, config);

  std::array<AudioClip, 4> estimates;
  Spectrogram masked = mix_spec;
  for (int k = 0; k < 4; ++k) {
    for (size_t i = 0; i < masked.data.size(); ++i)
      masked.data[i] = mix_spec.data[i] * masks.masks[k][i];
    estimates[k] = istft(masked);
  }
  return estimates;
}

int64_t run_oracle_irm(const std::string& mix_root,
                       const std::string& out_root, const StftConfig* config,
                       int workers) {
  const std::vector<std::string> mixes = list_mix_dirs(mix_root);
  if (mixes.empty())
    raise(ErrorKind::kDataError, mix_root + ": no mix directories found");

  std::atomic<size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto work = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= mixes.size()) break;
      try {
        const StemSet set =
            read_stem_set(std::filesystem::path(mix_root) / mixes[i]);
        const StftConfig stft_config =
            config != nullptr ? *config
                              : StftConfig::for_rate(set.mixture.sample_rate_hz);
        const std::array<AudioClip, 4> estimates =
            irm_separate(set.mixture, set.stems, stft_config);
        write_estimates(std::filesystem::path(out_root) / mixes[i], estimates);
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
  return static_cast<int64_t>(mixes.size());
}

}  // namespace gass
