// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mixgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "dataset_io.hpp"
#include "dsp.hpp"

namespace gass {

const char* to_string(Task task) {
  switch (task) {
    case Task::kSpeech: return "speech";
    case Task::kSoundEvent: return "sound_event";
    case Task::kMusic: return "music";
  }
  return "?";
}

Task task_from_string(const std::string& name) {
  for (int i = 0; i < kNumTasks; ++i)
    if (name == to_string(static_cast<Task>(i))) return static_cast<Task>(i);
  raise(ErrorKind::kDataError, "unknown task \"" + name + "\"");
}

void MixConfig::validate() const {
  double prob_sum = 0.0;
  for (double p : task_probs) {
    if (p < 0.0) raise(ErrorKind::kInvalidArgument, "negative task probability");
    prob_sum += p;
  }
  if (std::abs(prob_sum - 1.0) > 1e-9)
    raise(ErrorKind::kInvalidArgument, "task_probs must sum to 1");
  if (k_min < 1 || k_max > 4 || k_min > k_max)
    raise(ErrorKind::kInvalidArgument, "need 1 <= k_min <= k_max <= 4");
  if (duration_s <= 0.0)
    raise(ErrorKind::kInvalidArgument, "duration_s must be > 0");
  if (sample_rate_hz <= 0)
    raise(ErrorKind::kInvalidArgument, "sample_rate_hz must be > 0");
  for (const GainRange& r : gain_ranges_db)
    if (r.lo_db > r.hi_db)
      raise(ErrorKind::kInvalidArgument, "gain range has low > high");
  if (beta_alpha <= 0.0)
    raise(ErrorKind::kInvalidArgument, "beta alpha must be > 0");
  if (beta_beta != 1.0)
    raise(ErrorKind::kInvalidArgument,
          "only Beta(alpha, 1) gain sampling is supported");
  if (max_bg_per_type < 0)
    raise(ErrorKind::kInvalidArgument, "max_bg_per_type must be >= 0");
}

MixConfig MixConfig::from_json(const std::string& json_text) {
  MixConfig config;
  const nlohmann::json j = nlohmann::json::parse(json_text);
  if (!j.is_object())
    raise(ErrorKind::kDataError, "mix config must be a JSON object");
  if (j.contains("task_probs")) {
    const auto& probs = j.at("task_probs");
    for (int i = 0; i < kNumTasks; ++i) {
      const Task task = static_cast<Task>(i);
      if (probs.contains(to_string(task)))
        config.task_probs[i] = probs.at(to_string(task)).get<double>();
    }
  }
  config.k_min = j.value("k_min", config.k_min);
  config.k_max = j.value("k_max", config.k_max);
  config.duration_s = j.value("duration_s", config.duration_s);
  config.sample_rate_hz = j.value("sample_rate_hz", config.sample_rate_hz);
  if (j.contains("gain_ranges_db")) {
    const auto& ranges = j.at("gain_ranges_db");
    for (SourceType type : kAllSourceTypes) {
      if (!ranges.contains(to_string(type))) continue;
      const auto& pair = ranges.at(to_string(type));
      if (!pair.is_array() || pair.size() != 2)
        raise(ErrorKind::kDataError, "gain range must be [low, high]");
      config.gain_ranges_db[static_cast<int>(type)] = {pair[0].get<double>(),
                                                       pair[1].get<double>()};
    }
  }
  if (j.contains("beta_params")) {
    const auto& beta = j.at("beta_params");
    if (!beta.is_array() || beta.size() != 2)
      raise(ErrorKind::kDataError, "beta_params must be [alpha, beta]");
    config.beta_alpha = beta[0].get<double>();
    config.beta_beta = beta[1].get<double>();
  }
  config.max_bg_per_type = j.value("max_bg_per_type", config.max_bg_per_type);
  config.validate();
  return config;
}

std::string MixConfig::to_json() const {
  nlohmann::json j;
  for (int i = 0; i < kNumTasks; ++i)
    j["task_probs"][to_string(static_cast<Task>(i))] = task_probs[i];
  j["k_min"] = k_min;
  j["k_max"] = k_max;
  j["duration_s"] = duration_s;
  j["sample_rate_hz"] = sample_rate_hz;
  for (SourceType type : kAllSourceTypes) {
    const GainRange& r = gain_ranges_db[static_cast<int>(type)];
    j["gain_ranges_db"][to_string(type)] = {r.lo_db, r.hi_db};
  }
  j["beta_params"] = {beta_alpha, beta_beta};
  j["max_bg_per_type"] = max_bg_per_type;
  return j.dump();
}

double sample_gain_db(Rng& rng, GainRange range, double beta_alpha,
                      double beta_beta) {
  if (range.lo_db > range.hi_db)
    raise(ErrorKind::kInvalidArgument, "gain range has low > high");
  if (beta_beta != 1.0 || beta_alpha <= 0.0)
    raise(ErrorKind::kInvalidArgument, "gain sampling requires Beta(alpha, 1)");
  const double u = rng.uniform();
  const double x = std::pow(u, 1.0 / beta_alpha);  // inverse CDF of Beta(a,1)
  return range.lo_db + x * (range.hi_db - range.lo_db);
}

Task sample_task(Rng& rng, const MixConfig& config) {
  const double u = rng.uniform();
  double cum = 0.0;
  for (int i = 0; i < kNumTasks; ++i) {
    cum += config.task_probs[i];
    if (u < cum) return static_cast<Task>(i);
  }
  return Task::kMusic;
}

namespace {

SourceType forced_type(Task task) {
  switch (task) {
    case Task::kSpeech: return SourceType::kSpeechFg;
    case Task::kSoundEvent: return SourceType::kEventFg;
    case Task::kMusic: return SourceType::kMusicFg;
  }
  return SourceType::kSpeechFg;
}

std::vector<SourceType> allowed_types(Task task) {
  switch (task) {
    case Task::kSpeech:
      return {SourceType::kSpeechFg, SourceType::kEventFg,
              SourceType::kEventBg, SourceType::kMusicBg};
    case Task::kSoundEvent:
      return {SourceType::kEventFg, SourceType::kEventBg,
              SourceType::kMusicBg};
    case Task::kMusic:
      return {SourceType::kMusicFg, SourceType::kEventBg};
  }
  return {};
}

// Records of `type` not yet used in this mix, in bucket order.
std::vector<int> unused_in_bucket(const SourceCatalog& catalog, SourceType type,
                                  const std::set<std::string>& used_ids) {
  std::vector<int> out;
  for (int idx : catalog.bucket(type))
    if (!used_ids.contains(catalog.record(idx).id)) out.push_back(idx);
  return out;
}

MixComponent draw_component(Rng& rng, SourceType type,
                            const SourceCatalog& catalog,
                            const MixConfig& config,
                            const std::set<std::string>& used_ids) {
  const std::vector<int> candidates = unused_in_bucket(catalog, type, used_ids);
  if (candidates.empty())
    raise(ErrorKind::kDataError,
          std::string("catalog bucket empty for required type ") +
              to_string(type));
  const SourceRecord& record =
      catalog.record(candidates[rng.uniform_int(candidates.size())]);

  MixComponent comp;
  comp.record_id = record.id;
  comp.source_type = type;
  comp.gain_db = sample_gain_db(rng, config.gain_ranges_db[static_cast<int>(type)],
                                config.beta_alpha, config.beta_beta);
  if (record.duration_s > config.duration_s)
    comp.clip_offset_s = rng.uniform(0.0, record.duration_s - config.duration_s);
  else
    comp.mix_onset_s = rng.uniform(0.0, config.duration_s - record.duration_s);
  return comp;
}

// New record + offsets for the same slot; the gain is kept.
void redraw_component(Rng& rng, MixComponent& comp,
                      const SourceCatalog& catalog, const MixConfig& config,
                      std::set<std::string>& used_ids) {
  used_ids.erase(comp.record_id);
  std::set<std::string> excluded = used_ids;
  excluded.insert(comp.record_id);  // never retry the silent record itself
  const std::vector<int> candidates =
      unused_in_bucket(catalog, comp.source_type, excluded);
  if (candidates.empty())
    raise(ErrorKind::kSilentSource,
          std::string("no non-silent candidates left for type ") +
              to_string(comp.source_type));
  const SourceRecord& record =
      catalog.record(candidates[rng.uniform_int(candidates.size())]);
  comp.record_id = record.id;
  if (record.duration_s > config.duration_s)
    comp.clip_offset_s = rng.uniform(0.0, record.duration_s - config.duration_s);
  else
    comp.mix_onset_s = rng.uniform(0.0, config.duration_s - record.duration_s);
  used_ids.insert(comp.record_id);
}

// Cut/pad the resampled recording to the mix duration, normalize, apply gain.
// The result is quantized to the float32 grid (see render_mixture contract).
AudioClip render_component(const MixComponent& comp,
                           const SourceCatalog& catalog,
                           const MixConfig& config) {
  const SourceRecord* record = catalog.find(comp.record_id);
  if (record == nullptr)
    raise(ErrorKind::kDataError,
          "record \"" + comp.record_id + "\" not in catalog");

  AudioClip clip = read_wav(record->path);
  clip = resample(clip, config.sample_rate_hz);

  const int64_t mix_len =
      std::llround(config.duration_s * config.sample_rate_hz);
  const int64_t offset =
      std::llround(comp.clip_offset_s * config.sample_rate_hz);
  const int64_t onset = std::llround(comp.mix_onset_s * config.sample_rate_hz);

  AudioClip stem;
  stem.sample_rate_hz = config.sample_rate_hz;
  stem.samples.assign(static_cast<size_t>(mix_len), 0.0);
  for (int64_t i = std::max<int64_t>(onset, 0); i < mix_len; ++i) {
    const int64_t src = offset + i - onset;
    if (src < 0) continue;
    if (src >= clip.length()) break;
    stem.samples[static_cast<size_t>(i)] = clip.samples[static_cast<size_t>(src)];
  }

  stem = peak_normalize(stem);  // throws kSilentSource on silent fragments
  const double gain = std::pow(10.0, comp.gain_db / 20.0);
  for (double& s : stem.samples)
    s = static_cast<double>(static_cast<float>(s * gain));
  return stem;
}

StemSet assemble(const MixtureSpec& spec, std::array<AudioClip, 4> stems,
                 const MixConfig& config) {
  const int64_t mix_len =
      std::llround(config.duration_s * config.sample_rate_hz);
  for (int k = spec.k; k < 4; ++k) {
    stems[k].sample_rate_hz = config.sample_rate_hz;
    stems[k].samples.assign(static_cast<size_t>(mix_len), 0.0);
  }
  StemSet out;
  out.spec = spec;
  out.mixture.sample_rate_hz = config.sample_rate_hz;
  out.mixture.samples.assign(static_cast<size_t>(mix_len), 0.0);
  for (int k = 0; k < 4; ++k)
    for (int64_t i = 0; i < mix_len; ++i)
      out.mixture.samples[i] += stems[k].samples[i];
  out.stems = std::move(stems);
  return out;
}

constexpr int kSilentRetries = 10;

StemSet render_with_retries(Rng& rng, MixtureSpec& spec,
                            const SourceCatalog& catalog,
                            const MixConfig& config) {
  std::set<std::string> used_ids;
  for (const MixComponent& comp : spec.components) used_ids.insert(comp.record_id);

  std::array<AudioClip, 4> stems;
  for (int c = 0; c < spec.k; ++c) {
    int attempt = 0;
    while (true) {
      try {
        stems[c] = render_component(spec.components[c], catalog, config);
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kSilentSource || ++attempt >= kSilentRetries)
          throw;
        log_debug("silent fragment for record \"" +
                  spec.components[c].record_id + "\", retrying");
        redraw_component(rng, spec.components[c], catalog, config, used_ids);
      }
    }
  }
  return assemble(spec, std::move(stems), config);
}

}  // namespace

std::vector<MixComponent> sample_components(Rng& rng, Task task, int k,
                                            const SourceCatalog& catalog,
                                            const MixConfig& config) {
  if (k < 1 || k > 4)
    raise(ErrorKind::kInvalidArgument, "k must be within 1..4");

  std::vector<MixComponent> components;
  std::set<std::string> used_ids;
  std::array<int, kNumSourceTypes> bg_used{};

  const SourceType first = forced_type(task);
  components.push_back(draw_component(rng, first, catalog, config, used_ids));
  used_ids.insert(components.back().record_id);

  const std::vector<SourceType> allowed = allowed_types(task);
  for (int slot = 1; slot < k; ++slot) {
    std::vector<SourceType> candidates;
    for (SourceType type : allowed) {
      if (is_background(type) &&
          bg_used[static_cast<int>(type)] >= config.max_bg_per_type)
        continue;
      if (unused_in_bucket(catalog, type, used_ids).empty()) continue;
      candidates.push_back(type);
    }
    if (candidates.empty())
      raise(ErrorKind::kDataError,
            std::string("no candidate source types left for task ") +
                to_string(task));
    const SourceType type = candidates[rng.uniform_int(candidates.size())];
    components.push_back(draw_component(rng, type, catalog, config, used_ids));
    used_ids.insert(components.back().record_id);
    if (is_background(type)) ++bg_used[static_cast<int>(type)];
  }
  return components;
}

MixtureSpec sample_spec(Rng& rng, const SourceCatalog& catalog,
                        const MixConfig& config) {
  MixtureSpec spec;
  spec.task = sample_task(rng, config);
  spec.k = config.k_min +
           static_cast<int>(rng.uniform_int(config.k_max - config.k_min + 1));
  spec.components =
      sample_components(rng, spec.task, spec.k, catalog, config);
  return spec;
}

StemSet render_mixture(const MixtureSpec& spec, const SourceCatalog& catalog,
                       const MixConfig& config) {
  if (static_cast<int>(spec.components.size()) != spec.k)
    raise(ErrorKind::kInvalidArgument,
          "spec has " + std::to_string(spec.components.size()) +
              " components but k=" + std::to_string(spec.k));
  std::array<AudioClip, 4> stems;
  for (int c = 0; c < spec.k; ++c)
    stems[c] = render_component(spec.components[c], catalog, config);
  return assemble(spec, std::move(stems), config);
}

std::string mix_dir_name(int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "mix_%06lld",
                static_cast<long long>(index));
  return buf;
}

std::string DatasetReport::to_json() const {
  nlohmann::json j;
  j["num_mixes"] = num_mixes;
  j["out_dir"] = out_dir;
  for (int i = 0; i < kNumTasks; ++i)
    j["task_counts"][to_string(static_cast<Task>(i))] = task_counts[i];
  for (int k = 0; k < 4; ++k)
    j["k_counts"][std::to_string(k + 1)] = k_counts[k];
  j["toolkit_version"] = kVersion;
  return j.dump();
}

DatasetReport generate_dataset(const SourceCatalog& catalog,
                               const MixConfig& config, int64_t num_mixes,
                               uint64_t seed, const std::string& out_dir,
                               int workers) {
  config.validate();
  if (num_mixes < 1)
    raise(ErrorKind::kInvalidArgument, "num_mixes must be >= 1");
  for (int i = 0; i < kNumTasks; ++i) {
    const Task task = static_cast<Task>(i);
    if (config.task_probs[i] > 0.0 && catalog.count(forced_type(task)) == 0)
      raise(ErrorKind::kDataError,
            std::string("catalog has no ") + to_string(forced_type(task)) +
                " records but task " + to_string(task) + " has probability " +
                std::to_string(config.task_probs[i]));
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    raise(ErrorKind::kDataError, out_dir + ": cannot create output directory");

  workers = std::max(1, workers);
  std::atomic<int64_t> next{0};
  std::mutex report_mutex;
  DatasetReport report;
  report.num_mixes = num_mixes;
  report.out_dir = out_dir;
  std::exception_ptr first_error;

  auto work = [&]() {
    std::array<int64_t, kNumTasks> task_counts{};
    std::array<int64_t, 4> k_counts{};
    while (true) {
      const int64_t i = next.fetch_add(1);
      if (i >= num_mixes) break;
      try {
        const uint64_t mix_seed = derive_seed(seed, static_cast<uint64_t>(i));
        Rng rng(mix_seed);
        MixtureSpec spec = sample_spec(rng, catalog, config);
        spec.mix_id = mix_dir_name(i);
        spec.seed = mix_seed;
        StemSet stem_set = render_with_retries(rng, spec, catalog, config);
        stem_set.spec = spec;
        write_stem_set(std::filesystem::path(out_dir) / spec.mix_id,
                       stem_set);
        ++task_counts[static_cast<int>(spec.task)];
        ++k_counts[spec.k - 1];
        if ((i + 1) % 100 == 0)
          log_info("rendered " + std::to_string(i + 1) + "/" +
                   std::to_string(num_mixes) + " mixes");
      } catch (const Error& e) {
        std::lock_guard<std::mutex> lock(report_mutex);
        if (!first_error)
          first_error = std::make_exception_ptr(Error(
              e.kind(), "mix " + std::to_string(i) + ": " + e.what()));
        next.store(num_mixes);
        break;
      } catch (...) {
        std::lock_guard<std::mutex> lock(report_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(num_mixes);
        break;
      }
    }
    std::lock_guard<std::mutex> lock(report_mutex);
    for (int t = 0; t < kNumTasks; ++t) report.task_counts[t] += task_counts[t];
    for (int k = 0; k < 4; ++k) report.k_counts[k] += k_counts[k];
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) threads.emplace_back(work);
    for (std::thread& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return report;
}

}  // namespace gass
