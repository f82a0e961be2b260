// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gass.h"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <thread>

#include <json.hpp>

#include "audio_io.hpp"
#include "common.hpp"
#include "dataset_io.hpp"
#include "dsp.hpp"
#include "metrics.hpp"
#include "mixgen.hpp"
#include "oracle_irm.hpp"
#include "pit_loss.hpp"
#include "toy_separator.hpp"

struct gass_clip {
  gass::AudioClip clip;
};

struct gass_catalog {
  gass::SourceCatalog catalog;
};

struct gass_toy_model {
  gass::ToyModel model;
};

namespace {

thread_local std::string t_last_error = "";

gass_status status_from(gass::ErrorKind kind) {
  switch (kind) {
    case gass::ErrorKind::kInvalidArgument: return GASS_ERR_INVALID_ARGUMENT;
    case gass::ErrorKind::kFileNotFound: return GASS_ERR_FILE_NOT_FOUND;
    case gass::ErrorKind::kMalformedFile: return GASS_ERR_MALFORMED_FILE;
    case gass::ErrorKind::kUnsupportedFormat: return GASS_ERR_UNSUPPORTED_FORMAT;
    case gass::ErrorKind::kSilentSource: return GASS_ERR_SILENT_SOURCE;
    case gass::ErrorKind::kDataError: return GASS_ERR_DATA;
  }
  return GASS_ERR_INTERNAL;
}

template <typename F>
gass_status wrap(F&& body) {
  try {
    body();
    return GASS_OK;
  } catch (const gass::Error& e) {
    t_last_error = e.what();
    return status_from(e.kind());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return GASS_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return GASS_ERR_INTERNAL;
  }
}

gass_status invalid(const char* msg) {
  t_last_error = msg;
  return GASS_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_out_string(char** out, const std::string& s) {
  if (out != nullptr) *out = dup_string(s);
}

gass::MixConfig mix_config_from(const char* config_json) {
  if (config_json == nullptr || config_json[0] == '\0')
    return gass::MixConfig{};
  return gass::MixConfig::from_json(config_json);
}

gass::StftConfig stft_config_from(const char* config_json, int32_t rate) {
  gass::StftConfig config = gass::StftConfig::for_rate(rate);
  if (config_json == nullptr || config_json[0] == '\0') return config;
  const nlohmann::json j = nlohmann::json::parse(config_json);
  config.frame_len = j.value("frame_len", config.frame_len);
  config.hop = j.contains("hop") ? j.at("hop").get<int>()
                                 : config.frame_len / 4;
  config.validate();
  return config;
}

}  // namespace

extern "C" {

const char* gass_version(void) { return gass::kVersion; }

const char* gass_last_error(void) { return t_last_error.c_str(); }

void gass_string_free(char* s) { delete[] s; }

gass_status gass_clip_create(const double* samples, int64_t length,
                             int32_t sample_rate_hz, gass_clip** out) {
  if (out == nullptr || (samples == nullptr && length > 0))
    return invalid("gass_clip_create: null argument");
  return wrap([&] {
    if (length < 0 || sample_rate_hz <= 0)
      gass::raise(gass::ErrorKind::kInvalidArgument,
                  "gass_clip_create: bad length or rate");
    auto clip = std::make_unique<gass_clip>();
    clip->clip.sample_rate_hz = sample_rate_hz;
    clip->clip.samples.assign(samples, samples + length);
    *out = clip.release();
  });
}

void gass_clip_free(gass_clip* clip) { delete clip; }

int64_t gass_clip_length(const gass_clip* clip) {
  return clip == nullptr ? 0 : clip->clip.length();
}

int32_t gass_clip_sample_rate(const gass_clip* clip) {
  return clip == nullptr ? 0 : clip->clip.sample_rate_hz;
}

const double* gass_clip_samples(const gass_clip* clip) {
  return clip == nullptr ? nullptr : clip->clip.samples.data();
}

gass_status gass_read_wav(const char* path, gass_clip** out) {
  if (path == nullptr || out == nullptr)
    return invalid("gass_read_wav: null argument");
  return wrap([&] {
    auto clip = std::make_unique<gass_clip>();
    clip->clip = gass::read_wav(path);
    *out = clip.release();
  });
}

gass_status gass_write_wav(const char* path, const gass_clip* clip,
                           const char* encoding, int64_t* clipped_out) {
  if (path == nullptr || clip == nullptr)
    return invalid("gass_write_wav: null argument");
  return wrap([&] {
    gass::WavEncoding enc = gass::WavEncoding::kFloat32;
    if (encoding != nullptr && encoding[0] != '\0') {
      if (std::strcmp(encoding, "float32") == 0)
        enc = gass::WavEncoding::kFloat32;
      else if (std::strcmp(encoding, "int16") == 0)
        enc = gass::WavEncoding::kInt16;
      else
        gass::raise(gass::ErrorKind::kInvalidArgument,
                    std::string("unknown encoding \"") + encoding + "\"");
    }
    const int64_t clipped = gass::write_wav(path, clip->clip, enc);
    if (clipped_out != nullptr) *clipped_out = clipped;
  });
}

gass_status gass_resample(const gass_clip* clip, int32_t target_rate_hz,
                          gass_clip** out) {
  if (clip == nullptr || out == nullptr)
    return invalid("gass_resample: null argument");
  return wrap([&] {
    auto result = std::make_unique<gass_clip>();
    result->clip = gass::resample(clip->clip, target_rate_hz);
    *out = result.release();
  });
}

gass_status gass_peak_normalize(const gass_clip* clip, gass_clip** out) {
  if (clip == nullptr || out == nullptr)
    return invalid("gass_peak_normalize: null argument");
  return wrap([&] {
    auto result = std::make_unique<gass_clip>();
    result->clip = gass::peak_normalize(clip->clip);
    *out = result.release();
  });
}

gass_status gass_mean_energy_db(const gass_clip* clip, double* out) {
  if (clip == nullptr || out == nullptr)
    return invalid("gass_mean_energy_db: null argument");
  return wrap([&] { *out = gass::mean_energy_db(clip->clip); });
}

gass_status gass_catalog_load(const char* manifest_path, int skip_bad,
                              gass_catalog** out) {
  if (manifest_path == nullptr || out == nullptr)
    return invalid("gass_catalog_load: null argument");
  return wrap([&] {
    auto catalog = std::make_unique<gass_catalog>();
    catalog->catalog =
        gass::SourceCatalog::load_manifest(manifest_path, skip_bad != 0);
    *out = catalog.release();
  });
}

void gass_catalog_free(gass_catalog* catalog) { delete catalog; }

int64_t gass_catalog_size(const gass_catalog* catalog) {
  return catalog == nullptr ? 0 : catalog->catalog.size();
}

int64_t gass_catalog_count(const gass_catalog* catalog,
                           const char* source_type) {
  if (catalog == nullptr || source_type == nullptr) return 0;
  try {
    return catalog->catalog.count(gass::source_type_from_string(source_type));
  } catch (const std::exception&) {
    return -1;
  }
}

gass_status gass_generate_dataset(const gass_catalog* catalog,
                                  const char* config_json, int64_t num_mixes,
                                  uint64_t seed, const char* out_dir,
                                  int workers, char** report_json) {
  if (catalog == nullptr || out_dir == nullptr)
    return invalid("gass_generate_dataset: null argument");
  return wrap([&] {
    const gass::MixConfig config = mix_config_from(config_json);
    const gass::DatasetReport report = gass::generate_dataset(
        catalog->catalog, config, num_mixes, seed, out_dir, workers);
    set_out_string(report_json, report.to_json());
  });
}

gass_status gass_oracle_irm_run(const char* mix_dir, const char* out_dir,
                                const char* config_json, char** report_json) {
  if (mix_dir == nullptr || out_dir == nullptr)
    return invalid("gass_oracle_irm_run: null argument");
  return wrap([&] {
    const bool has_config = config_json != nullptr && config_json[0] != '\0' &&
                            std::string(config_json) != "{}";
    gass::StftConfig config;
    if (has_config) config = stft_config_from(config_json, 48000);
    const int workers = static_cast<int>(
        std::min(4u, std::max(1u, std::thread::hardware_concurrency())));
    const int64_t mixes = gass::run_oracle_irm(
        mix_dir, out_dir, has_config ? &config : nullptr, workers);
    nlohmann::json j;
    j["mixes"] = mixes;
    j["out_dir"] = out_dir;
    j["toolkit_version"] = gass::kVersion;
    set_out_string(report_json, j.dump());
  });
}

gass_status gass_evaluate(const char* ref_dir, const char* est_dir,
                          int32_t native_rate_hz, const char* metrics_csv,
                          const char* report_path, int workers,
                          char** aggregate_json) {
  if (ref_dir == nullptr || est_dir == nullptr)
    return invalid("gass_evaluate: null argument");
  return wrap([&] {
    gass::MetricsRequest request;
    if (metrics_csv != nullptr && metrics_csv[0] != '\0') {
      request = {false, false, false};
      std::string csv = metrics_csv;
      size_t pos = 0;
      while (pos <= csv.size()) {
        const size_t comma = std::min(csv.find(',', pos), csv.size());
        const std::string name = csv.substr(pos, comma - pos);
        if (name == "sisdr") request.sisdr = true;
        else if (name == "counting") request.counting = true;
        else if (name == "chunked-sdr") request.chunked_sdr = true;
        else if (!name.empty())
          gass::raise(gass::ErrorKind::kInvalidArgument,
                      "unknown metric \"" + name + "\"");
        pos = comma + 1;
      }
    }
    const gass::MetricsReport report = gass::run_evaluation(
        ref_dir, est_dir, native_rate_hz, request,
        report_path == nullptr ? "" : report_path, workers);
    set_out_string(aggregate_json, gass::aggregates_to_json(report.aggregates));
  });
}

gass_status gass_loss_dirs(const char* ref_dir, const char* est_dir,
                           double tau_db, char** result_json) {
  if (ref_dir == nullptr || est_dir == nullptr)
    return invalid("gass_loss_dirs: null argument");
  return wrap([&] {
    const gass::StemSet set = gass::read_stem_set(ref_dir);
    const std::array<gass::AudioClip, 4> estimates =
        gass::read_estimates(est_dir);
    std::array<std::span<const double>, 4> targets, ests;
    for (int i = 0; i < 4; ++i) {
      if (estimates[i].length() != set.mixture.length())
        gass::raise(gass::ErrorKind::kDataError,
                    "estimate length does not match the reference mix");
      targets[i] = set.stems[i].samples;
      ests[i] = estimates[i].samples;
    }
    const gass::LossConfig config{tau_db};
    const gass::PitResult result =
        gass::pit_loss(targets, ests, set.mixture.samples, config);
    nlohmann::json j;
    j["mix_id"] = set.spec.mix_id;
    j["tau_db"] = tau_db;
    j["loss"] = result.loss;
    j["permutation"] = result.permutation;
    j["per_pair_losses"] = result.per_pair_losses;
    set_out_string(result_json, j.dump());
  });
}

gass_status gass_inspect_meta(const char* meta_path, const char* config_json,
                              char** result_json) {
  if (meta_path == nullptr)
    return invalid("gass_inspect_meta: null argument");
  std::string violation;
  const gass_status status = wrap([&] {
    const gass::MixtureSpec spec = gass::read_meta(meta_path);
    const gass::MixConfig config = mix_config_from(config_json);
    nlohmann::json j = nlohmann::json::parse(gass::spec_to_json(spec));
    j["violations"] = nlohmann::json::array();
    for (const gass::MixComponent& comp : spec.components) {
      const gass::GainRange range =
          config.gain_ranges_db[static_cast<int>(comp.source_type)];
      if (comp.gain_db < range.lo_db || comp.gain_db > range.hi_db) {
        j["violations"].push_back(
            {{"record_id", comp.record_id},
             {"source_type", gass::to_string(comp.source_type)},
             {"gain_db", comp.gain_db},
             {"range", {range.lo_db, range.hi_db}}});
        violation = "gain " + std::to_string(comp.gain_db) + " dB for " +
                    comp.record_id + " outside its configured range";
      }
    }
    set_out_string(result_json, j.dump(2));
  });
  if (status != GASS_OK) return status;
  if (!violation.empty()) {
    t_last_error = violation;
    return GASS_ERR_DATA;
  }
  return GASS_OK;
}

gass_status gass_pit_loss(const double* const targets[4],
                          const double* const estimates[4],
                          const double* mixture, int64_t length, double tau_db,
                          double* loss_out, int32_t perm_out[4],
                          double per_pair_out[4]) {
  if (targets == nullptr || estimates == nullptr || mixture == nullptr ||
      loss_out == nullptr || length < 0)
    return invalid("gass_pit_loss: null argument");
  return wrap([&] {
    std::array<std::span<const double>, 4> target_spans, estimate_spans;
    for (int i = 0; i < 4; ++i) {
      if (targets[i] == nullptr || estimates[i] == nullptr)
        gass::raise(gass::ErrorKind::kInvalidArgument,
                    "gass_pit_loss: null signal buffer");
      target_spans[i] = {targets[i], static_cast<size_t>(length)};
      estimate_spans[i] = {estimates[i], static_cast<size_t>(length)};
    }
    const gass::LossConfig config{tau_db};
    const gass::PitResult result = gass::pit_loss(
        target_spans, estimate_spans,
        {mixture, static_cast<size_t>(length)}, config);
    *loss_out = result.loss;
    if (perm_out != nullptr)
      for (int i = 0; i < 4; ++i) perm_out[i] = result.permutation[i];
    if (per_pair_out != nullptr)
      for (int i = 0; i < 4; ++i) per_pair_out[i] = result.per_pair_losses[i];
  });
}

gass_status gass_si_sdr(const double* reference, const double* estimate,
                        int64_t length, double* out) {
  if (reference == nullptr || estimate == nullptr || out == nullptr ||
      length < 0)
    return invalid("gass_si_sdr: null argument");
  return wrap([&] {
    *out = gass::si_sdr({reference, static_cast<size_t>(length)},
                        {estimate, static_cast<size_t>(length)});
  });
}

gass_status gass_toy_train(const char* data_dir, const char* train_config_json,
                           const char* model_out_path, char** curve_json) {
  if (data_dir == nullptr || model_out_path == nullptr)
    return invalid("gass_toy_train: null argument");
  return wrap([&] {
    gass::TrainConfig config;
    if (train_config_json != nullptr && train_config_json[0] != '\0')
      config = gass::TrainConfig::from_json(train_config_json);
    const std::vector<std::string> mixes = gass::list_mix_dirs(data_dir);
    if (mixes.empty())
      gass::raise(gass::ErrorKind::kDataError,
                  std::string(data_dir) + ": empty dataset");
    const gass::StemSet probe =
        gass::read_stem_set(std::filesystem::path(data_dir) / mixes.front());
    gass::ToyModel model =
        gass::ToyModel::create(probe.mixture.sample_rate_hz);
    gass::TrainResult result =
        gass::train_toy(std::move(model), data_dir, config);
    result.model.save(model_out_path);
    nlohmann::json j;
    j["steps"] = result.loss_curve.size();
    j["loss_curve"] = result.loss_curve;
    j["model_path"] = model_out_path;
    set_out_string(curve_json, j.dump());
  });
}

gass_status gass_toy_model_load(const char* path, gass_toy_model** out) {
  if (path == nullptr || out == nullptr)
    return invalid("gass_toy_model_load: null argument");
  return wrap([&] {
    auto model = std::make_unique<gass_toy_model>();
    model->model = gass::ToyModel::load(path);
    *out = model.release();
  });
}

void gass_toy_model_free(gass_toy_model* model) { delete model; }

gass_status gass_toy_separate(const gass_toy_model* model,
                              const gass_clip* mixture,
                              gass_clip* estimates_out[4]) {
  if (model == nullptr || mixture == nullptr || estimates_out == nullptr)
    return invalid("gass_toy_separate: null argument");
  return wrap([&] {
    std::array<gass::AudioClip, 4> estimates =
        gass::toy_forward(model->model, mixture->clip);
    for (int k = 0; k < 4; ++k) {
      auto clip = std::make_unique<gass_clip>();
      clip->clip = std::move(estimates[k]);
      estimates_out[k] = clip.release();
    }
  });
}

gass_status gass_grad_check(uint64_t seed, int instances, char** report_json) {
  return wrap([&] {
    const gass::GradCheckReport report =
        gass::grad_check(seed, instances > 0 ? instances : 10);
    set_out_string(report_json, report.to_json());
    if (!report.passed())
      gass::raise(gass::ErrorKind::kDataError,
                  "gradient check failed: max relative error " +
                      std::to_string(report.max_rel_error));
  });
}

}  // extern "C"
