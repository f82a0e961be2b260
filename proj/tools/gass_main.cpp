// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// gass: one binary for the whole pipeline. Stages chain by directory
// convention: mix -> oracle-irm (or your own separator) -> eval. Data goes to
// stdout as JSON, progress to stderr. Exit codes: 0 ok, 1 usage, 2 data.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gass.h"

namespace {

constexpr const char* kGainRangeHelp =
    "Default gain ranges (dB): speech_fg [-10, 0], event_fg [-10, 0], "
    "event_bg [-20, -10], music_fg [-3, 0], music_bg [-20, -10]";

int exit_code_for(gass_status status) {
  return status == GASS_ERR_INVALID_ARGUMENT ? 1 : 2;
}

int fail(gass_status status) {
  std::fprintf(stderr, "gass: error: %s\n", gass_last_error());
  return exit_code_for(status);
}

// Section of the --config file as a JSON string; "{}" when absent.
std::string config_section(const std::string& config_path,
                           const std::string& section) {
  if (config_path.empty()) return "{}";
  std::ifstream in(config_path);
  if (!in) {
    std::fprintf(stderr, "gass: error: cannot open config file %s\n",
                 config_path.c_str());
    std::exit(2);
  }
  try {
    nlohmann::json j;
    in >> j;
    if (!j.contains(section)) return "{}";
    return j.at(section).dump();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gass: error: bad config file %s: %s\n",
                 config_path.c_str(), e.what());
    std::exit(2);
  }
}

void print_string(char* s) {
  if (s == nullptr) return;
  std::printf("%s\n", s);
  gass_string_free(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "gass - general audio source separation toolkit\n"
      "Set GASS_LOG=error|warn|info|debug to control stderr verbosity."};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 0;
  int workers = 1;
  bool quiet = false;
  app.add_option("--config", config_path,
                 "JSON config file with mix/stft/train sections");
  app.add_option("--seed", seed, "Global RNG seed")->capture_default_str();
  app.add_option("--workers", workers, "Worker threads for mix and eval")
      ->capture_default_str();
  app.add_flag("--quiet", quiet, "Log errors only");

  // mix
  auto* mix = app.add_subcommand(
      "mix", std::string("Sample and render a mixture dataset.\n") +
                 kGainRangeHelp +
                 ".\nDefaults: task probs speech 0.25 / sound_event 0.25 / "
                 "music 0.5, K uniform on {1,2,3,4}, 8 s at 48 kHz, "
                 "Beta(2,1) gain draws.");
  std::string mix_manifest, mix_out;
  int64_t mix_num = 0;
  bool mix_skip_bad = false;
  mix->add_option("--manifest", mix_manifest, "Source manifest (JSONL)")
      ->required();
  mix->add_option("--out", mix_out, "Output dataset directory")->required();
  mix->add_option("--num", mix_num, "Number of mixes")->required();
  mix->add_flag("--skip-bad", mix_skip_bad,
                "Skip malformed manifest lines instead of aborting");

  // oracle-irm
  auto* oracle = app.add_subcommand(
      "oracle-irm",
      "Ideal-ratio-mask oracle separation of a generated dataset "
      "(32 ms / 8 ms STFT by default; override via the stft config section).");
  std::string oracle_mix_dir, oracle_out;
  oracle->add_option("--mix-dir", oracle_mix_dir, "Generated dataset")
      ->required();
  oracle->add_option("--out", oracle_out, "Estimate output directory")
      ->required();

  // eval
  auto* eval = app.add_subcommand(
      "eval",
      "Score estimate directories against a reference dataset. Writes one "
      "JSON line per mix plus an aggregate line.");
  std::string eval_ref, eval_est, eval_out;
  std::string eval_metrics = "sisdr,counting";
  int32_t eval_native_rate = 0;
  eval->add_option("--ref-dir", eval_ref, "Reference dataset")->required();
  eval->add_option("--est-dir", eval_est, "Estimates (est1..4.wav per mix)")
      ->required();
  eval->add_option("--native-rate", eval_native_rate,
                   "Evaluation rate in Hz (0 = rate of the references)")
      ->capture_default_str();
  eval->add_option("--out", eval_out, "Report path (JSONL)");
  eval->add_option("--metrics", eval_metrics,
                   "Comma list of sisdr,counting,chunked-sdr")
      ->capture_default_str();

  // loss
  auto* loss = app.add_subcommand(
      "loss",
      "Thresholded log-MSE PIT loss of one estimate directory against one "
      "mix directory.");
  std::string loss_ref, loss_est;
  double loss_tau_db = -30.0;
  loss->add_option("--ref-dir", loss_ref, "One generated mix directory")
      ->required();
  loss->add_option("--est-dir", loss_est, "Directory with est1..4.wav")
      ->required();
  loss->add_option("--tau-db", loss_tau_db, "Loss threshold tau in dB")
      ->capture_default_str();

  // train-toy
  auto* train = app.add_subcommand(
      "train-toy",
      "Train the toy mask separator on a generated dataset (plain gradient "
      "descent; defaults: lr 1e-3, batch 4, momentum 0.9, tau -30 dB).");
  std::string train_data, train_out;
  int64_t train_steps = 2000;
  double train_lr = -1.0, train_momentum = -1.0;
  int train_batch = -1;
  train->add_option("--data", train_data, "Training dataset")->required();
  train->add_option("--out", train_out, "Model output path")->required();
  train->add_option("--steps", train_steps, "Training steps")
      ->capture_default_str();
  train->add_option("--lr", train_lr, "Learning rate (default 1e-3)");
  train->add_option("--batch-size", train_batch, "Batch size (default 4)");
  train->add_option("--momentum", train_momentum, "Momentum (default 0.9)");

  // grad-check
  auto* grad = app.add_subcommand(
      "grad-check",
      "Compare analytic toy-model gradients against central finite "
      "differences; exits nonzero on failure.");
  int grad_instances = 10;
  grad->add_option("--instances", grad_instances, "Random problem instances")
      ->capture_default_str();

  // inspect
  auto* inspect = app.add_subcommand(
      "inspect", std::string("Pretty-print and validate a mix meta.json.\n") +
                     kGainRangeHelp + ".");
  std::string inspect_path;
  inspect->add_option("meta", inspect_path, "Path to meta.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (quiet) setenv("GASS_LOG", "error", 1);

  if (mix->parsed()) {
    gass_catalog* catalog = nullptr;
    gass_status status =
        gass_catalog_load(mix_manifest.c_str(), mix_skip_bad ? 1 : 0, &catalog);
    if (status != GASS_OK) return fail(status);
    char* report = nullptr;
    status = gass_generate_dataset(
        catalog, config_section(config_path, "mix").c_str(), mix_num, seed,
        mix_out.c_str(), workers, &report);
    gass_catalog_free(catalog);
    if (status != GASS_OK) return fail(status);
    print_string(report);
    return 0;
  }

  if (oracle->parsed()) {
    char* report = nullptr;
    const gass_status status = gass_oracle_irm_run(
        oracle_mix_dir.c_str(), oracle_out.c_str(),
        config_section(config_path, "stft").c_str(), &report);
    if (status != GASS_OK) return fail(status);
    print_string(report);
    return 0;
  }

  if (eval->parsed()) {
    char* aggregate = nullptr;
    const gass_status status = gass_evaluate(
        eval_ref.c_str(), eval_est.c_str(), eval_native_rate,
        eval_metrics.c_str(), eval_out.empty() ? nullptr : eval_out.c_str(),
        workers, &aggregate);
    if (status != GASS_OK) return fail(status);
    print_string(aggregate);
    return 0;
  }

  if (loss->parsed()) {
    char* result = nullptr;
    const gass_status status = gass_loss_dirs(loss_ref.c_str(),
                                              loss_est.c_str(), loss_tau_db,
                                              &result);
    if (status != GASS_OK) return fail(status);
    print_string(result);
    return 0;
  }

  if (train->parsed()) {
    nlohmann::json config =
        nlohmann::json::parse(config_section(config_path, "train"));
    config["steps"] = train_steps;
    config["seed"] = seed;
    if (train_lr >= 0.0) config["learning_rate"] = train_lr;
    if (train_batch > 0) config["batch_size"] = train_batch;
    if (train_momentum >= 0.0) config["momentum"] = train_momentum;
    char* curve = nullptr;
    const gass_status status =
        gass_toy_train(train_data.c_str(), config.dump().c_str(),
                       train_out.c_str(), &curve);
    if (status != GASS_OK) return fail(status);
    print_string(curve);
    return 0;
  }

  if (grad->parsed()) {
    char* report = nullptr;
    const gass_status status = gass_grad_check(seed, grad_instances, &report);
    print_string(report);
    if (status != GASS_OK) return fail(status);
    return 0;
  }

  if (inspect->parsed()) {
    char* result = nullptr;
    const gass_status status = gass_inspect_meta(
        inspect_path.c_str(), config_section(config_path, "mix").c_str(),
        &result);
    print_string(result);
    if (status != GASS_OK) return fail(status);
    return 0;
  }

  return 1;
}
