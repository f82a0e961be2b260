// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dataset_io.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace gass {

std::string spec_to_json(const MixtureSpec& spec) {
  nlohmann::json j;
  j["mix_id"] = spec.mix_id;
  j["task"] = to_string(spec.task);
  j["k"] = spec.k;
  j["seed"] = spec.seed;
  j["components"] = nlohmann::json::array();
  for (const MixComponent& comp : spec.components) {
    nlohmann::json c;
    c["record_id"] = comp.record_id;
    c["source_type"] = to_string(comp.source_type);
    c["gain_db"] = comp.gain_db;
    c["clip_offset_s"] = comp.clip_offset_s;
    c["mix_onset_s"] = comp.mix_onset_s;
    j["components"].push_back(std::move(c));
  }
  j["toolkit_version"] = kVersion;
  return j.dump(2);
}

MixtureSpec spec_from_json(const std::string& json_text) {
  const nlohmann::json j = nlohmann::json::parse(json_text);
  MixtureSpec spec;
  spec.mix_id = j.value("mix_id", "");
  spec.task = task_from_string(j.at("task").get<std::string>());
  spec.k = j.at("k").get<int>();
  spec.seed = j.value("seed", uint64_t{0});
  if (spec.k < 1 || spec.k > 4)
    raise(ErrorKind::kDataError, "meta: k out of range 1..4");
  for (const auto& c : j.at("components")) {
    MixComponent comp;
    comp.record_id = c.at("record_id").get<std::string>();
    comp.source_type =
        source_type_from_string(c.at("source_type").get<std::string>());
    comp.gain_db = c.at("gain_db").get<double>();
    comp.clip_offset_s = c.value("clip_offset_s", 0.0);
    comp.mix_onset_s = c.value("mix_onset_s", 0.0);
    spec.components.push_back(std::move(comp));
  }
  if (static_cast<int>(spec.components.size()) != spec.k)
    raise(ErrorKind::kDataError, "meta: component count does not match k");
  return spec;
}

void write_meta(const std::filesystem::path& path, const MixtureSpec& spec) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(ErrorKind::kDataError, path.string() + ": cannot write");
  out << spec_to_json(spec) << "\n";
}

MixtureSpec read_meta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::kFileNotFound, path.string() + ": cannot open");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  try {
    return spec_from_json(text);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorKind::kMalformedFile, path.string() + ": " + e.what());
  }
}

void write_stem_set(const std::filesystem::path& mix_dir, const StemSet& set) {
  std::error_code ec;
  std::filesystem::create_directories(mix_dir, ec);
  if (ec)
    raise(ErrorKind::kDataError,
          mix_dir.string() + ": cannot create mix directory");
  write_wav((mix_dir / "mixture.wav").string(), set.mixture);
  for (int k = 0; k < 4; ++k)
    write_wav((mix_dir / ("stem" + std::to_string(k + 1) + ".wav")).string(),
              set.stems[k]);
  write_meta(mix_dir / "meta.json", set.spec);
}

StemSet read_stem_set(const std::filesystem::path& mix_dir) {
  StemSet set;
  set.spec = read_meta(mix_dir / "meta.json");
  set.mixture = read_wav((mix_dir / "mixture.wav").string());
  for (int k = 0; k < 4; ++k)
    set.stems[k] =
        read_wav((mix_dir / ("stem" + std::to_string(k + 1) + ".wav")).string());
  return set;
}

void write_estimates(const std::filesystem::path& mix_dir,
                     const std::array<AudioClip, 4>& estimates) {
  std::error_code ec;
  std::filesystem::create_directories(mix_dir, ec);
  if (ec)
    raise(ErrorKind::kDataError,
          mix_dir.string() + ": cannot create estimate directory");
  for (int k = 0; k < 4; ++k)
    write_wav((mix_dir / ("est" + std::to_string(k + 1) + ".wav")).string(),
              estimates[k]);
}

std::array<AudioClip, 4> read_estimates(const std::filesystem::path& mix_dir) {
  std::array<AudioClip, 4> estimates;
  for (int k = 0; k < 4; ++k)
    estimates[k] =
        read_wav((mix_dir / ("est" + std::to_string(k + 1) + ".wav")).string());
  return estimates;
}

std::vector<std::string> list_mix_dirs(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root))
    raise(ErrorKind::kFileNotFound, root.string() + ": not a directory");
  std::vector<std::string> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root))
    if (entry.is_directory() &&
        std::filesystem::exists(entry.path() / "meta.json"))
      dirs.push_back(entry.path().filename().string());
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

}  // namespace gass
