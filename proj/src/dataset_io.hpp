// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef GASS_DATASET_IO_HPP_
#define GASS_DATASET_IO_HPP_

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "audio_io.hpp"
#include "mixgen.hpp"

namespace gass {

// Generated dataset layout:
//   <root>/<mix_id>/mixture.wav, stem1.wav .. stem4.wav, meta.json
// Separated estimates live in a parallel tree:
//   <root>/<mix_id>/est1.wav .. est4.wav

void write_meta(const std::filesystem::path& path, const MixtureSpec& spec);
MixtureSpec read_meta(const std::filesystem::path& path);
std::string spec_to_json(const MixtureSpec& spec);
MixtureSpec spec_from_json(const std::string& json_text);

void write_stem_set(const std::filesystem::path& mix_dir, const StemSet& set);
StemSet read_stem_set(const std::filesystem::path& mix_dir);

void write_estimates(const std::filesystem::path& mix_dir,
                     const std::array<AudioClip, 4>& estimates);
std::array<AudioClip, 4> read_estimates(const std::filesystem::path& mix_dir);

// Subdirectories of root that contain a meta.json, sorted by name.
std::vector<std::string> list_mix_dirs(const std::filesystem::path& root);

}  // namespace gass

#endif  // GASS_DATASET_IO_HPP_
