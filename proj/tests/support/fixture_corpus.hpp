// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef GASS_TESTS_FIXTURE_CORPUS_HPP_
#define GASS_TESTS_FIXTURE_CORPUS_HPP_

#include <string>
#include <vector>

#include "audio_io.hpp"

namespace gass::testing {

// Synthesizes the bundled 25-clip corpus under dir/ and writes
// dir/manifest.jsonl. Per-type counts: speech_fg 10, event_fg 6, event_bg 4,
// music_fg 3, music_bg 2. Clips vary in rate (8-48 kHz), duration, channel
// count and encoding, and every clip is deterministic in its index.
// Returns the manifest path.
std::string make_fixture_corpus(const std::string& dir);

// Raw WAV writer for reader tests: interleaved samples, any channel count,
// encoding one of "int16", "int24", "float32".
void write_wav_raw(const std::string& path, int32_t sample_rate_hz,
                   int channels, const std::vector<double>& interleaved,
                   const std::string& encoding);

// Unique fresh directory under the system temp dir.
std::string make_temp_dir(const std::string& tag);

}  // namespace gass::testing

#endif  // GASS_TESTS_FIXTURE_CORPUS_HPP_
