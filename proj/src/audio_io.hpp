// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef GASS_AUDIO_IO_HPP_
#define GASS_AUDIO_IO_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "common.hpp"

namespace gass {

// Mono sample buffer. Samples are dimensionless amplitudes, nominally within
// [-1, 1] but not enforced.
struct AudioClip {
  std::vector<double> samples;
  int32_t sample_rate_hz = 0;

  int64_t length() const { return static_cast<int64_t>(samples.size()); }
  double duration_s() const {
    return static_cast<double>(length()) / sample_rate_hz;
  }
};

struct WavInfo {
  int32_t sample_rate_hz = 0;
  int32_t channels = 0;
  int64_t frames = 0;
  int bits_per_sample = 0;
  bool is_float = false;
  double duration_s() const {
    return static_cast<double>(frames) / sample_rate_hz;
  }
};

// Header-only probe; does not decode samples.
WavInfo read_wav_info(const std::string& path);

// Reads RIFF PCM int16/int24 or IEEE float32. Multi-channel input is
// down-mixed to mono by the arithmetic mean of the channels; integer samples
// are scaled by 2^(bits-1).
AudioClip read_wav(const std::string& path);

enum class WavEncoding { kFloat32, kInt16 };

// Returns the number of samples with |x| > 1 that were saturated (int16 only;
// float32 is lossless for finite input).
int64_t write_wav(const std::string& path, const AudioClip& clip,
                  WavEncoding encoding = WavEncoding::kFloat32);

enum class SourceType : int {
  kSpeechFg = 0,
  kEventFg = 1,
  kEventBg = 2,
  kMusicFg = 3,
  kMusicBg = 4,
};

inline constexpr int kNumSourceTypes = 5;
inline constexpr std::array<SourceType, kNumSourceTypes> kAllSourceTypes = {
    SourceType::kSpeechFg, SourceType::kEventFg, SourceType::kEventBg,
    SourceType::kMusicFg, SourceType::kMusicBg};

const char* to_string(SourceType type);
SourceType source_type_from_string(const std::string& name);
inline bool is_background(SourceType type) {
  return type == SourceType::kEventBg || type == SourceType::kMusicBg;
}

struct SourceRecord {
  std::string id;
  std::string path;
  SourceType source_type = SourceType::kSpeechFg;
  double duration_s = 0.0;
  int32_t sample_rate_hz = 0;
};

// Immutable after load; shareable across renderer threads.
class SourceCatalog {
 public:
  // Manifest is JSONL, one record per line:
  //   {"id": str?, "path": str, "source_type": str,
  //    "duration_s": num?, "sample_rate_hz": int?}
  // id defaults to path; missing duration/rate are probed from the file
  // header. Relative paths resolve against the manifest directory.
  // Malformed lines abort unless skip_bad, which counts and continues.
  static SourceCatalog load_manifest(const std::string& path,
                                     bool skip_bad = false);

  const std::vector<SourceRecord>& records() const { return records_; }
  const std::vector<int>& bucket(SourceType type) const {
    return index_[static_cast<int>(type)];
  }
  int64_t count(SourceType type) const {
    return static_cast<int64_t>(bucket(type).size());
  }
  int64_t size() const { return static_cast<int64_t>(records_.size()); }
  int64_t skipped_lines() const { return skipped_lines_; }

  const SourceRecord& record(int idx) const { return records_[idx]; }
  const SourceRecord* find(const std::string& id) const;

  void add(SourceRecord record);  // throws on duplicate id

 private:
  std::vector<SourceRecord> records_;
  std::array<std::vector<int>, kNumSourceTypes> index_;
  std::unordered_map<std::string, int> by_id_;
  int64_t skipped_lines_ = 0;
};

}  // namespace gass

#endif  // GASS_AUDIO_IO_HPP_
