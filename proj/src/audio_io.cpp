// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace gass {

namespace {

constexpr uint16_t kFormatPcm = 0x0001;
constexpr uint16_t kFormatIeeeFloat = 0x0003;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint16_t read_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

struct WavFormat {
  uint16_t format_tag = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits_per_sample = 0;
};

struct WavLayout {
  WavFormat fmt;
  std::streamoff data_pos = 0;
  uint32_t data_size = 0;
};

bool fourcc_is(const uint8_t* p, const char* tag) {
  return std::memcmp(p, tag, 4) == 0;
}

// Walks the RIFF chunk list and locates fmt + data.
WavLayout parse_wav_header(std::ifstream& in, const std::string& path) {
  uint8_t riff[12];
  if (!in.read(reinterpret_cast<char*>(riff), 12))
    raise(ErrorKind::kMalformedFile, path + ": truncated RIFF header");
  if (!fourcc_is(riff, "RIFF") || !fourcc_is(riff + 8, "WAVE"))
    raise(ErrorKind::kMalformedFile, path + ": not a RIFF/WAVE file");

  WavLayout layout;
  bool have_fmt = false;
  while (true) {
    uint8_t header[8];
    if (!in.read(reinterpret_cast<char*>(header), 8)) break;
    const uint32_t size = read_u32(header + 4);
    if (fourcc_is(header, "fmt ")) {
      if (size < 16)
        raise(ErrorKind::kMalformedFile, path + ": fmt chunk too small");
      std::vector<uint8_t> fmt(size);
      if (!in.read(reinterpret_cast<char*>(fmt.data()), size))
        raise(ErrorKind::kMalformedFile, path + ": truncated fmt chunk");
      layout.fmt.format_tag = read_u16(fmt.data() + 0);
      layout.fmt.channels = read_u16(fmt.data() + 2);
      layout.fmt.sample_rate = read_u32(fmt.data() + 4);
      layout.fmt.bits_per_sample = read_u16(fmt.data() + 14);
      if (layout.fmt.format_tag == kFormatExtensible) {
        // cbSize(2) validBits(2) channelMask(4) subformat GUID(16)
        if (size < 40)
          raise(ErrorKind::kMalformedFile,
                path + ": extensible fmt chunk too small");
        layout.fmt.format_tag = read_u16(fmt.data() + 24);
      }
      have_fmt = true;
    } else if (fourcc_is(header, "data")) {
      layout.data_pos = in.tellg();
      layout.data_size = size;
      in.seekg(size + (size & 1), std::ios_base::cur);
    } else {
      in.seekg(size + (size & 1), std::ios_base::cur);
    }
    if (!in) break;
  }
  if (!have_fmt)
    raise(ErrorKind::kMalformedFile, path + ": missing fmt chunk");
  if (layout.data_pos == 0)
    raise(ErrorKind::kMalformedFile, path + ": missing data chunk");
  if (layout.fmt.channels == 0 || layout.fmt.sample_rate == 0)
    raise(ErrorKind::kMalformedFile, path + ": invalid fmt fields");
  return layout;
}

void check_supported(const WavLayout& layout, const std::string& path) {
  const auto& fmt = layout.fmt;
  const bool pcm_ok = fmt.format_tag == kFormatPcm &&
                      (fmt.bits_per_sample == 16 || fmt.bits_per_sample == 24);
  const bool float_ok =
      fmt.format_tag == kFormatIeeeFloat && fmt.bits_per_sample == 32;
  if (!pcm_ok && !float_ok)
    raise(ErrorKind::kUnsupportedFormat,
          path + ": unsupported encoding (tag " +
              std::to_string(fmt.format_tag) + ", " +
              std::to_string(fmt.bits_per_sample) + " bit)");
}

std::ifstream open_input(const std::string& path) {
  if (!std::filesystem::exists(path))
    raise(ErrorKind::kFileNotFound, path + ": no such file");
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::kFileNotFound, path + ": cannot open");
  return in;
}

void append_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void append_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

}  // namespace

WavInfo read_wav_info(const std::string& path) {
  std::ifstream in = open_input(path);
  const WavLayout layout = parse_wav_header(in, path);
  check_supported(layout, path);
  const int bytes_per_sample = layout.fmt.bits_per_sample / 8;
  const int64_t frame_bytes =
      static_cast<int64_t>(bytes_per_sample) * layout.fmt.channels;
  WavInfo info;
  info.sample_rate_hz = static_cast<int32_t>(layout.fmt.sample_rate);
  info.channels = layout.fmt.channels;
  info.frames = layout.data_size / frame_bytes;
  info.bits_per_sample = layout.fmt.bits_per_sample;
  info.is_float = layout.fmt.format_tag == kFormatIeeeFloat;
  return info;
}

AudioClip read_wav(const std::string& path) {
  std::ifstream in = open_input(path);
  const WavLayout layout = parse_wav_header(in, path);
  check_supported(layout, path);

  const int channels = layout.fmt.channels;
  const int bytes_per_sample = layout.fmt.bits_per_sample / 8;
  const int64_t frame_bytes = static_cast<int64_t>(bytes_per_sample) * channels;
  const int64_t frames = layout.data_size / frame_bytes;

  std::vector<uint8_t> raw(static_cast<size_t>(frames * frame_bytes));
  in.clear();
  in.seekg(layout.data_pos);
  if (!in.read(reinterpret_cast<char*>(raw.data()),
               static_cast<std::streamsize>(raw.size())))
    raise(ErrorKind::kMalformedFile, path + ": truncated data chunk");

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int32_t>(layout.fmt.sample_rate);
  clip.samples.resize(static_cast<size_t>(frames));

  const double inv_channels = channels > 0 ? 1.0 / channels : 0.0;
  const uint8_t* p = raw.data();
  for (int64_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      double v = 0.0;
      if (layout.fmt.format_tag == kFormatIeeeFloat) {
        float f;
        std::memcpy(&f, p, 4);
        v = f;
      } else if (layout.fmt.bits_per_sample == 16) {
        const auto s = static_cast<int16_t>(read_u16(p));
        v = s / 32768.0;
      } else {  // 24-bit PCM
        const int32_t s =
            static_cast<int32_t>((static_cast<uint32_t>(p[0]) << 8) |
                                 (static_cast<uint32_t>(p[1]) << 16) |
                                 (static_cast<uint32_t>(p[2]) << 24)) >>
            8;
        v = s / 8388608.0;
      }
      if (!std::isfinite(v))
        raise(ErrorKind::kMalformedFile,
              path + ": non-finite sample at frame " + std::to_string(i));
      acc += v;
      p += bytes_per_sample;
    }
    clip.samples[static_cast<size_t>(i)] = acc * inv_channels;
  }
  return clip;
}

int64_t write_wav(const std::string& path, const AudioClip& clip,
                  WavEncoding encoding) {
  if (clip.sample_rate_hz <= 0)
    raise(ErrorKind::kInvalidArgument, "write_wav: sample rate must be > 0");
  for (double s : clip.samples)
    if (!std::isfinite(s))
      raise(ErrorKind::kInvalidArgument, "write_wav: non-finite sample");

  const bool is_float = encoding == WavEncoding::kFloat32;
  const uint32_t bytes_per_sample = is_float ? 4 : 2;
  const uint32_t n = static_cast<uint32_t>(clip.samples.size());
  const uint32_t data_size = n * bytes_per_sample;
  const uint32_t rate = static_cast<uint32_t>(clip.sample_rate_hz);

  std::string out;
  out.reserve(64 + data_size);
  out.append("RIFF");
  // fmt(8+16) [+ fact(8+4) for float] + data(8+size)
  const uint32_t riff_size = 4 + 24 + (is_float ? 12 : 0) + 8 + data_size;
  append_u32(out, riff_size);
  out.append("WAVE");
  out.append("fmt ");
  append_u32(out, 16);
  append_u16(out, is_float ? kFormatIeeeFloat : kFormatPcm);
  append_u16(out, 1);  // mono
  append_u32(out, rate);
  append_u32(out, rate * bytes_per_sample);
  append_u16(out, static_cast<uint16_t>(bytes_per_sample));
  append_u16(out, static_cast<uint16_t>(bytes_per_sample * 8));
  if (is_float) {
    out.append("fact");
    append_u32(out, 4);
    append_u32(out, n);
  }
  out.append("data");
  append_u32(out, data_size);

  int64_t clipped = 0;
  if (is_float) {
    for (double s : clip.samples) {
      const float f = static_cast<float>(s);
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      append_u32(out, bits);
    }
  } else {
    for (double s : clip.samples) {
      if (std::abs(s) > 1.0) ++clipped;
      long v = std::lround(s * 32768.0);
      v = std::clamp(v, -32768L, 32767L);
      append_u16(out, static_cast<uint16_t>(static_cast<int16_t>(v)));
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file)
    raise(ErrorKind::kFileNotFound, path + ": cannot open for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) raise(ErrorKind::kDataError, path + ": write failed");
  if (clipped > 0)
    log_warn(path + ": int16 encoding clipped " + std::to_string(clipped) +
             " samples");
  return clipped;
}

const char* to_string(SourceType type) {
  switch (type) {
    case SourceType::kSpeechFg: return "speech_fg";
    case SourceType::kEventFg: return "event_fg";
    case SourceType::kEventBg: return "event_bg";
    case SourceType::kMusicFg: return "music_fg";
    case SourceType::kMusicBg: return "music_bg";
  }
  return "?";
}

SourceType source_type_from_string(const std::string& name) {
  for (SourceType type : kAllSourceTypes)
    if (name == to_string(type)) return type;
  raise(ErrorKind::kDataError, "unknown source_type \"" + name +
                                   "\" (expected one of speech_fg, event_fg, "
                                   "event_bg, music_fg, music_bg)");
}

void SourceCatalog::add(SourceRecord record) {
  if (by_id_.contains(record.id))
    raise(ErrorKind::kDataError, "duplicate record id \"" + record.id + "\"");
  const int idx = static_cast<int>(records_.size());
  by_id_.emplace(record.id, idx);
  index_[static_cast<int>(record.source_type)].push_back(idx);
  records_.push_back(std::move(record));
}

const SourceRecord* SourceCatalog::find(const std::string& id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

SourceCatalog SourceCatalog::load_manifest(const std::string& path,
                                           bool skip_bad) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::kFileNotFound, path + ": cannot open manifest");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();

  SourceCatalog catalog;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const nlohmann::json row = nlohmann::json::parse(line);
      SourceRecord record;
      record.path = row.at("path").get<std::string>();
      record.id = row.value("id", record.path);
      record.source_type =
          source_type_from_string(row.at("source_type").get<std::string>());
      std::filesystem::path file(record.path);
      if (file.is_relative()) file = base / file;
      record.path = file.string();
      if (row.contains("duration_s") && row.contains("sample_rate_hz")) {
        record.duration_s = row.at("duration_s").get<double>();
        record.sample_rate_hz = row.at("sample_rate_hz").get<int32_t>();
      } else {
        const WavInfo info = read_wav_info(record.path);
        record.sample_rate_hz = row.value("sample_rate_hz", info.sample_rate_hz);
        record.duration_s = row.value("duration_s", info.duration_s());
      }
      if (record.duration_s <= 0.0)
        raise(ErrorKind::kDataError, "record \"" + record.id +
                                         "\" has non-positive duration");
      catalog.add(std::move(record));
    } catch (const std::exception& e) {
      const std::string msg =
          path + " line " + std::to_string(line_no) + ": " + e.what();
      if (!skip_bad) raise(ErrorKind::kDataError, msg);
      log_warn("skipping manifest line: " + msg);
      ++catalog.skipped_lines_;
    }
  }
  if (catalog.size() == 0)
    raise(ErrorKind::kDataError, path + ": manifest yielded no records");

  std::string counts;
  for (SourceType type : kAllSourceTypes)
    counts += std::string(to_string(type)) + ":" +
              std::to_string(catalog.count(type)) + " ";
  log_info("loaded " + std::to_string(catalog.size()) + " records (" + counts +
           ")");
  return catalog;
}

}  // namespace gass
