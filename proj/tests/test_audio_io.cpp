// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "audio_io.hpp"
#include "common.hpp"
#include "fixture_corpus.hpp"

using namespace gass;
namespace fs = std::filesystem;

namespace {

AudioClip make_clip(std::vector<double> samples, int32_t rate = 16000) {
  AudioClip clip;
  clip.samples = std::move(samples);
  clip.sample_rate_hz = rate;
  return clip;
}

}  // namespace

TEST_CASE("float32 wav round trip is bit exact") {
  const std::string dir = testing::make_temp_dir("wav_rt");
  Rng rng(1234);
  for (int trial = 0; trial < 20; ++trial) {
    AudioClip clip;
    clip.sample_rate_hz = 8000 + 1000 * trial;
    const int64_t n = 1 + rng.uniform_int(5000);
    clip.samples.resize(n);
    for (double& s : clip.samples) {
      // arbitrary finite float32 values, including odd magnitudes
      s = static_cast<double>(
          static_cast<float>(rng.uniform(-4.0, 4.0) *
                             std::pow(10.0, rng.uniform(-6.0, 1.0))));
    }
    const std::string path = dir + "/rt_" + std::to_string(trial) + ".wav";
    const int64_t clipped = write_wav(path, clip, WavEncoding::kFloat32);
    CHECK(clipped == 0);
    const AudioClip back = read_wav(path);
    REQUIRE(back.length() == clip.length());
    CHECK(back.sample_rate_hz == clip.sample_rate_hz);
    for (int64_t i = 0; i < clip.length(); ++i)
      CHECK(back.samples[i] == clip.samples[i]);
  }
}

TEST_CASE("simple float32 values survive the round trip") {
  const std::string dir = testing::make_temp_dir("wav_simple");
  const AudioClip clip = make_clip({0.5, -0.25});
  write_wav(dir + "/simple.wav", clip);
  const AudioClip back = read_wav(dir + "/simple.wav");
  REQUIRE(back.length() == 2);
  CHECK(back.samples[0] == 0.5);
  CHECK(back.samples[1] == -0.25);
}

TEST_CASE("all-zero clip round trips exactly") {
  const std::string dir = testing::make_temp_dir("wav_zero");
  const AudioClip clip = make_clip(std::vector<double>(128, 0.0));
  write_wav(dir + "/zeros.wav", clip);
  const AudioClip back = read_wav(dir + "/zeros.wav");
  REQUIRE(back.length() == 128);
  for (double s : back.samples) CHECK(s == 0.0);
}

TEST_CASE("stereo down-mix is the channel mean") {
  const std::string dir = testing::make_temp_dir("wav_downmix");

  SUBCASE("opposite channels cancel to zero") {
    std::vector<double> interleaved;
    for (int i = 0; i < 64; ++i) {
      interleaved.push_back(1.0);
      interleaved.push_back(-1.0);
    }
    testing::write_wav_raw(dir + "/opposite.wav", 16000, 2, interleaved,
                           "float32");
    const AudioClip mono = read_wav(dir + "/opposite.wav");
    REQUIRE(mono.length() == 64);
    for (double s : mono.samples) CHECK(s == 0.0);
  }

  SUBCASE("down-mix equals mean of split channels, sample-exact") {
    Rng rng(77);
    std::vector<double> left(200), right(200), interleaved;
    for (int i = 0; i < 200; ++i) {
      left[i] = static_cast<float>(rng.uniform(-0.9, 0.9));
      right[i] = static_cast<float>(rng.uniform(-0.9, 0.9));
      interleaved.push_back(left[i]);
      interleaved.push_back(right[i]);
    }
    testing::write_wav_raw(dir + "/stereo.wav", 22050, 2, interleaved,
                           "float32");
    testing::write_wav_raw(dir + "/left.wav", 22050, 1, left, "float32");
    testing::write_wav_raw(dir + "/right.wav", 22050, 1, right, "float32");
    const AudioClip mixed = read_wav(dir + "/stereo.wav");
    const AudioClip l = read_wav(dir + "/left.wav");
    const AudioClip r = read_wav(dir + "/right.wav");
    for (int i = 0; i < 200; ++i)
      CHECK(mixed.samples[i] == (l.samples[i] + r.samples[i]) / 2.0);
  }
}

TEST_CASE("int16 scaling and clipping") {
  const std::string dir = testing::make_temp_dir("wav_int16");

  SUBCASE("-32768 reads as -1.0") {
    std::vector<double> samples = {-1.0, 1.0, 0.0};
    testing::write_wav_raw(dir + "/ext.wav", 8000, 1, samples, "int16");
    const AudioClip clip = read_wav(dir + "/ext.wav");
    CHECK(clip.samples[0] == -1.0);
    CHECK(clip.samples[1] == doctest::Approx(32767.0 / 32768.0));
    CHECK(clip.samples[2] == 0.0);
  }

  SUBCASE("out-of-range samples clip with a count") {
    const AudioClip clip = make_clip({1.5, 0.5, -2.0});
    const int64_t clipped =
        write_wav(dir + "/clip.wav", clip, WavEncoding::kInt16);
    CHECK(clipped == 2);
    const AudioClip back = read_wav(dir + "/clip.wav");
    CHECK(back.samples[0] == doctest::Approx(32767.0 / 32768.0));
    CHECK(back.samples[2] == -1.0);
  }

  SUBCASE("int16 write/read/write is stable") {
    const AudioClip clip = make_clip({0.25, -0.125, 0.8125});
    write_wav(dir + "/a.wav", clip, WavEncoding::kInt16);
    const AudioClip once = read_wav(dir + "/a.wav");
    write_wav(dir + "/b.wav", once, WavEncoding::kInt16);
    const AudioClip twice = read_wav(dir + "/b.wav");
    for (int i = 0; i < 3; ++i) CHECK(once.samples[i] == twice.samples[i]);
  }
}

TEST_CASE("a 3 s 16 kHz mono file reads back with the right shape") {
  const std::string dir = testing::make_temp_dir("wav_shape");
  AudioClip clip;
  clip.sample_rate_hz = 16000;
  clip.samples.resize(48000);
  for (size_t i = 0; i < clip.samples.size(); ++i)
    clip.samples[i] = std::sin(0.01 * static_cast<double>(i));
  write_wav(dir + "/tone.wav", clip);
  const AudioClip back = read_wav(dir + "/tone.wav");
  CHECK(back.length() == 48000);
  CHECK(back.sample_rate_hz == 16000);
  CHECK(back.duration_s() == doctest::Approx(3.0));
}

TEST_CASE("24-bit PCM reads and scales") {
  const std::string dir = testing::make_temp_dir("wav_24");
  std::vector<double> samples = {0.5, -0.5, 0.0, 1.0 - 1.0 / 8388608.0};
  testing::write_wav_raw(dir + "/s24.wav", 44100, 1, samples, "int24");
  const AudioClip clip = read_wav(dir + "/s24.wav");
  REQUIRE(clip.length() == 4);
  for (int i = 0; i < 4; ++i)
    CHECK(clip.samples[i] == doctest::Approx(samples[i]).epsilon(1e-6));
}

TEST_CASE("reader reports distinct error kinds") {
  const std::string dir = testing::make_temp_dir("wav_err");

  SUBCASE("missing file") {
    try {
      read_wav(dir + "/nope.wav");
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kFileNotFound);
    }
  }

  SUBCASE("malformed header") {
    std::ofstream bad(dir + "/bad.wav", std::ios::binary);
    bad << "not a riff file at all";
    bad.close();
    try {
      read_wav(dir + "/bad.wav");
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kMalformedFile);
    }
  }

  SUBCASE("unsupported encoding") {
    // 8-bit PCM is outside the supported set.
    std::string out;
    out.append("RIFF");
    const auto u32 = [&](uint32_t v) {
      for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
    };
    const auto u16 = [&](uint16_t v) {
      out.push_back(static_cast<char>(v & 0xFF));
      out.push_back(static_cast<char>(v >> 8));
    };
    u32(36 + 4);
    out.append("WAVE");
    out.append("fmt ");
    u32(16);
    u16(1);     // pcm
    u16(1);     // mono
    u32(8000);  // rate
    u32(8000);
    u16(1);
    u16(8);  // 8-bit
    out.append("data");
    u32(4);
    out.append("\x01\x02\x03\x04", 4);
    std::ofstream file(dir + "/u8.wav", std::ios::binary);
    file << out;
    file.close();
    try {
      read_wav(dir + "/u8.wav");
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kUnsupportedFormat);
    }
  }
}

TEST_CASE("manifest loading") {
  const std::string dir = testing::make_temp_dir("manifest");
  const std::string corpus_dir = dir + "/corpus";
  const std::string manifest = testing::make_fixture_corpus(corpus_dir);

  SUBCASE("bundled fixture corpus has the documented per-type counts") {
    const SourceCatalog catalog = SourceCatalog::load_manifest(manifest);
    CHECK(catalog.size() == 25);
    CHECK(catalog.count(SourceType::kSpeechFg) == 10);
    CHECK(catalog.count(SourceType::kEventFg) == 6);
    CHECK(catalog.count(SourceType::kEventBg) == 4);
    CHECK(catalog.count(SourceType::kMusicFg) == 3);
    CHECK(catalog.count(SourceType::kMusicBg) == 2);
    for (const SourceRecord& record : catalog.records()) {
      CHECK(record.duration_s > 0.0);
      CHECK(record.sample_rate_hz > 0);
    }
  }

  SUBCASE("one record per type makes five buckets of one") {
    const std::string small = dir + "/small.jsonl";
    std::ofstream out(small);
    int i = 0;
    for (SourceType type : kAllSourceTypes) {
      const std::string wav = dir + "/t" + std::to_string(i++) + ".wav";
      testing::write_wav_raw(wav, 8000, 1, std::vector<double>(800, 0.25),
                             "int16");
      out << "{\"path\": \"" << wav << "\", \"source_type\": \""
          << to_string(type) << "\"}\n";
    }
    out.close();
    const SourceCatalog catalog = SourceCatalog::load_manifest(small);
    CHECK(catalog.size() == 5);
    for (SourceType type : kAllSourceTypes) CHECK(catalog.count(type) == 1);
  }

  SUBCASE("unknown source_type names the offending line") {
    const std::string bad = dir + "/bad.jsonl";
    std::ofstream out(bad);
    out << "{\"path\": \"x.wav\", \"source_type\": \"speech\", "
           "\"duration_s\": 1, \"sample_rate_hz\": 8000}\n";
    out.close();
    try {
      SourceCatalog::load_manifest(bad);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kDataError);
      CHECK(std::string(e.what()).find("line 1") != std::string::npos);
      CHECK(std::string(e.what()).find("speech") != std::string::npos);
    }
  }

  SUBCASE("duplicate ids abort") {
    const std::string dup = dir + "/dup.jsonl";
    std::ofstream out(dup);
    for (int i = 0; i < 2; ++i)
      out << "{\"id\": \"same\", \"path\": \"x.wav\", \"source_type\": "
             "\"event_fg\", \"duration_s\": 1, \"sample_rate_hz\": 8000}\n";
    out.close();
    CHECK_THROWS_AS(SourceCatalog::load_manifest(dup), Error);
  }

  SUBCASE("skip-bad counts and continues") {
    const std::string mixed = dir + "/mixed.jsonl";
    std::ofstream out(mixed);
    out << "this is not json\n";
    out << "{\"path\": \"ok.wav\", \"source_type\": \"event_fg\", "
           "\"duration_s\": 1, \"sample_rate_hz\": 8000}\n";
    out.close();
    CHECK_THROWS_AS(SourceCatalog::load_manifest(mixed, false), Error);
    const SourceCatalog catalog = SourceCatalog::load_manifest(mixed, true);
    CHECK(catalog.size() == 1);
    CHECK(catalog.skipped_lines() == 1);
  }

  SUBCASE("per-type counts are order independent") {
    std::ifstream in(manifest);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) lines.push_back(line);
    std::reverse(lines.begin(), lines.end());
    const std::string reversed = corpus_dir + "/manifest_rev.jsonl";
    std::ofstream out(reversed);
    for (const std::string& l : lines) out << l << "\n";
    out.close();
    const SourceCatalog a = SourceCatalog::load_manifest(manifest);
    const SourceCatalog b = SourceCatalog::load_manifest(reversed);
    for (SourceType type : kAllSourceTypes)
      CHECK(a.count(type) == b.count(type));
  }
}
