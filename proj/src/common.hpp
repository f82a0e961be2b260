// Copyright 2026 GASS toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef GASS_COMMON_HPP_
#define GASS_COMMON_HPP_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace gass {

inline constexpr const char* kVersion = "0.1.0";

// Uniform guard for logs and divisions: below float32 signal resolution,
// above double underflow.
inline constexpr double kEps = 1e-12;

enum class ErrorKind {
  kInvalidArgument,
  kFileNotFound,
  kMalformedFile,
  kUnsupportedFormat,
  kSilentSource,
  kDataError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Level comes from GASS_LOG (error|warn|info|debug) on first use; default warn.
LogLevel log_level();
void set_log_level(LogLevel level);
void log_msg(LogLevel level, const std::string& msg);

inline void log_error(const std::string& msg) { log_msg(LogLevel::kError, msg); }
inline void log_warn(const std::string& msg) { log_msg(LogLevel::kWarn, msg); }
inline void log_info(const std::string& msg) { log_msg(LogLevel::kInfo, msg); }
inline void log_debug(const std::string& msg) { log_msg(LogLevel::kDebug, msg); }

uint64_t splitmix64(uint64_t x);

// Per-item seed for embarrassingly parallel generation with stable output:
// derive_seed(s, i) = splitmix64(splitmix64(s) ^ splitmix64(i + 1)).
uint64_t derive_seed(uint64_t global_seed, uint64_t index);

// Deterministic RNG. All mappings from raw 64-bit draws are spelled out here
// so sequences are identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // [0, 1), 53-bit resolution
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  // [0, n)
  int64_t uniform_int(int64_t n) {
    const int64_t v = static_cast<int64_t>(uniform() * static_cast<double>(n));
    return v < n ? v : n - 1;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace gass

#endif  // GASS_COMMON_HPP_
