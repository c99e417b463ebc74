#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spearlab {

// 64-bit FNV-1a. Used for content-derived document ids, feature hashing
// seeds and manifest chaining; not a cryptographic hash.
uint64_t fnv1a(std::string_view data, uint64_t seed = 0xcbf29ce484222325ull);

std::string to_hex(uint64_t v);

/// CRLF and bare CR become LF.
std::string normalize_lf(std::string_view s);

/// FNV-1a over the LF-normalized input, as 16 hex chars.
std::string content_hash(std::string_view data);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view data);

std::string trim(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

// SplitMix64. All randomness in the project goes through this so that runs
// are reproducible regardless of the standard library's distributions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, n). n must be > 0.
  uint64_t bounded(uint64_t n) { return next() % n; }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

/// Fixed-precision decimal formatting (no locale).
std::string format_double(double v, int decimals);

}  // namespace spearlab
