#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace divkit {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: missing files, malformed documents, violated invariants.
/// The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Incremental SHA-256 for hashing larger structures piecewise.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::string_view bytes);
  // Length-prefixed so that ("ab","c") and ("a","bc") hash differently.
  Sha256& field(std::string_view bytes);
  std::string hex();

 private:
  void* ctx_;
};

/// Uniform integer in [0, n) by rejection; portable across standard libraries,
/// unlike std::uniform_int_distribution.
inline std::uint64_t uniform_below(std::mt19937_64& eng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = eng();
    if (r >= threshold) return r % n;
  }
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Number of OpenMP workers used by the parallel kernels. 0 means the runtime
/// default.
void set_jobs(int jobs);
int jobs();

std::string read_file(const std::string& path);
/// Writes via a temporary sibling file and rename, so readers never observe a
/// partial file.
void write_file_atomic(const std::string& path, std::string_view bytes);

}  // namespace divkit

namespace divkit {

/// Selects between an OpenMP kernel and its serial reference.
enum class Execution { serial, parallel };

/// Rank-based quantile binning: item of rank k (ascending value, ties by index)
/// lands in bin floor(k * bins / n); equal values are then pulled down to the
/// lowest bin any of them reached.
std::vector<std::size_t> quantile_bins(std::span<const double> values, std::size_t bins);

}  // namespace divkit
