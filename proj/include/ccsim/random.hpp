#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ccsim {

/// 64-bit finalizer used for seed derivation (splitmix64 output function).
std::uint64_t mix64(std::uint64_t x);

/// Stable 64-bit hash of a string (FNV-1a folded through mix64).
std::uint64_t hash_string(std::string_view text);

/// Derives an independent seed for a named sub-stream of a run.
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream_name);

/// Seeded random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The std:: distribution adaptors are not (their algorithms are
/// implementation-defined), so the variates below are computed here to keep
/// traces and runs byte-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t base, std::string_view stream_name) : engine_(derive_seed(base, stream_name)) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in (0, 1].
  double uniform_open_below() { return 1.0 - uniform(); }
  double exponential(double rate);
  double normal(double mean, double stddev);
  /// Gamma(shape, scale) via Marsaglia-Tsang, with the u^(1/k) boost for k < 1.
  double gamma(double shape, double scale);

 private:
  double standard_normal();

  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ccsim
