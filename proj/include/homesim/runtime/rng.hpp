#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace homesim {

/// 64-bit FNV-1a over the bytes of `s`.
std::uint64_t fnv1a64(std::string_view s);

/// SplitMix64 output finalizer (Stafford variant 13 constants).
std::uint64_t mix64(std::uint64_t z);

/// Counter-based pseudo-random stream.
///
/// Draw i of a stream with key k is mix64(k + (i + 1) * 0x9E3779B97F4A7C15),
/// i.e. SplitMix64 evaluated at an explicit counter. Every stream is fully
/// determined by (key, counter); two keys never share state. All derived
/// distributions below are implemented here rather than taken from <random>
/// so that sequences do not depend on the standard library vendor.
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n); n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);  // inclusive
  bool bernoulli(double p);
  /// Standard normal via Box-Muller (two uniforms per draw, no caching).
  double normal(double mean = 0.0, double stddev = 1.0);
  std::uint64_t poisson(double mean);
  /// Marsaglia-Tsang gamma with unit scale.
  double gamma(double shape);
  std::vector<double> dirichlet(std::size_t n, double alpha);
  /// Index drawn proportionally to non-negative weights; weights must not all be 0.
  std::size_t categorical(std::span<const double> weights);

  /// Independent child stream, keyed from this stream's key and `label`.
  RngStream fork(std::string_view label) const;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// Salted stream for one simulation component: key = mix64(seed XOR fnv1a64(salt)).
RngStream derive_stream(std::uint64_t seed, std::string_view salt);

}  // namespace homesim
