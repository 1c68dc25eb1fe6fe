#pragma once

#include <cstdint>
#include <string_view>

namespace embscore {

// Counter-based generator. The n-th draw of substream (seed, stream) is
//
//   key   = mix64(seed ^ mix64(stream + 0x9E3779B97F4A7C15))
//   x_n   = mix64(key + (n + 1) * 0x9E3779B97F4A7C15)
//
// where mix64 is the SplitMix64 finalizer. Every draw is a pure function of
// (seed, stream, n), so work split across threads by stream index
// reproduces bit-for-bit regardless of scheduling.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t NextU64();

  // Uniform in [0, 1) with 53 bits of precision.
  double NextDouble();

  // Uniform integer in [0, bound); bound must be positive. Uses rejection
  // sampling so the result is unbiased.
  std::uint64_t NextBelow(std::uint64_t bound);

  // Standard normal via Box-Muller (the spare value is discarded).
  double NextGaussian();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t Mix64(std::uint64_t x);

// 64-bit FNV-1a, used for stable content fingerprints and hashed vectors.
std::uint64_t Fnv1a64(std::string_view bytes);

}  // namespace embscore
