#pragma once

#include <cstdint>

namespace relupgd {

/// SplitMix64 finalizer (Steele, Lea & Flood 2014). Bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent child seed for `index` under `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed + 0x9e3779b97f4a7c15ULL) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Counter-based generator: the k-th draw of stream (seed, stream) is
/// mix64(key + k * golden_gamma), a pure function of (seed, stream, k). Any row, trial or Monte
/// Carlo sample can therefore be regenerated in isolation and parallel fills stay reproducible.
///
/// Normal variates use the Box-Muller transform in its trigonometric form; both outputs of a
/// pair are consumed before advancing.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(derive_seed(seed, stream)) {}

  std::uint64_t next_u64() noexcept {
    return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on the half-open interval (0, 1], 53 bits of resolution.
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound), bound >= 1 (modulo with rejection).
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Standard normal variate.
  double normal() noexcept;

  /// Fair sign in {-1, +1}.
  double sign() noexcept { return (next_u64() >> 63) != 0 ? 1.0 : -1.0; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace relupgd
