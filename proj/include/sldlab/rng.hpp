#pragma once

#include <cstdint>
#include <limits>

namespace sldlab {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Order-sensitive hash of two words; used to derive stream keys and cell
/// seeds.
constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(a + 0x9e3779b97f4a7c15ULL) ^ (b + 0x632be59bd9b4e019ULL));
}

/// Role tags that separate the independent random streams drawn from one
/// seed.
enum class StreamRole : std::uint64_t {
  Basis = 0x6261736973ULL,
  Signal = 0x7369676e616cULL,
  Noise = 0x6e6f697365ULL,
  TestSignal = 0x747369676eULL,
  TestNoise = 0x746e6f6973ULL,
  Perturbation = 0x7065727475ULL,
};

constexpr std::uint64_t stream_key(std::uint64_t seed, StreamRole role) noexcept {
  return hash_combine(seed, static_cast<std::uint64_t>(role));
}

/// Counter-based generator: the i-th output is a pure function of (key, i),
/// so streams are reproducible and can be split by hashing the key.
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform in (0, 1]; never returns zero so it is safe under log().
  double uniform_open_closed() noexcept;

  /// Standard normal via Box-Muller; the second variate of each pair is
  /// cached.
  double normal() noexcept;

  /// Independent child stream.
  CounterRng split(std::uint64_t tag) const noexcept {
    return CounterRng(hash_combine(key_, tag));
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace sldlab
