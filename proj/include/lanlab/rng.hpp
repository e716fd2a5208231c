#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace lanlab {

/// SplitMix64 finalizer (Stafford variant 13). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Philox4x32-10 block function (Salmon et al., SC'11). For a fixed key it is a
/// bijection of the 128-bit counter.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based random stream.
///
/// The stream identified by (key, index) emits Philox4x32-10 blocks for the
/// counters (index, 0), (index, 1), ...; two streams with the same key and
/// different indices never evaluate the block function on the same counter, so
/// they share no subsequence. Satisfies UniformRandomBitGenerator.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  CounterStream(std::uint64_t key, std::uint64_t index) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;
  /// Standard normal via Box-Muller (one variate per call, no caching).
  double normal() noexcept;
  /// Exponential with unit rate.
  double exponential() noexcept;
  /// Poisson count. Inversion below mean 30, PTRS (Hörmann 1993) above.
  std::int64_t poisson(double mean) noexcept;
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Child stream for nested work units. The child's key is
  /// mix64(key ^ mix64(index + 1)) and its counter block index is `sub`.
  CounterStream derive(std::uint64_t sub) const noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t index() const noexcept { return index_; }

 private:
  void refill() noexcept;

  std::uint64_t key_;
  std::uint64_t index_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

/// Stream for replication `index` of an experiment seeded with `master_seed`.
CounterStream derive_stream(std::uint64_t master_seed, std::uint64_t index) noexcept;

}  // namespace lanlab
