#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace pepmc::rng {

/// Philox 4x32-10 keyed counter permutation (Salmon et al., SC 2011).
/// Stateless: one call maps a 128-bit counter and 64-bit key to four
/// 32-bit words. All randomness in the project derives from it.
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        std::uint64_t key);

/// FNV-1a 64-bit hash, used to turn stage names into stream identifiers.
std::uint64_t fnv1a64(std::string_view text);

/// SplitMix64 finalizer; decorrelates small consecutive integers.
std::uint64_t splitmix64(std::uint64_t x);

/// Stream identifier for a (stage, index) substream. Pure function of its
/// arguments; combined with the master seed inside Stream.
std::uint64_t stream_id(std::string_view stage, std::uint64_t index);

/// One independent random substream. A stream is fully determined by
/// (master seed, stage name, index): the seed keys the Philox permutation
/// and the (stage, index) pair selects the high counter words. Streams
/// never share state, so any number of workers may consume disjoint
/// substreams concurrently with results independent of the worker count.
class Stream {
 public:
  Stream(std::uint64_t master_seed, std::string_view stage, std::uint64_t index);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller; the paired draw is cached.
  double normal();
  double normal(double mean, double sigma);

  /// Poisson-distributed count. Exact (product method); large means are
  /// split into partial means that sum to the target.
  std::uint64_t poisson(double mean);

  std::uint64_t master_seed() const noexcept { return master_seed_; }

 private:
  void refill();

  std::uint64_t master_seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffer_pos_ = 4;
  double cached_normal_ = 0.0;
  bool have_cached_normal_ = false;
};

}  // namespace pepmc::rng
