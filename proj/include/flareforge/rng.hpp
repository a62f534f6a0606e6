#pragma once

#include <cstdint>
#include <random>

namespace flareforge {

// splitmix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stream index for one (pair, slot) combination. Slot 0 is reserved for
// pair-level draws; flares use slots 1..n.
constexpr std::uint64_t stream_id(std::uint64_t pair_index, std::uint64_t slot) noexcept {
  return mix64(mix64(pair_index) ^ (slot * 0xD1B54A32D192ED03ULL));
}

// Deterministic draw sequence keyed by (master_seed, stream_index).
// Only exactly specified operations are used (mt19937_64 and integer bit
// manipulation), so sequences agree across platforms and standard
// libraries. std::uniform_*_distribution is not used.
class SeededRng {
 public:
  SeededRng(std::uint64_t master_seed, std::uint64_t stream_index)
      : master_seed_(master_seed),
        stream_index_(stream_index),
        engine_(mix64(master_seed ^ mix64(stream_index))) {}

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [low, high); returns low when the interval is degenerate.
  double uniform(double low, double high) { return low + (high - low) * uniform01(); }

  // Uniform integer in [low, high] by rejection.
  std::int64_t uniform_int(std::int64_t low, std::int64_t high);

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
};

inline std::int64_t SeededRng::uniform_int(std::int64_t low, std::int64_t high) {
  if (high <= low) return low;
  const std::uint64_t span = static_cast<std::uint64_t>(high - low) + 1;
  if (span == 0) return static_cast<std::int64_t>(next_u64());
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return low + static_cast<std::int64_t>(r % span);
}

}  // namespace flareforge
