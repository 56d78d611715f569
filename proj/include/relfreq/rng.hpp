#pragma once

#include <cstdint>
#include <string_view>

namespace relfreq {

// splitmix64 (Steele/Lea/Flood 2014), counter-based: the state advances by a
// fixed odd gamma and the output is a bijective finalizer of the counter.
// Pure 64-bit integer arithmetic, so streams are bit-identical across
// platforms, and independent substreams derive from (master_seed, index)
// without sharing state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr std::string_view name() { return "splitmix64-1.0"; }

  // Substream for one unit of work (e.g. one trial): seeds a fresh generator
  // from the finalizer-mixed pair, so any execution order yields the same draws.
  static SplitMix64 stream(std::uint64_t master_seed, std::uint64_t stream_index) {
    return SplitMix64(mix(master_seed ^ mix(stream_index + 0x9e3779b97f4a7c15ULL)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform on [0,1), 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  std::uint64_t state() const { return state_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace relfreq
