#pragma once

#include <cstdint>

namespace streamlab {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based generator. Draw number n of the stream keyed by
// (seed, stream, substream) is a pure function of those four values,
// so trials and slots can be replayed or evaluated in any order.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0,
                       std::uint64_t substream = 0)
      : key_(mix64(mix64(mix64(seed) ^ stream) ^ (substream * 0xd1b54a32d192ed03ULL))) {}

  constexpr std::uint64_t at(std::uint64_t counter) const {
    return mix64(key_ ^ mix64(counter));
  }
  // Uniform in [0, 1) with 53 random bits.
  constexpr double uniform_at(std::uint64_t counter) const {
    return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
  }
  constexpr bool bernoulli_at(std::uint64_t counter, double p) const {
    return uniform_at(counter) < p;
  }

  std::uint64_t next() { return at(counter_++); }
  double uniform() { return uniform_at(counter_++); }
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stream tags keep independent uses of one master seed apart.
enum class Stream : std::uint64_t {
  kChannel = 1,
  kCoefficients = 2,
  kMixture = 3,
  kPriority = 4,
  kTilt = 5,
  kBootstrap = 6,
  kTrace = 7,
};

inline constexpr std::uint64_t stream_id(Stream s, std::uint64_t trial) {
  return mix64(static_cast<std::uint64_t>(s) * 0x100000001b3ULL + trial);
}

}  // namespace streamlab
