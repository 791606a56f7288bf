#pragma once

#include <cstdint>

namespace seqchan {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream keyed by (seed, hypothesis, trial). Draw k depends only
/// on the key and k, so streams are independent of scheduling.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t hypothesis, std::uint64_t trial)
      : key_(splitmix64(splitmix64(splitmix64(seed) ^ hypothesis) ^ trial)) {}

  std::uint64_t next() { return splitmix64(key_ ^ splitmix64(++counter_)); }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace seqchan
