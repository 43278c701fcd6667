#pragma once

#include <cmath>
#include <cstdint>

#include <boost/random/exponential_distribution.hpp>

namespace asep {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t replica_seed(std::uint64_t base, std::uint64_t replica) {
  return hash_combine(hash_combine(base, 0x7265706c6963ULL), replica);
}

// Counter based stream: the i-th draw depends only on (key, i).
// Also a UniformRandomBitGenerator, so library distributions can consume it.
class Stream {
 public:
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }
  result_type operator()() { return next_u64(); }

  Stream() = default;
  explicit Stream(std::uint64_t key) : key_(mix64(key)) {}
  Stream(std::uint64_t seed, std::uint64_t tag) : key_(hash_combine(seed, tag)) {}

  std::uint64_t next_u64() { return mix64(key_ + 0xd1b54a32d192ed03ULL * ++counter_); }
  // uniform on the open interval (0,1)
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }
  // ziggurat; several times faster than -log(u)
  double exponential(double rate) {
    return boost::random::exponential_distribution<double>(rate)(*this);
  }
  bool bernoulli(double p) { return uniform() < p; }
  // integer uniform in [0, n)
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace asep
