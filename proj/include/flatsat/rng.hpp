#pragma once

// Counter-based randomness: every draw is a pure function of (seed, key words),
// so results do not depend on enumeration order or thread count.

#include <cstdint>
#include <initializer_list>
#include <span>

#include "flatsat/rational.hpp"

namespace flatsat {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class KeyHasher {
 public:
  explicit constexpr KeyHasher(std::uint64_t seed) : h_(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  constexpr KeyHasher& mix(std::uint64_t w) {
    h_ = splitmix64(h_ ^ splitmix64(w + 0x632be59bd9b4e019ULL * (++n_)));
    return *this;
  }
  template <class T>
  KeyHasher& mix_all(std::span<const T> ws) {
    mix(ws.size());
    for (auto w : ws) mix(static_cast<std::uint64_t>(w));
    return *this;
  }
  constexpr std::uint64_t value() const { return splitmix64(h_); }

 private:
  std::uint64_t h_;
  std::uint64_t n_ = 0;
};

// Bernoulli(p) decided by comparing a 64-bit uniform against floor(p * 2^64).
class Bernoulli {
 public:
  explicit Bernoulli(const Rational& p) {
    if (p < 0) fail(ErrorKind::ProbabilityOverflow, "negative probability " + to_string(p));
    if (p > 1) fail(ErrorKind::ProbabilityOverflow, "probability " + to_string(p) + " exceeds 1");
    if (p == 1) {
      always_ = true;
    } else {
      BigInt t = boost::multiprecision::numerator(p) * (BigInt(1) << 64) / boost::multiprecision::denominator(p);
      threshold_ = static_cast<std::uint64_t>(t);
    }
  }
  bool operator()(std::uint64_t uniform) const { return always_ || uniform < threshold_; }

 private:
  bool always_ = false;
  std::uint64_t threshold_ = 0;
};

// Sequential stream derived from a key; used for sampling loops.
class CounterRng {
 public:
  using result_type = std::uint64_t;
  explicit CounterRng(std::uint64_t key) : key_(key) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return splitmix64(key_ ^ splitmix64(++ctr_)); }
  std::uint64_t below(std::uint64_t n) {
    // rejection sampling to stay unbiased
    std::uint64_t lim = max() - max() % n;
    for (;;) {
      auto v = (*this)();
      if (v < lim) return v % n;
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace flatsat
