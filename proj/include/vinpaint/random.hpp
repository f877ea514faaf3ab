#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "vinpaint/tensor.hpp"

namespace vinpaint {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Deterministic randomness stream. All state lives in the mt19937_64 engine,
/// so serialize()/deserialize() round-trips reproduce the sequence exactly.
/// The normal generator is a cache-free Box-Muller transform for that reason.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Independent substream for (seed, label, index). Same inputs, same stream.
  static RandomStream derived(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
    std::uint64_t s = seed ^ detail::fnv1a(label);
    s += 0x632be59bd9b4e019ULL * (index + 1);
    std::uint64_t sub = detail::splitmix64(s);
    return RandomStream(sub);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [lo, hi], both inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next_u64());  // full 64-bit range
    const std::uint64_t reject_below = (0 - span) % span;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= reject_below) return lo + static_cast<std::int64_t>(r % span);
    }
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal draw.
  double normal() {
    // u1 in (0, 1] so the log is finite; the paired sin variate is discarded
    // to keep the stream state equal to the engine state.
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  static RandomStream deserialize(const std::string& text) {
    RandomStream rs(0);
    std::istringstream is(text);
    is >> rs.engine_;
    if (is.fail()) throw std::runtime_error("RandomStream: invalid serialized state");
    return rs;
  }

  bool operator==(const RandomStream& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

template <typename Scalar>
void fill_normal(Tensor4<Scalar>& t, RandomStream& rng) {
  Scalar* p = t.data();
  const long n = t.size();
  for (long i = 0; i < n; ++i) p[i] = static_cast<Scalar>(rng.normal());
}

template <typename Scalar>
Tensor4<Scalar> normal_like(const Tensor4<Scalar>& shape_of, RandomStream& rng) {
  Tensor4<Scalar> t(shape_of.frames(), shape_of.height(), shape_of.width(), shape_of.channels());
  fill_normal(t, rng);
  return t;
}

}  // namespace vinpaint
