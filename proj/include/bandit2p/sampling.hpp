#pragma once

#include <cmath>
#include <cstdint>

#include "bandit2p/errors.hpp"
#include "bandit2p/vec.hpp"

namespace bandit2p {

// PCG64 XSL-RR. Each (seed, stream) pair selects an independent sequence;
// distinct streams use distinct LCG increments, so parallel runs never
// share state.
class Pcg64 {
 public:
  using result_type = std::uint64_t;

  Pcg64(std::uint64_t seed, std::uint64_t stream) {
    inc_ = (static_cast<u128>(stream) << 1) | 1u;
    state_ = 0;
    step();
    state_ += (static_cast<u128>(seed) << 64) | splitmix(seed ^ (stream * 0x9e3779b97f4a7c15ULL));
    step();
  }

  result_type operator()() {
    const u128 s = state_;
    step();
    const auto xored = static_cast<std::uint64_t>(s >> 64) ^ static_cast<std::uint64_t>(s);
    const auto rot = static_cast<unsigned>(s >> 122);
    return rotr(xored, rot);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }

 private:
  using u128 = unsigned __int128;

  static constexpr u128 kMult = (static_cast<u128>(2549297995355413924ULL) << 64) |
                                4865540595714422341ULL;

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  static std::uint64_t rotr(std::uint64_t v, unsigned r) {
    return (v >> r) | (v << ((64u - r) & 63u));
  }

  void step() { state_ = state_ * kMult + inc_; }

  u128 state_{};
  u128 inc_{};
};

// Seedable random source for one run. Single-owner: use distinct stream_ids
// for concurrent work.
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), gen_(seed, stream_id) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via the Marsaglia polar method.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double a, b, s;
    do {
      a = 2.0 * uniform() - 1.0;
      b = 2.0 * uniform() - 1.0;
      s = a * a + b * b;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = b * f;
    has_spare_ = true;
    return a * f;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  Pcg64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Uniform sample on S^{d-1}: normalized standard Gaussian vector.
// The renormalization is forced so callers may rely on the unit norm.
inline Vec sample_sphere(RandomSource& src, std::size_t d) {
  if (d == 0) throw ParameterError("sample_sphere: d must be >= 1");
  Vec u(d);
  double n;
  do {
    for (double& v : u) v = src.gaussian();
    n = norm(u);
  } while (n == 0.0);  // probability zero, guarded anyway
  for (double& v : u) v /= n;
  return u;
}

// Uniform sample in the unit ball: sphere direction scaled by U^{1/d}.
inline Vec sample_ball(RandomSource& src, std::size_t d) {
  if (d == 0) throw ParameterError("sample_ball: d must be >= 1");
  Vec v = sample_sphere(src, d);
  const double radius = std::pow(src.uniform(), 1.0 / static_cast<double>(d));
  for (double& x : v) x *= radius;
  return v;
}

}  // namespace bandit2p
