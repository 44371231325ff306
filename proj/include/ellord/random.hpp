#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ellord/error.hpp"

namespace ellord {

/// Counter-based deterministic random stream (Philox4x32-10).
///
/// Streams are cheap value types. Two addressing modes create statistically
/// independent children deterministically:
///   - fork()  : stateful, numbered child (advances the parent),
///   - at(i)   : pure, indexed child (the parent is untouched), used to give
///               every sampled row its own stream so results are identical
///               no matter how work is partitioned across workers.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  std::uint32_t next_u32() {
    if (buf_pos_ >= 4) {
      buf_ = block(key_, {lo32(counter_), hi32(counter_), 0u, 0u});
      ++counter_;
      buf_pos_ = 0;
    }
    return buf_[buf_pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t a = next_u32();
    const std::uint64_t b = next_u32();
    return (a << 32) | b;
  }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; never returns 0 (safe under log).
  double uniform_pos() { return 1.0 - uniform(); }

  /// Standard normal (Box-Muller, second value cached).
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  /// Gamma(alpha, 1), alpha > 0 (Marsaglia-Tsang squeeze).
  double gamma(double alpha) {
    if (!(alpha > 0.0)) throw Error(Errc::NonPositiveParameter, "gamma shape must be > 0");
    if (alpha < 1.0) {
      const double boost = std::pow(uniform_pos(), 1.0 / alpha);
      return gamma(alpha + 1.0) * boost;
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Chi-square with k > 0 degrees of freedom (k need not be an integer).
  double chi_square(double k) { return 2.0 * gamma(0.5 * k); }

  /// Numbered child stream; advances this stream's fork counter.
  RandomStream fork() {
    const auto out = block(key_, {lo32(fork_count_), hi32(fork_count_), 0u, 1u});
    ++fork_count_;
    return RandomStream(std::array<std::uint32_t, 2>{out[0], out[1]});
  }

  /// Pure indexed child stream; does not modify this stream.
  RandomStream at(std::uint64_t index) const {
    const auto out = block(key_, {lo32(index), hi32(index), 1u, 1u});
    return RandomStream(std::array<std::uint32_t, 2>{out[0], out[1]});
  }

  /// k numbered children, for deterministic work partitioning.
  std::vector<RandomStream> split(int k) {
    std::vector<RandomStream> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) out.push_back(fork());
    return out;
  }

 private:
  explicit RandomStream(std::array<std::uint32_t, 2> key) : key_(key) {}

  static std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
  static std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 2> key,
                                            std::array<std::uint32_t, 4> ctr) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    std::uint32_t k0 = key[0], k1 = key[1];
    std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c0;
      const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      c0 = hi1 ^ c1 ^ k0;
      c1 = lo1;
      c2 = hi0 ^ c3 ^ k1;
      c3 = lo0;
      k0 += W0;
      k1 += W1;
    }
    return {c0, c1, c2, c3};
  }

  std::array<std::uint32_t, 2> key_{};
  std::uint64_t counter_ = 0;
  std::uint64_t fork_count_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int buf_pos_ = 4;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace ellord
