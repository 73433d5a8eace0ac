#pragma once

// Philox4x32-10 counter-based generator.  Draw streams are keyed by
// (seed, replica, stream tag), so replicas can be scheduled on any number of
// workers and still produce byte-identical results, and distinct purposes
// (noise, probe directions, moment estimation, ...) never share a stream.

#include "concfield/linalg.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace concfield {

[[nodiscard]] inline std::array<std::uint32_t, 4> philox4x32(
    std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

// Reserved stream tags.  Adding a purpose means adding a tag, never reusing.
enum class StreamTag : std::uint32_t {
  kNoise = 1,
  kDirections = 2,
  kProbes = 3,
  kMoments = 4,
  kCalibration = 5,
  kInstances = 6,
};

// Sequential double/gaussian stream over one (seed, replica, tag) key.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t replica, StreamTag tag)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        ctr_{static_cast<std::uint32_t>(replica),
             static_cast<std::uint32_t>(replica >> 32),
             static_cast<std::uint32_t>(tag), 0} {}

  // Uniform on the open interval (0, 1) with 53 usable bits.
  [[nodiscard]] double next_uniform() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the Box-Muller pair; the second value is cached.
  [[nodiscard]] double next_gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    have_cached_ = true;
    return radius * std::cos(angle);
  }

  [[nodiscard]] Vector next_gaussian_vector(int p) {
    Vector v(p);
    for (int i = 0; i < p; ++i) v[i] = next_gaussian();
    return v;
  }

  // Symmetrized i.i.d. gaussian matrix: (E + E^T)/2 with E entries N(0, s^2).
  [[nodiscard]] Matrix next_gaussian_symmetric(int p, double scale) {
    Matrix e(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) e(i, j) = scale * next_gaussian();
    return (e + e.transpose()) / 2.0;
  }

 private:
  [[nodiscard]] std::uint32_t next_u32() {
    if (have_words_ == 0) {
      block_ = philox4x32(ctr_, key_);
      ++ctr_[3];
      have_words_ = 4;
    }
    return block_[4 - have_words_--];
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> block_{};
  int have_words_ = 0;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace concfield
