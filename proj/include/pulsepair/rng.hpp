#pragma once

// Counter-derived random substreams. Every consumer of randomness derives its
// engine from (seed, stream, index), so work split across threads or blocks
// reproduces the serial result exactly.
//
// The distribution helpers are written against the raw engine output rather
// than <random> distributions, whose algorithms differ between standard
// libraries; golden digests depend on this.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace pulsepair::rng {

using Engine = std::mt19937_64;

enum class Stream : std::uint64_t {
  BackgroundEvents = 1,
  IqNoise = 2,
  Coincidence = 3,
  ComponentBase = 1000,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

inline Engine substream(std::uint64_t seed, Stream stream, std::uint64_t index, std::uint64_t offset = 0) {
  return Engine(substream_seed(seed, static_cast<std::uint64_t>(stream) + offset, index));
}

// [0, 1)
inline double uniform01(Engine& e) { return static_cast<double>(e() >> 11) * 0x1.0p-53; }

// (0, 1]
inline double uniform_open0(Engine& e) { return 1.0 - uniform01(e); }

inline double exponential(Engine& e) { return -std::log(uniform_open0(e)); }

// Circular complex Gaussian with E|z|^2 = variance.
inline std::complex<double> complex_normal(Engine& e, double variance) {
  const double r = std::sqrt(variance * exponential(e));
  const double phi = 2.0 * std::numbers::pi * uniform01(e);
  return {r * std::cos(phi), r * std::sin(phi)};
}

inline double normal(Engine& e) {
  const double r = std::sqrt(2.0 * exponential(e));
  return r * std::cos(2.0 * std::numbers::pi * uniform01(e));
}

// Number of failures before the next success of a Bernoulli(rate) sequence.
// log1p_neg_rate is log(1 - rate), precomputed by the caller.
inline std::uint64_t geometric_skip(Engine& e, double log1p_neg_rate) {
  const double g = std::floor(std::log(uniform_open0(e)) / log1p_neg_rate);
  if (!(g < 1.8e19)) return UINT64_MAX;
  return static_cast<std::uint64_t>(g);
}

}  // namespace pulsepair::rng
