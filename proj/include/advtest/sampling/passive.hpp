#pragma once

// Passive samplers: proposals depend only on the seed or the call index.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "advtest/error.hpp"
#include "advtest/rng.hpp"
#include "advtest/scenario/interpreter.hpp"

namespace advtest::sampling {

using scenario::SamplePoint;

/// i.i.d. uniform coordinates on [0,1).
inline SamplePoint random_next(std::size_t dims, Rng& rng) {
  SamplePoint p;
  p.coords.resize(dims);
  for (auto& c : p.coords) c = rng.uniform();
  return p;
}

inline std::uint64_t grid_size(std::uint64_t resolution, std::size_t dims) {
  std::uint64_t n = 1;
  for (std::size_t i = 0; i < dims; ++i) {
    if (n > UINT64_MAX / resolution) return UINT64_MAX;
    n *= resolution;
  }
  return n;
}

/// k-th cell centre of the row-major lattice with `resolution` cells per axis;
/// the last dimension varies fastest.
inline SamplePoint grid_next(std::size_t dims, std::uint64_t resolution, std::uint64_t k) {
  if (resolution == 0) throw Error("grid resolution must be at least 1");
  if (k >= grid_size(resolution, dims)) throw Error("grid index " + std::to_string(k) + " out of range");
  SamplePoint p;
  p.coords.resize(dims);
  for (std::size_t i = dims; i-- > 0;) {
    const std::uint64_t j = k % resolution;
    k /= resolution;
    p.coords[i] = (static_cast<double>(j) + 0.5) / static_cast<double>(resolution);
  }
  return p;
}

/// Van der Corput digit reversal of n in base b. The reversed digits are
/// accumulated as an integer over b^k and divided once, so the result is the
/// correctly rounded fraction whenever both fit in 53 bits.
inline double radical_inverse(std::uint64_t n, std::uint64_t base) {
  if (base < 2) throw Error("radical inverse base must be at least 2");
  std::uint64_t reversed = 0, denom = 1;
  while (n > 0 && denom <= UINT64_MAX / base) {
    reversed = reversed * base + n % base;
    denom *= base;
    n /= base;
  }
  const double tail = n > 0 ? radical_inverse(n, base) : 0.0;
  return (static_cast<double>(reversed) + tail) / static_cast<double>(denom);
}

/// First `count` primes, by trial division.
inline std::vector<std::uint64_t> first_primes(std::size_t count) {
  std::vector<std::uint64_t> primes;
  for (std::uint64_t c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (auto p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

/// Halton point n >= 1; dimension i uses the i-th prime as base.
inline SamplePoint halton_next(std::size_t dims, std::uint64_t n) {
  if (n < 1) throw Error("halton index starts at 1");
  static const std::vector<std::uint64_t> primes = first_primes(64);
  if (dims > primes.size()) throw Error("halton sampler supports at most 64 dimensions");
  SamplePoint p;
  p.coords.resize(dims);
  for (std::size_t i = 0; i < dims; ++i) p.coords[i] = radical_inverse(n, primes[i]);
  return p;
}

}  // namespace advtest::sampling
