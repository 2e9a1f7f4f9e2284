// Deterministic seed derivation: independent substreams per (seed, level, purpose).
#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace gfe::rng {

// splitmix64 finalizer; decorrelates structured seed words.
inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/** Fold a list of seed words into one 64-bit stream key (order-sensitive). */
inline std::uint64_t derive(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;  // arbitrary non-zero start
  for (std::uint64_t w : words) h = mix(h ^ w);
  return h;
}

// Disjoint purposes keep substreams of one field independent of each other.
enum class Purpose : std::uint64_t {
  level_noise = 1,   // per-level Gaussian arrays (MBRW, BRW)
  spectral_noise = 2,// sine-basis coefficients (spectral GFF)
  dense_noise = 3,   // iid vector behind the dense Cholesky sampler
  walk = 4,          // Monte Carlo random walks (green oracle)
  compare = 5,       // comparison-module Monte Carlo
  scratch = 6,       // test-local draws
};

/** Engine for a (field seed, level, purpose) substream. */
inline std::mt19937_64 stream(std::uint64_t seed, int level, Purpose purpose) {
  std::uint64_t key = derive({seed, static_cast<std::uint64_t>(purpose),
                              static_cast<std::uint64_t>(static_cast<std::int64_t>(level))});
  std::seed_seq seq{static_cast<unsigned>(key & 0xffffffffu),
                    static_cast<unsigned>(key >> 32),
                    static_cast<unsigned>(mix(key) & 0xffffffffu),
                    static_cast<unsigned>(mix(key) >> 32)};
  return std::mt19937_64(seq);
}

/** Field seed for one replicate of an experiment. */
inline std::uint64_t field_seed(std::uint64_t master, std::uint64_t kind, int N,
                                std::uint64_t replicate) {
  return derive({master, kind, static_cast<std::uint64_t>(N), replicate});
}

}  // namespace gfe::rng
