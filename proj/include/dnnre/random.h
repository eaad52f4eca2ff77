#ifndef DNNRE_RANDOM_H_
#define DNNRE_RANDOM_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace dnnre {

// All randomness in the project goes through this engine. The distribution
// helpers below are written out instead of using <random> distributions so
// that streams are identical across standard library implementations.
using Rng = std::mt19937_64;

// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Seed for a named subsystem derived from the run's base seed.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

// Uniform double in [lo, hi).
double uniform(Rng& rng, double lo, double hi);

// Uniform integer in [0, n). Requires n > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

// Uniform integer in [lo, hi] (inclusive).
long uniform_int(Rng& rng, long lo, long hi);

bool bernoulli(Rng& rng, double p);

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

std::string serialize_rng(const Rng& rng);
Rng deserialize_rng(const std::string& state);

}  // namespace dnnre

#endif  // DNNRE_RANDOM_H_
