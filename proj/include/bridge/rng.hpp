#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace bridge {

// All randomness in the library flows through explicitly seeded mt19937_64
// streams derived with a counter-based keyed split: (master_seed, seed_index,
// component_label) -> independent stream.  Same inputs always give the same
// stream; different labels or indices give unrelated streams.
using Rng = std::mt19937_64;

// splitmix64 finalizer; good avalanche, used to mix the key material.
std::uint64_t splitmix64(std::uint64_t x);

// FNV-1a over the label bytes.
std::uint64_t hash_label(const std::string& label);

Rng seed_stream(std::uint64_t master_seed, std::uint64_t seed_index,
                const std::string& component_label);

// Uniform draw in [0,1).
double uniform01(Rng& rng);

// Sample an index from an unnormalized nonnegative weight row of length n.
int sample_index(const double* weights, int n, Rng& rng);

int sample_index(const std::vector<double>& weights, Rng& rng);

}  // namespace bridge
