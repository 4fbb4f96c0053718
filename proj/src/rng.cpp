#include "bridge/rng.hpp"

#include <stdexcept>

namespace bridge {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_label(const std::string& label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng seed_stream(std::uint64_t master_seed, std::uint64_t seed_index,
                const std::string& component_label) {
  std::uint64_t k = splitmix64(master_seed);
  k = splitmix64(k ^ splitmix64(seed_index + 0x5851f42d4c957f2dULL));
  k = splitmix64(k ^ hash_label(component_label));
  return Rng(k);
}

double uniform01(Rng& rng) {
  // 53-bit mantissa draw; identical across platforms for a given stream.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int sample_index(const double* weights, int n, Rng& rng) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += weights[i];
  if (total <= 0.0) throw std::invalid_argument("sample_index: nonpositive weight total");
  double u = uniform01(rng) * total;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return n - 1;  // guard against rounding at the top end
}

int sample_index(const std::vector<double>& weights, Rng& rng) {
  return sample_index(weights.data(), static_cast<int>(weights.size()), rng);
}

}  // namespace bridge
