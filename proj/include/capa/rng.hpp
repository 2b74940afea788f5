#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace capa {

// FNV-1a, used both for checkpoint checksums and seed derivation.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// All randomness in a run derives from one root seed through this split:
// subseed = mix(root, tag, k). Tags name the consumer ("train_pos", "sobol_tx", ...).
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                                 std::uint64_t k = 0) {
  std::uint64_t h = fnv1a64(tag.data(), tag.size());
  return splitmix64(splitmix64(root ^ h) ^ (0x9e3779b97f4a7c15ull * (k + 1)));
}

// mt19937_64 with hand-rolled double / Gaussian conversion. The standard
// distributions are implementation-defined; these are bit-stable everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; draws are consumed in pairs internally.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace capa
