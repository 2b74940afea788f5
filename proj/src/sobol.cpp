#include "capa/sobol.hpp"

#include "capa/error.hpp"
#include "capa/rng.hpp"

namespace capa {

namespace {

constexpr int kBits = 32;

struct DirectionTable {
  std::uint32_t v[2][kBits];

  DirectionTable() {
    // Dimension 1: van der Corput, m_k = 1.
    for (int k = 0; k < kBits; ++k) v[0][k] = 1u << (31 - k);
    // Dimension 2: primitive polynomial x+1 (Joe-Kuo: s=1, a=0, m_1=1),
    // recurrence m_k = 2 m_{k-1} ^ m_{k-1}  ->  m = 1, 3, 5, 15, 17, ...
    std::uint32_t m[kBits];
    m[0] = 1;
    for (int k = 1; k < kBits; ++k) m[k] = (m[k - 1] << 1) ^ m[k - 1];
    for (int k = 0; k < kBits; ++k) v[1][k] = m[k] << (31 - k);
  }
};

const DirectionTable kTable;

std::uint32_t reverse_bits32(std::uint32_t x) {
  x = ((x & 0x55555555u) << 1) | ((x >> 1) & 0x55555555u);
  x = ((x & 0x33333333u) << 2) | ((x >> 2) & 0x33333333u);
  x = ((x & 0x0f0f0f0fu) << 4) | ((x >> 4) & 0x0f0f0f0fu);
  x = (x << 24) | ((x & 0xff00u) << 8) | ((x >> 8) & 0xff00u) | (x >> 24);
  return x;
}

// Laine-Karras style hash: bit k of the output depends only on bits <= k of
// the input, so in reversed-bit order it acts as a nested digit scramble.
std::uint32_t laine_karras_permutation(std::uint32_t x, std::uint32_t seed) {
  x += seed;
  x ^= x * 0x6c50b47cu;
  x ^= x * 0xb82f1e52u;
  x ^= x * 0xc7afe638u;
  x ^= x * 0x8d22f6e6u;
  return x;
}

std::uint32_t nested_uniform_scramble(std::uint32_t x, std::uint32_t seed) {
  x = reverse_bits32(x);
  x = laine_karras_permutation(x, seed);
  return reverse_bits32(x);
}

}  // namespace

SobolSampler::SobolSampler(std::uint64_t scramble_seed, bool owen_enabled)
    : owen_enabled_(owen_enabled) {
  for (int d = 0; d < 2; ++d)
    dim_seed_[d] = static_cast<std::uint32_t>(derive_seed(scramble_seed, "sobol_dim", d));
}

std::uint32_t SobolSampler::raw_bits(std::uint32_t index, int dim) const {
  const std::uint32_t gray = index ^ (index >> 1);
  std::uint32_t x = 0;
  for (int k = 0; k < kBits; ++k)
    if (gray & (1u << k)) x ^= kTable.v[dim][k];
  return x;
}

std::uint32_t SobolSampler::scrambled_bits(std::uint32_t index, int dim) const {
  const std::uint32_t raw = raw_bits(index, dim);
  return owen_enabled_ ? nested_uniform_scramble(raw, dim_seed_[dim]) : raw;
}

std::array<double, 2> SobolSampler::point(std::uint32_t index) const {
  return {scrambled_bits(index, 0) * 0x1.0p-32, scrambled_bits(index, 1) * 0x1.0p-32};
}

QuadratureGrid sobol_grid(const Aperture& ap, int count, std::uint64_t seed,
                          bool owen_enabled) {
  ap.validate();
  if (count < 1) throw ConfigError("sobol_grid needs count >= 1");
  SobolSampler sampler(seed, owen_enabled);
  QuadratureGrid grid;
  grid.kind = GridKind::Sobol;
  grid.points.reserve(count);
  grid.weights = Eigen::VectorXd::Constant(count, ap.area() / count);
  for (int i = 1; i <= count; ++i) {
    const auto u = sampler.point(static_cast<std::uint32_t>(i));
    Point3 p = ap.center;
    p.x += (u[0] - 0.5) * ap.len_x;
    p.y += (u[1] - 0.5) * ap.len_y;
    grid.points.push_back(p);
  }
  return grid;
}

}  // namespace capa
