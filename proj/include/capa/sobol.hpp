#pragma once

#include <array>
#include <cstdint>

#include "capa/quadrature.hpp"

namespace capa {

// Two-dimensional Sobol sequence (Joe-Kuo direction numbers, Gray-code
// construction) with optional hash-based nested digit scrambling. With
// scrambling enabled, any prefix of 2^m points keeps the (t,m,2)-net
// structure of the unscrambled sequence.
class SobolSampler {
 public:
  static constexpr int kDimension = 2;

  explicit SobolSampler(std::uint64_t scramble_seed = 0, bool owen_enabled = true);

  // i-th point of the sequence, i >= 0. Unscrambled, point 0 is the origin.
  std::array<double, 2> point(std::uint32_t index) const;

  std::uint32_t raw_bits(std::uint32_t index, int dim) const;        // unscrambled
  std::uint32_t scrambled_bits(std::uint32_t index, int dim) const;  // after Owen

  bool owen_enabled() const { return owen_enabled_; }

 private:
  std::uint32_t dim_seed_[2];
  bool owen_enabled_;
};

// Affine map of the sequence onto the aperture with uniform weights A/count.
// Starts at sequence index 1 so the unscrambled origin point never lands in a
// quadrature rule.
QuadratureGrid sobol_grid(const Aperture& ap, int count, std::uint64_t seed,
                          bool owen_enabled = true);

}  // namespace capa
