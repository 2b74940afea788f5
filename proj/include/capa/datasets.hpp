#pragma once

#include <cstdint>
#include <string>

#include "capa/geometry.hpp"

namespace capa {

// Datasets are never materialized: every sample is regenerated on demand from
// (root seed, tag, index). GL point sets are shared across samples; Sobol
// point sets get an independent scramble seed per sample.
struct DatasetSpec {
  std::uint64_t root_seed = 0;
  std::uint64_t sobol_seed = 0;  // extra entropy for the Sobol scrambles only
  std::string tag;               // "train", "eval", ...
  long count = 0;
  UserRegion region;

  Point3 position(long k) const;
  std::uint64_t sobol_tx_seed(long k) const;
  std::uint64_t sobol_rx_seed(long k) const;
};

}  // namespace capa
