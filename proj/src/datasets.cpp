#include "capa/datasets.hpp"

#include "capa/rng.hpp"

namespace capa {

Point3 DatasetSpec::position(long k) const {
  Rng rng(derive_seed(root_seed, tag + "_pos", static_cast<std::uint64_t>(k)));
  return sample_user_position(region, rng);
}

std::uint64_t DatasetSpec::sobol_tx_seed(long k) const {
  return derive_seed(derive_seed(root_seed, "sobol", sobol_seed), tag + "_sobol_tx",
                     static_cast<std::uint64_t>(k));
}

std::uint64_t DatasetSpec::sobol_rx_seed(long k) const {
  return derive_seed(derive_seed(root_seed, "sobol", sobol_seed), tag + "_sobol_rx",
                     static_cast<std::uint64_t>(k));
}

}  // namespace capa
