#pragma once

#include <string>

#include "capa/models.hpp"

namespace capa {

// Binary checkpoint layout (little-endian):
//   magic "CAPAINR1" (8 bytes)
//   format version  u32   (currently 1)
//   model kind      u8    (0 = BeaINR, 1 = CoefINR)
//   N               u32   (stream count)
//   encoding K      u32   (Fourier frequency count)
//   width count     u32, then each layer width u32
//   parameter blob: f64 per value, per layer weights row-major then biases
//   checksum        u64   (FNV-1a over the blob bytes)
// Extents, activation and the frequency base scale are not stored; they come
// from the run config that accompanies the checkpoint.
inline constexpr char kCheckpointMagic[8] = {'C', 'A', 'P', 'A', 'I', 'N', 'R', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const InrModel& model);

struct CheckpointHeader {
  ModelKind kind = ModelKind::BeaInr;
  int n_streams = 0;
  int fourier_k = 0;
  std::vector<int> widths;
};

// Reads and checksums the file. The surface/region extents, activation and
// base scale are supplied by the caller (from the training config).
InrModel load_checkpoint(const std::string& path, const Aperture& surface,
                         const UserRegion& region, Activation activation,
                         double fourier_base_scale);

CheckpointHeader peek_checkpoint(const std::string& path);

}  // namespace capa
