#include "capa/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "capa/error.hpp"
#include "capa/rng.hpp"

namespace capa {

namespace {

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& off) {
  if (off + sizeof(T) > in.size()) throw IoError("truncated checkpoint");
  T v;
  std::memcpy(&v, in.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

std::string parameter_blob(const MlpParams& p) {
  std::string blob;
  blob.reserve(p.num_params() * sizeof(double));
  for (int l = 0; l < p.num_layers(); ++l) {
    for (Eigen::Index i = 0; i < p.weights[l].rows(); ++i)
      for (Eigen::Index j = 0; j < p.weights[l].cols(); ++j)
        put<double>(blob, p.weights[l](i, j));
    for (Eigen::Index i = 0; i < p.biases[l].size(); ++i)
      put<double>(blob, p.biases[l][i]);
  }
  return blob;
}

}  // namespace

void save_checkpoint(const std::string& path, const InrModel& model) {
  model.validate();
  std::string out;
  out.append(kCheckpointMagic, 8);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint8_t>(out, model.kind == ModelKind::BeaInr ? 0 : 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.n_streams));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.feature_map.num_frequencies));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.mlp.widths.size()));
  for (int w : model.mlp.widths) put<std::uint32_t>(out, static_cast<std::uint32_t>(w));
  const std::string blob = parameter_blob(model.mlp);
  out += blob;
  put<std::uint64_t>(out, fnv1a64(blob.data(), blob.size()));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open checkpoint for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("checkpoint write failed: " + path);
}

namespace {

struct RawCheckpoint {
  CheckpointHeader header;
  std::vector<double> params;
};

RawCheckpoint read_raw(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path);
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  std::size_t off = 0;
  if (data.size() < 8 || std::memcmp(data.data(), kCheckpointMagic, 8) != 0)
    throw IoError("not a checkpoint file (bad magic): " + path);
  off = 8;
  const auto version = take<std::uint32_t>(data, off);
  if (version != kCheckpointVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  RawCheckpoint raw;
  const auto kind = take<std::uint8_t>(data, off);
  if (kind > 1) throw IoError("unknown model kind in checkpoint");
  raw.header.kind = kind == 0 ? ModelKind::BeaInr : ModelKind::CoefInr;
  raw.header.n_streams = static_cast<int>(take<std::uint32_t>(data, off));
  raw.header.fourier_k = static_cast<int>(take<std::uint32_t>(data, off));
  const auto n_widths = take<std::uint32_t>(data, off);
  if (n_widths < 2 || n_widths > 64) throw IoError("implausible checkpoint widths");
  for (std::uint32_t i = 0; i < n_widths; ++i)
    raw.header.widths.push_back(static_cast<int>(take<std::uint32_t>(data, off)));

  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < raw.header.widths.size(); ++l)
    count += static_cast<std::size_t>(raw.header.widths[l]) * raw.header.widths[l + 1] +
             raw.header.widths[l + 1];
  if (off + count * sizeof(double) + sizeof(std::uint64_t) != data.size())
    throw IoError("checkpoint size does not match its header");
  const char* blob = data.data() + off;
  raw.params.resize(count);
  std::memcpy(raw.params.data(), blob, count * sizeof(double));
  off += count * sizeof(double);
  const auto stored = take<std::uint64_t>(data, off);
  if (stored != fnv1a64(blob, count * sizeof(double)))
    throw IoError("checkpoint checksum mismatch (corrupt file): " + path);
  return raw;
}

}  // namespace

CheckpointHeader peek_checkpoint(const std::string& path) { return read_raw(path).header; }

InrModel load_checkpoint(const std::string& path, const Aperture& surface,
                         const UserRegion& region, Activation activation,
                         double fourier_base_scale) {
  const RawCheckpoint raw = read_raw(path);

  NetworkHyperparams hp;
  hp.hidden_layers = static_cast<int>(raw.header.widths.size()) - 2;
  hp.hidden_width = hp.hidden_layers > 0 ? raw.header.widths[1] : 0;
  hp.fourier_k = raw.header.fourier_k;
  hp.fourier_base_scale = fourier_base_scale;
  hp.activation = activation;

  InrModel model = make_inr_model(raw.header.kind, raw.header.n_streams, surface, region,
                                  hp, /*init_seed=*/0);
  model.mlp.widths = raw.header.widths;
  model.mlp.weights.clear();
  model.mlp.biases.clear();
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < raw.header.widths.size(); ++l) {
    const int rows = raw.header.widths[l + 1];
    const int cols = raw.header.widths[l];
    Eigen::MatrixXd w(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) w(i, j) = raw.params[off++];
    Eigen::VectorXd b(rows);
    for (int i = 0; i < rows; ++i) b[i] = raw.params[off++];
    model.mlp.weights.push_back(std::move(w));
    model.mlp.biases.push_back(std::move(b));
  }
  model.validate();
  return model;
}

}  // namespace capa
