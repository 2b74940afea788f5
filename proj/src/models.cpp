#include "capa/models.hpp"

#include "capa/channel.hpp"
#include "capa/error.hpp"

namespace capa {

void InrModel::validate() const {
  feature_map.validate();
  mlp.validate();
  if (feature_map.input_dim != 5) throw ConfigError("INR takes 5 raw coordinates");
  if (mlp.input_dim() != feature_map.output_dim())
    throw ConfigError("MLP input width does not match the encoding");
  if (mlp.output_dim() != 2 * n_streams)
    throw ConfigError("MLP output width must be 2 * n_streams");
}

InrModel make_inr_model(ModelKind kind, int n_streams, const Aperture& surface,
                        const UserRegion& region, const NetworkHyperparams& hp,
                        std::uint64_t init_seed) {
  if (n_streams < 1) throw ConfigError("n_streams must be >= 1");
  InrModel model;
  model.kind = kind;
  model.n_streams = n_streams;
  model.feature_map.input_dim = 5;
  model.feature_map.num_frequencies = hp.fourier_k;
  model.feature_map.base_scale = hp.fourier_base_scale;
  model.feature_map.lo = Eigen::VectorXd(5);
  model.feature_map.hi = Eigen::VectorXd(5);
  model.feature_map.lo << surface.center.x - 0.5 * surface.len_x,
      surface.center.y - 0.5 * surface.len_y, region.x_range.lo, region.y_range.lo,
      region.z_range.lo;
  model.feature_map.hi << surface.center.x + 0.5 * surface.len_x,
      surface.center.y + 0.5 * surface.len_y, region.x_range.hi, region.y_range.hi,
      region.z_range.hi;

  std::vector<int> widths;
  widths.push_back(model.feature_map.output_dim());
  for (int l = 0; l < hp.hidden_layers; ++l) widths.push_back(hp.hidden_width);
  widths.push_back(2 * n_streams);
  model.mlp = MlpParams::init(widths, init_seed, hp.activation);
  model.validate();
  return model;
}

Eigen::MatrixXd model_coords(const std::vector<Point3>& surface_points, const Point3& r_o) {
  Eigen::MatrixXd coords(surface_points.size(), 5);
  for (std::size_t i = 0; i < surface_points.size(); ++i) {
    coords(i, 0) = surface_points[i].x;
    coords(i, 1) = surface_points[i].y;
    coords(i, 2) = r_o.x;
    coords(i, 3) = r_o.y;
    coords(i, 4) = r_o.z;
  }
  return coords;
}

Eigen::MatrixXcd inr_eval(const InrModel& model, const std::vector<Point3>& surface_points,
                          const Point3& r_o, GradientTape* tape, bool* out_of_range) {
  const Eigen::MatrixXd coords = model_coords(surface_points, r_o);
  const Eigen::MatrixXd features = model.feature_map.encode(coords, out_of_range);
  return reals_to_complex(mlp_forward(model.mlp, features, tape));
}

Eigen::VectorXcd beainr_eval(const InrModel& model, const Point3& s, const Point3& r_o) {
  if (model.kind != ModelKind::BeaInr) throw ConfigError("model is not a BeaINR");
  return inr_eval(model, {s}, r_o).row(0);
}

Eigen::VectorXcd coefinr_eval(const InrModel& model, const Point3& r_hat, const Point3& r_o) {
  if (model.kind != ModelKind::CoefInr) throw ConfigError("model is not a CoefINR");
  return inr_eval(model, {r_hat}, r_o).row(0);
}

Eigen::MatrixXcd reconstruct_from_kernel(const Eigen::MatrixXcd& c_samples,
                                         const Eigen::VectorXd& ue_weights,
                                         const Eigen::MatrixXcd& h) {
  if (c_samples.rows() != h.rows() || ue_weights.size() != h.rows())
    throw ConfigError("coefficient rows must match the rx kernel side");
  return h.adjoint() * (ue_weights.asDiagonal() * c_samples);
}

Eigen::MatrixXcd reconstruct_beamformer(const Eigen::MatrixXcd& c_samples,
                                        const QuadratureGrid& ue_grid_local,
                                        const Point3& r_o,
                                        const std::vector<Point3>& tx_points,
                                        const PhysicalConfig& cfg) {
  const QuadratureGrid rx_global = ue_grid_local.translated(r_o);
  const Eigen::MatrixXcd h = channel_matrix(rx_global.points, tx_points, cfg);
  return reconstruct_from_kernel(c_samples, rx_global.weights, h);
}

}  // namespace capa
