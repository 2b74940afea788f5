#pragma once

#include <Eigen/Dense>
#include <vector>

#include "capa/geometry.hpp"
#include "capa/network.hpp"
#include "capa/objective.hpp"
#include "capa/quadrature.hpp"

namespace capa {

enum class ModelKind { BeaInr, CoefInr };

// A coordinate network over (surface point, user center). BeaINR maps BS
// surface points to beamformer rows; CoefINR maps local user-surface points
// to coefficient rows.
struct InrModel {
  ModelKind kind = ModelKind::BeaInr;
  int n_streams = 1;
  FourierFeatureMap feature_map;  // 5 inputs: surface x, y and the user center
  MlpParams mlp;                  // output width 2 * n_streams

  void validate() const;
};

struct NetworkHyperparams {
  int hidden_layers = 4;
  int hidden_width = 256;
  int fourier_k = 6;
  double fourier_base_scale = 1.0;
  Activation activation = Activation::ReLU;
};

// surface extents come from the aperture the network lives on (S_B for
// BeaINR, S_U local frame for CoefINR); user-center extents from the region.
InrModel make_inr_model(ModelKind kind, int n_streams, const Aperture& surface,
                        const UserRegion& region, const NetworkHyperparams& hp,
                        std::uint64_t init_seed);

// Rows: [p.x, p.y, r_o.x, r_o.y, r_o.z] per surface point.
Eigen::MatrixXd model_coords(const std::vector<Point3>& surface_points, const Point3& r_o);

// Batched network evaluation at surface points (global s for BeaINR, local
// r_hat for CoefINR). Returns n_points x N complex rows.
Eigen::MatrixXcd inr_eval(const InrModel& model, const std::vector<Point3>& surface_points,
                          const Point3& r_o, GradientTape* tape = nullptr,
                          bool* out_of_range = nullptr);

// Single-point conveniences.
Eigen::VectorXcd beainr_eval(const InrModel& model, const Point3& s, const Point3& r_o);
Eigen::VectorXcd coefinr_eval(const InrModel& model, const Point3& r_hat, const Point3& r_o);

// w(s_t) = sum_m u_m conj(h(r_m, s_t)) c_m  over the user-side quadrature.
// The conjugated kernel makes this the matched (minimum-power) synthesis: the
// result lies exactly in the subspace that project_onto_channel_subspace
// preserves, and the rx-grid effective signal of any discarded component is
// zero.
Eigen::MatrixXcd reconstruct_beamformer(const Eigen::MatrixXcd& c_samples,
                                        const QuadratureGrid& ue_grid_local,
                                        const Point3& r_o,
                                        const std::vector<Point3>& tx_points,
                                        const PhysicalConfig& cfg);

// Same synthesis with a precomputed kernel (h = rx x tx samples) so loss code
// can share one channel matrix between reconstruction and SE evaluation.
Eigen::MatrixXcd reconstruct_from_kernel(const Eigen::MatrixXcd& c_samples,
                                         const Eigen::VectorXd& ue_weights,
                                         const Eigen::MatrixXcd& h);

}  // namespace capa
