#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "capa/channel.hpp"
#include "capa/quadrature.hpp"

namespace capa {

// Beamformer values at the points of a transmit-side quadrature grid.
// One column per stream.
struct BeamformerSamples {
  QuadratureGrid tx_grid;
  Eigen::MatrixXcd values;  // tx_grid.size() x N

  int num_streams() const { return static_cast<int>(values.cols()); }
  void validate() const;
};

struct EffectiveSignal {
  std::vector<Point3> rx_points;
  Eigen::MatrixXcd values;  // rx_points.size() x N
};

// e(r_i) = sum_j p_j h(r_i, s_j) w(s_j)
EffectiveSignal effective_signal(const BeamformerSamples& w,
                                 const std::vector<Point3>& rx_points,
                                 const PhysicalConfig& cfg);

// Q = sum_i q_i e(r_i)^H e(r_i)
Eigen::MatrixXcd covariance(const EffectiveSignal& e, const QuadratureGrid& rx_grid);

// log2 det(I + Q / sigma2) through a Hermitian eigendecomposition.
double spectral_efficiency(const Eigen::MatrixXcd& q, double sigma2);

// sum_j p_j ||w(s_j)||^2
double transmit_power(const BeamformerSamples& w);

// Scale w so transmit_power == p_max.
BeamformerSamples normalize_power(const BeamformerSamples& w, double p_max);

struct ProjectionResult {
  BeamformerSamples w_par;   // component inside the channel subspace at the rx grid
  BeamformerSamples w_perp;  // residual; contributes power but no received signal
  bool rank_deficient = false;
  int subspace_rank = 0;
};

// Orthogonal decomposition of w under the tx-quadrature inner product such
// that the rx-grid effective signal of w_perp vanishes. Computed from a
// truncated SVD of the weighted kernel; the truncation regularizes
// rank-deficient channels (flagged).
ProjectionResult project_onto_channel_subspace(const BeamformerSamples& w,
                                               const QuadratureGrid& rx_grid,
                                               const PhysicalConfig& cfg);

// ---------------------------------------------------------------------------
// Differentiable SE pipeline
//
// Binds the kernel samples and quadrature weights of one (tx grid, rx grid)
// pair, then maps raw beamformer samples through
//   power normalization -> effective signal -> covariance -> SE,
// with a hand-derived reverse pass (the adjoint of the log-det is available
// in closed form from the same eigendecomposition, so no differentiation
// through eigenvectors is needed).
// ---------------------------------------------------------------------------

struct SeForward {
  double raw_power = 0.0;
  double scale = 1.0;            // sqrt(p_max / raw_power)
  Eigen::MatrixXcd w_norm;       // n_tx x N
  Eigen::MatrixXcd eff;          // n_rx x N
  Eigen::MatrixXcd q;            // N x N
  Eigen::VectorXd q_eigs;        // ascending
  Eigen::MatrixXcd q_vecs;
  double se_bits = 0.0;
  bool degenerate = false;       // raw power below the degeneracy threshold
};

class SeContext {
 public:
  SeContext(Eigen::MatrixXcd h, Eigen::VectorXd tx_weights, Eigen::VectorXd rx_weights,
            double sigma2, double p_max);

  // Convenience constructor building the kernel from grids.
  SeContext(const QuadratureGrid& tx_grid, const QuadratureGrid& rx_grid_global,
            const PhysicalConfig& cfg, double p_max);

  SeForward forward(const Eigen::MatrixXcd& w_raw) const;

  // d(SE)/d(w_raw) as a complex adjoint (dSE = Re tr(adj^H dW)); callers
  // training on -SE negate it. Undefined on degenerate forwards.
  Eigen::MatrixXcd se_grad_raw(const SeForward& f, const Eigen::MatrixXcd& w_raw) const;

  // SE of an externally normalized beamformer (no power handling).
  double se_of_normalized(const Eigen::MatrixXcd& w_norm) const;

  const Eigen::MatrixXcd& kernel() const { return h_; }
  const Eigen::MatrixXcd& weighted_kernel() const { return h_tx_weighted_; }
  const Eigen::VectorXd& tx_weights() const { return tx_w_; }
  const Eigen::VectorXd& rx_weights() const { return rx_w_; }
  double sigma2() const { return sigma2_; }
  double p_max() const { return p_max_; }

  double raw_power(const Eigen::MatrixXcd& w_raw) const;

  // Raw power below this fraction of p_max counts as degenerate.
  static constexpr double kDegeneracyFraction = 1e-12;

 private:
  Eigen::MatrixXcd h_;              // n_rx x n_tx kernel samples
  Eigen::MatrixXcd h_tx_weighted_;  // h * diag(tx weights)
  Eigen::VectorXd tx_w_;
  Eigen::VectorXd rx_w_;
  double sigma2_ = 1.0;
  double p_max_ = 1.0;
};

}  // namespace capa
