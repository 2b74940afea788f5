#pragma once

#include <Eigen/Dense>
#include <vector>

#include "capa/objective.hpp"
#include "capa/quadrature.hpp"

namespace capa {

// Quadrature-weighted kernel samples: h_d[i,j] = sqrt(q_i) h(r_i, s_j) sqrt(p_j),
// so that ||h_d (sqrt(p) o w)||^2 is the quadrature estimate of the received
// energy and ||sqrt(p) o w||^2 the quadrature transmit power.
struct DiscretizedChannel {
  Eigen::MatrixXcd h_d;
  Eigen::VectorXd tx_sqrt_w;
  Eigen::VectorXd rx_sqrt_w;
};

DiscretizedChannel discretize_channel(const QuadratureGrid& tx_grid,
                                      const QuadratureGrid& rx_grid_global,
                                      const PhysicalConfig& cfg);

struct WaterfillResult {
  Eigen::VectorXd singular_values;  // of the discretized channel, descending
  Eigen::VectorXd powers;           // per-mode allocation, sums to p_max
  double water_level = 0.0;
  double se_bits = 0.0;
};

// Exact water-filling over per-unit-power gains g_k (= sigma_k^2 / sigma^2):
// powers max(0, mu - 1/g_k) with the level solved in closed form on the
// active set. Zero gains get zero power.
WaterfillResult water_fill(const Eigen::VectorXd& gains, double p_max);

struct SvdWaterfillResult {
  WaterfillResult alloc;
  BeamformerSamples w;  // mapped back to unweighted samples on the tx grid
};

SvdWaterfillResult svd_waterfill(const DiscretizedChannel& ch, const QuadratureGrid& tx_grid,
                                 double p_max, double sigma2, int n_streams);

struct WmmseResult {
  BeamformerSamples w;
  double se_bits = 0.0;
  std::vector<double> se_per_iter;
  bool converged = false;
};

// Alternating MMSE-receiver / weight / transmit-filter updates on the
// discretized operator, with the transmit subproblem's multiplier bisected to
// meet the power budget with equality.
WmmseResult wmmse_solve(const QuadratureGrid& tx_grid, const QuadratureGrid& rx_grid_global,
                        const PhysicalConfig& cfg, double p_max, double tol = 1e-6,
                        int max_iter = 200, std::uint64_t init_seed = 1);

struct FourierResult {
  BeamformerSamples w;
  double se_bits = 0.0;
  int rank = 0;  // numerically independent basis directions on the grid
};

// Beamformer constrained to truncated Fourier modes exp(j 2 pi (nx sx / Lx +
// ny sy / Ly)), |nx| <= trunc_x, |ny| <= trunc_y; solved exactly in an
// orthonormalized coefficient space by SVD + water-filling.
FourierResult fourier_solve(const QuadratureGrid& tx_grid,
                            const QuadratureGrid& rx_grid_global, const Aperture& bs,
                            const PhysicalConfig& cfg, double p_max, int trunc_x,
                            int trunc_y);

// Default truncation ceil(L / lambda) per axis (the DoF count convention).
int default_fourier_truncation(double len, double wavelength);

struct SpdaResult {
  BeamformerSamples w;  // on the patch-center grid
  double se_bits = 0.0;
};

// Discrete-array surrogate: point samples at patch centers with patch-area
// weights, solved by SVD + water-filling.
SpdaResult spda_solve(const Aperture& bs, const QuadratureGrid& rx_grid_global,
                      const PhysicalConfig& cfg, double p_max, double spacing);

}  // namespace capa
