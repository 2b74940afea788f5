#include "capa/objective.hpp"

#include <cmath>

#include "capa/error.hpp"

namespace capa {

namespace {
constexpr double kLog2e = 1.4426950408889634074;  // 1/ln 2
}

void BeamformerSamples::validate() const {
  if (values.rows() != tx_grid.size())
    throw ConfigError("beamformer row count does not match its tx grid");
  if (!values.allFinite()) throw NumericalError("beamformer contains non-finite entries");
}

EffectiveSignal effective_signal(const BeamformerSamples& w,
                                 const std::vector<Point3>& rx_points,
                                 const PhysicalConfig& cfg) {
  w.validate();
  const Eigen::MatrixXcd h = channel_matrix(rx_points, w.tx_grid.points, cfg);
  EffectiveSignal e;
  e.rx_points = rx_points;
  e.values = h * (w.tx_grid.weights.asDiagonal() * w.values);
  return e;
}

Eigen::MatrixXcd covariance(const EffectiveSignal& e, const QuadratureGrid& rx_grid) {
  if (static_cast<int>(e.rx_points.size()) != rx_grid.size() ||
      e.values.rows() != rx_grid.size())
    throw ConfigError("effective signal length does not match rx grid");
  Eigen::MatrixXcd q = e.values.adjoint() * rx_grid.weights.asDiagonal() * e.values;
  // Gram construction is Hermitian up to roundoff; make it exact.
  q = 0.5 * (q + q.adjoint()).eval();
  return q;
}

double spectral_efficiency(const Eigen::MatrixXcd& q, double sigma2) {
  if (!(sigma2 > 0.0)) throw ConfigError("noise power must be positive");
  if (q.rows() != q.cols()) throw ConfigError("covariance must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(q);
  if (eig.info() != Eigen::Success)
    throw NumericalError("covariance eigendecomposition failed");
  const double trace = q.real().trace();
  double se = 0.0;
  for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
    const double lambda = eig.eigenvalues()[k];
    if (lambda < -1e-10 * std::max(trace, 1.0))
      throw NumericalError("covariance is not numerically PSD");
    se += std::log2(1.0 + std::max(lambda, 0.0) / sigma2);
  }
  return se;
}

double transmit_power(const BeamformerSamples& w) {
  w.validate();
  return (w.tx_grid.weights.array() * w.values.rowwise().squaredNorm().array()).sum();
}

BeamformerSamples normalize_power(const BeamformerSamples& w, double p_max) {
  if (!(p_max > 0.0)) throw ConfigError("power budget must be positive");
  const double power = transmit_power(w);
  if (!(power > 1e-280))
    throw DegenerateBeamformerError("cannot normalize a zero-power beamformer");
  BeamformerSamples out = w;
  out.values *= std::sqrt(p_max / power);
  return out;
}

ProjectionResult project_onto_channel_subspace(const BeamformerSamples& w,
                                               const QuadratureGrid& rx_grid,
                                               const PhysicalConfig& cfg) {
  w.validate();
  const Eigen::Index n_tx = w.values.rows();
  const Eigen::VectorXd sqrt_p = w.tx_grid.weights.cwiseSqrt();

  // Weighted kernel; its right singular space is the channel subspace image
  // under the sqrt-weight change of basis.
  const Eigen::MatrixXcd h = channel_matrix(rx_grid.points, w.tx_grid.points, cfg);
  const Eigen::MatrixXcd h_hat = h * sqrt_p.asDiagonal();

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h_hat, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? 1e-13 * sv[0] : 0.0;
  int rank = 0;
  while (rank < sv.size() && sv[rank] > cutoff) ++rank;

  const Eigen::MatrixXcd v = svd.matrixV().leftCols(rank);
  Eigen::MatrixXcd w_hat = sqrt_p.asDiagonal() * w.values;
  Eigen::MatrixXcd w_hat_par = v * (v.adjoint() * w_hat);

  ProjectionResult res;
  res.rank_deficient = rank < std::min<Eigen::Index>(rx_grid.size(), n_tx);
  res.subspace_rank = rank;
  res.w_par.tx_grid = w.tx_grid;
  res.w_perp.tx_grid = w.tx_grid;
  res.w_par.values = sqrt_p.cwiseInverse().asDiagonal() * w_hat_par;
  res.w_perp.values = w.values - res.w_par.values;
  return res;
}

SeContext::SeContext(Eigen::MatrixXcd h, Eigen::VectorXd tx_weights,
                     Eigen::VectorXd rx_weights, double sigma2, double p_max)
    : h_(std::move(h)),
      tx_w_(std::move(tx_weights)),
      rx_w_(std::move(rx_weights)),
      sigma2_(sigma2),
      p_max_(p_max) {
  if (h_.rows() != rx_w_.size() || h_.cols() != tx_w_.size())
    throw ConfigError("kernel dimensions do not match quadrature weights");
  if (!(sigma2_ > 0.0) || !(p_max_ > 0.0))
    throw ConfigError("sigma2 and p_max must be positive");
  h_tx_weighted_ = h_ * tx_w_.asDiagonal();
}

SeContext::SeContext(const QuadratureGrid& tx_grid, const QuadratureGrid& rx_grid_global,
                     const PhysicalConfig& cfg, double p_max)
    : SeContext(channel_matrix(rx_grid_global.points, tx_grid.points, cfg),
                tx_grid.weights, rx_grid_global.weights, cfg.noise_sigma2, p_max) {}

double SeContext::raw_power(const Eigen::MatrixXcd& w_raw) const {
  return (tx_w_.array() * w_raw.rowwise().squaredNorm().array()).sum();
}

SeForward SeContext::forward(const Eigen::MatrixXcd& w_raw) const {
  if (w_raw.rows() != tx_w_.size())
    throw ConfigError("beamformer row count does not match tx weights");
  SeForward f;
  f.raw_power = raw_power(w_raw);
  if (!(f.raw_power > kDegeneracyFraction * p_max_)) {
    f.degenerate = true;
    return f;
  }
  f.scale = std::sqrt(p_max_ / f.raw_power);
  f.w_norm = f.scale * w_raw;
  f.eff = h_tx_weighted_ * f.w_norm;
  Eigen::MatrixXcd q = f.eff.adjoint() * rx_w_.asDiagonal() * f.eff;
  f.q = 0.5 * (q + q.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(f.q);
  if (eig.info() != Eigen::Success)
    throw NumericalError("covariance eigendecomposition failed");
  f.q_eigs = eig.eigenvalues();
  f.q_vecs = eig.eigenvectors();
  f.se_bits = 0.0;
  for (Eigen::Index k = 0; k < f.q_eigs.size(); ++k)
    f.se_bits += std::log2(1.0 + std::max(f.q_eigs[k], 0.0) / sigma2_);
  return f;
}

double SeContext::se_of_normalized(const Eigen::MatrixXcd& w_norm) const {
  const Eigen::MatrixXcd e = h_tx_weighted_ * w_norm;
  Eigen::MatrixXcd q = e.adjoint() * rx_w_.asDiagonal() * e;
  q = 0.5 * (q + q.adjoint()).eval();
  return spectral_efficiency(q, sigma2_);
}

Eigen::MatrixXcd SeContext::se_grad_raw(const SeForward& f,
                                        const Eigen::MatrixXcd& w_raw) const {
  if (f.degenerate) throw NumericalError("gradient requested on degenerate forward");
  // dSE/dQbar via the eigenbasis: (sigma2 I + Q)^{-1} / ln 2.
  const Eigen::Index n = f.q_eigs.size();
  Eigen::VectorXd inv = Eigen::VectorXd(n);
  for (Eigen::Index k = 0; k < n; ++k)
    inv[k] = 1.0 / (sigma2_ + std::max(f.q_eigs[k], 0.0));
  const Eigen::MatrixXcd a_inv = f.q_vecs * inv.asDiagonal() * f.q_vecs.adjoint();

  // Q = E^H diag(q) E  =>  adj_E = 2/ln2 * diag(q) E (sigma2 I + Q)^{-1}
  const Eigen::MatrixXcd adj_eff =
      (2.0 * kLog2e) * (rx_w_.asDiagonal() * (f.eff * a_inv));
  // E = (H diag(p)) W_norm
  const Eigen::MatrixXcd adj_w_norm = h_tx_weighted_.adjoint() * adj_eff;
  // Power normalization: W_norm = scale(W_raw) * W_raw.
  const double radial =
      (adj_w_norm.conjugate().cwiseProduct(w_raw)).sum().real();  // Re tr(adj^H W)
  Eigen::MatrixXcd adj_raw = f.scale * adj_w_norm;
  adj_raw.noalias() -=
      (f.scale * radial / f.raw_power) * (tx_w_.asDiagonal() * w_raw);
  return adj_raw;
}

}  // namespace capa
