#include "capa/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "capa/channel.hpp"
#include "capa/error.hpp"
#include "capa/rng.hpp"

namespace capa {

namespace {

// Thin SVD through the smaller-side Gram matrix; accurate for the dominant
// modes, which are the only ones water-filling ever activates here.
struct ThinSvd {
  Eigen::VectorXd sigma;    // descending
  Eigen::MatrixXcd v;       // right singular vectors (cols), same count
};

ThinSvd thin_svd_right(const Eigen::MatrixXcd& h, int max_modes) {
  const bool rows_smaller = h.rows() <= h.cols();
  const Eigen::MatrixXcd gram =
      rows_smaller ? Eigen::MatrixXcd(h * h.adjoint()) : Eigen::MatrixXcd(h.adjoint() * h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(
      0.5 * (gram + gram.adjoint()));
  if (eig.info() != Eigen::Success)
    throw NumericalError("SVD eigendecomposition failed");
  const Eigen::Index n = eig.eigenvalues().size();
  const int modes = static_cast<int>(std::min<Eigen::Index>(max_modes, n));
  ThinSvd out;
  out.sigma = Eigen::VectorXd::Zero(modes);
  out.v = Eigen::MatrixXcd::Zero(h.cols(), modes);
  const double lam_max = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  for (int k = 0; k < modes; ++k) {
    const double lam = eig.eigenvalues()[n - 1 - k];  // ascending -> take from top
    if (lam <= 1e-28 * std::max(lam_max, 1e-300)) break;
    const double s = std::sqrt(lam);
    out.sigma[k] = s;
    if (rows_smaller) {
      out.v.col(k) = h.adjoint() * eig.eigenvectors().col(n - 1 - k) / s;
    } else {
      out.v.col(k) = eig.eigenvectors().col(n - 1 - k);
    }
  }
  return out;
}

BeamformerSamples unweight(const Eigen::MatrixXcd& w_d, const Eigen::VectorXd& tx_sqrt_w,
                           const QuadratureGrid& tx_grid) {
  BeamformerSamples w;
  w.tx_grid = tx_grid;
  w.values = tx_sqrt_w.cwiseInverse().asDiagonal() * w_d;
  return w;
}

}  // namespace

DiscretizedChannel discretize_channel(const QuadratureGrid& tx_grid,
                                      const QuadratureGrid& rx_grid_global,
                                      const PhysicalConfig& cfg) {
  DiscretizedChannel ch;
  ch.tx_sqrt_w = tx_grid.weights.cwiseSqrt();
  ch.rx_sqrt_w = rx_grid_global.weights.cwiseSqrt();
  ch.h_d = ch.rx_sqrt_w.asDiagonal() *
           channel_matrix(rx_grid_global.points, tx_grid.points, cfg) *
           ch.tx_sqrt_w.asDiagonal();
  return ch;
}

WaterfillResult water_fill(const Eigen::VectorXd& gains, double p_max) {
  if (!(p_max > 0.0)) throw ConfigError("water_fill needs a positive budget");
  const Eigen::Index n = gains.size();
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return gains[a] > gains[b]; });

  WaterfillResult res;
  res.powers = Eigen::VectorXd::Zero(n);
  res.singular_values = gains;  // callers overwrite with true singular values

  int active = 0;
  double inv_sum = 0.0;
  double mu = 0.0;
  for (int m = 0; m < n; ++m) {
    const double g = gains[idx[m]];
    if (!(g > 0.0)) break;
    const double trial_inv_sum = inv_sum + 1.0 / g;
    const double trial_mu = (p_max + trial_inv_sum) / (m + 1);
    if (trial_mu <= 1.0 / g) break;  // this mode would get nonpositive power
    inv_sum = trial_inv_sum;
    mu = trial_mu;
    active = m + 1;
  }
  res.water_level = mu;
  res.se_bits = 0.0;
  for (int m = 0; m < active; ++m) {
    const double g = gains[idx[m]];
    const double p = mu - 1.0 / g;
    res.powers[idx[m]] = p;
    res.se_bits += std::log2(1.0 + p * g);
  }
  return res;
}

SvdWaterfillResult svd_waterfill(const DiscretizedChannel& ch, const QuadratureGrid& tx_grid,
                                 double p_max, double sigma2, int n_streams) {
  if (n_streams < 1) throw ConfigError("svd_waterfill needs n_streams >= 1");
  const ThinSvd svd = thin_svd_right(ch.h_d, n_streams);
  const int modes = static_cast<int>(svd.sigma.size());

  Eigen::VectorXd gains(modes);
  for (int k = 0; k < modes; ++k) gains[k] = svd.sigma[k] * svd.sigma[k] / sigma2;

  SvdWaterfillResult out;
  out.alloc = water_fill(gains, p_max);
  out.alloc.singular_values = svd.sigma;

  Eigen::MatrixXcd w_d = Eigen::MatrixXcd::Zero(ch.h_d.cols(), n_streams);
  for (int k = 0; k < modes; ++k)
    w_d.col(k) = std::sqrt(out.alloc.powers[k]) * svd.v.col(k);
  out.w = unweight(w_d, ch.tx_sqrt_w, tx_grid);
  return out;
}

WmmseResult wmmse_solve(const QuadratureGrid& tx_grid, const QuadratureGrid& rx_grid_global,
                        const PhysicalConfig& cfg, double p_max, double tol, int max_iter,
                        std::uint64_t init_seed) {
  const DiscretizedChannel ch = discretize_channel(tx_grid, rx_grid_global, cfg);
  const Eigen::MatrixXcd& h = ch.h_d;
  const Eigen::Index n_tx = h.cols();
  const int n = cfg.num_streams;
  const double sigma2 = cfg.noise_sigma2;

  // random full-power start
  Eigen::MatrixXcd w(n_tx, n);
  {
    Rng rng(init_seed);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n_tx; ++i)
        w(i, j) = std::complex<double>(rng.gaussian(), rng.gaussian());
    w *= std::sqrt(p_max) / w.norm();
  }

  const auto se_of = [&](const Eigen::MatrixXcd& wt) {
    const Eigen::MatrixXcd t = h * wt;
    Eigen::MatrixXcd q = t.adjoint() * t;
    q = 0.5 * (q + q.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(q);
    double se = 0.0;
    for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k)
      se += std::log2(1.0 + std::max(eig.eigenvalues()[k], 0.0) / sigma2);
    return se;
  };

  WmmseResult res;
  double se_prev = se_of(w);
  res.se_per_iter.push_back(se_prev);

  for (int iter = 0; iter < max_iter; ++iter) {
    // MMSE receive filter and weight
    const Eigen::MatrixXcd t0 = h * w;  // n_rx x n
    Eigen::MatrixXcd cov = t0 * t0.adjoint();
    cov.diagonal().array() += sigma2;
    const Eigen::MatrixXcd u = cov.selfadjointView<Eigen::Lower>().llt().solve(t0);
    Eigen::MatrixXcd mse = Eigen::MatrixXcd::Identity(n, n) - t0.adjoint() * u;
    mse = 0.5 * (mse + mse.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> mse_eig(mse);
    if (mse_eig.info() != Eigen::Success)
      throw NumericalError("WMMSE weight eigendecomposition failed");
    Eigen::VectorXd me = mse_eig.eigenvalues().cwiseMax(1e-14);
    const Eigen::MatrixXcd omega_sqrt = mse_eig.eigenvectors() *
                                        me.cwiseSqrt().cwiseInverse().asDiagonal() *
                                        mse_eig.eigenvectors().adjoint();

    // Transmit update: w = (A + mu I)^-1 h^H u omega with A = h^H u omega u^H h.
    // Push-through on t_tilde = h^H u omega^{1/2} keeps everything N x N.
    const Eigen::MatrixXcd t_tilde = h.adjoint() * u * omega_sqrt;  // n_tx x n
    Eigen::MatrixXcd m = t_tilde.adjoint() * t_tilde;
    m = 0.5 * (m + m.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> m_eig(m);
    const Eigen::VectorXd d = m_eig.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXcd c = m_eig.eigenvectors().adjoint() * omega_sqrt;  // n x n
    Eigen::VectorXd row_sq(n);
    for (int k = 0; k < n; ++k) row_sq[k] = c.row(k).squaredNorm();

    const auto power_at = [&](double mu) {
      double p = 0.0;
      for (int k = 0; k < n; ++k) {
        const double dk = d[k];
        if (dk <= 0.0 && mu <= 0.0) continue;
        const double denom = dk + mu;
        if (denom <= 0.0) continue;
        p += dk / (denom * denom) * row_sq[k];
      }
      return p;
    };

    const double d_max = d.maxCoeff();
    double mu = 0.0;
    const double p0 = power_at(std::max(1e-14 * d_max, 1e-300));
    if (p0 > p_max) {
      double lo = 0.0;
      double hi = std::max(d_max, 1e-12);
      while (power_at(hi) > p_max) hi *= 2.0;
      for (int it = 0; it < 200; ++it) {
        mu = 0.5 * (lo + hi);
        const double p = power_at(mu);
        if (std::abs(p - p_max) <= 1e-10 * p_max) break;
        (p > p_max ? lo : hi) = mu;
      }
    }
    Eigen::VectorXd inv_d(n);
    for (int k = 0; k < n; ++k) {
      const double denom = d[k] + mu;
      inv_d[k] = denom > 1e-14 * std::max(d_max, 1.0) ? 1.0 / denom : 0.0;
    }
    w = t_tilde * (m_eig.eigenvectors() * (inv_d.asDiagonal() * c));

    const double se = se_of(w);
    res.se_per_iter.push_back(se);
    if (std::abs(se - se_prev) < tol) {
      res.converged = true;
      se_prev = se;
      break;
    }
    se_prev = se;
  }

  // use the full budget exactly (never decreases SE)
  const double pw = w.squaredNorm();
  if (pw > 0.0) w *= std::sqrt(p_max / pw);
  res.se_bits = se_of(w);
  res.se_per_iter.push_back(res.se_bits);
  res.w = unweight(w, ch.tx_sqrt_w, tx_grid);
  return res;
}

int default_fourier_truncation(double len, double wavelength) {
  return static_cast<int>(std::ceil(len / wavelength));
}

FourierResult fourier_solve(const QuadratureGrid& tx_grid,
                            const QuadratureGrid& rx_grid_global, const Aperture& bs,
                            const PhysicalConfig& cfg, double p_max, int trunc_x,
                            int trunc_y) {
  if (trunc_x < 0 || trunc_y < 0) throw ConfigError("Fourier truncation must be >= 0");
  const DiscretizedChannel ch = discretize_channel(tx_grid, rx_grid_global, cfg);
  const Eigen::Index n_tx = tx_grid.size();
  const int nb = (2 * trunc_x + 1) * (2 * trunc_y + 1);

  Eigen::MatrixXcd basis(n_tx, nb);
  const double two_pi = 6.283185307179586476925286766559;
  int b = 0;
  for (int nx = -trunc_x; nx <= trunc_x; ++nx) {
    for (int ny = -trunc_y; ny <= trunc_y; ++ny, ++b) {
      for (Eigen::Index j = 0; j < n_tx; ++j) {
        const double px = tx_grid.points[j].x - bs.center.x;
        const double py = tx_grid.points[j].y - bs.center.y;
        const double phase = two_pi * (nx * px / bs.len_x + ny * py / bs.len_y);
        basis(j, b) = std::complex<double>(std::cos(phase), std::sin(phase));
      }
    }
  }

  // Orthonormalize the weighted basis so coefficient power equals transmit power.
  Eigen::MatrixXcd basis_w = ch.tx_sqrt_w.asDiagonal() * basis;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(basis_w);
  qr.setThreshold(1e-12);
  const int rank = static_cast<int>(qr.rank());
  const Eigen::MatrixXcd q_full =
      qr.householderQ() * Eigen::MatrixXcd::Identity(n_tx, std::min<Eigen::Index>(n_tx, nb));
  const Eigen::MatrixXcd q_basis = q_full.leftCols(rank);

  DiscretizedChannel eff;
  eff.h_d = ch.h_d * q_basis;
  eff.tx_sqrt_w = Eigen::VectorXd::Ones(rank);
  eff.rx_sqrt_w = ch.rx_sqrt_w;

  QuadratureGrid coeff_grid;  // placeholder grid in coefficient space
  coeff_grid.kind = tx_grid.kind;
  coeff_grid.points.resize(rank);
  coeff_grid.weights = Eigen::VectorXd::Ones(rank);
  const SvdWaterfillResult sol =
      svd_waterfill(eff, coeff_grid, p_max, cfg.noise_sigma2, cfg.num_streams);

  FourierResult res;
  res.rank = rank;
  res.se_bits = sol.alloc.se_bits;
  res.w.tx_grid = tx_grid;
  res.w.values =
      ch.tx_sqrt_w.cwiseInverse().asDiagonal() * (q_basis * sol.w.values);
  return res;
}

SpdaResult spda_solve(const Aperture& bs, const QuadratureGrid& rx_grid_global,
                      const PhysicalConfig& cfg, double p_max, double spacing) {
  const QuadratureGrid patches = patch_grid(bs, spacing);
  const DiscretizedChannel ch = discretize_channel(patches, rx_grid_global, cfg);
  const SvdWaterfillResult sol =
      svd_waterfill(ch, patches, p_max, cfg.noise_sigma2, cfg.num_streams);
  SpdaResult res;
  res.w = sol.w;
  res.se_bits = sol.alloc.se_bits;
  return res;
}

}  // namespace capa
