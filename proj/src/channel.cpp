#include "capa/channel.hpp"

#include <cmath>

#include "capa/error.hpp"

namespace capa {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Separation {
  double dx, dy, dz, dist;
};

inline Separation separation(const Point3& r, const Point3& s) {
  Separation sep{r.x - s.x, r.y - s.y, r.z - s.z, 0.0};
  sep.dist = std::sqrt(sep.dx * sep.dx + sep.dy * sep.dy + sep.dz * sep.dz);
  if (sep.dist < kChannelSingularityEps)
    throw SingularityError("channel evaluated at coincident points");
  return sep;
}

inline std::complex<double> prefactor(double dist, const PhysicalConfig& cfg) {
  const double lambda = cfg.wavelength();
  const double phase = -kTwoPi * dist / lambda;
  const double mag = cfg.impedance_eta / (2.0 * lambda * dist);
  // -j * mag * e^{j phase}
  return std::complex<double>(0.0, -mag) *
         std::complex<double>(std::cos(phase), std::sin(phase));
}

}  // namespace

Eigen::Matrix3cd dyadic_green(const Point3& r, const Point3& s, const PhysicalConfig& cfg) {
  const Separation sep = separation(r, s);
  const std::complex<double> pref = prefactor(sep.dist, cfg);
  const double inv_d2 = 1.0 / (sep.dist * sep.dist);
  const double d[3] = {sep.dx, sep.dy, sep.dz};
  Eigen::Matrix3cd h;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const double proj = (a == b ? 1.0 : 0.0) - d[a] * d[b] * inv_d2;
      h(a, b) = pref * proj;
    }
  return h;
}

std::complex<double> scalar_channel(const Point3& r, const Point3& s,
                                    const PhysicalConfig& cfg) {
  const Separation sep = separation(r, s);
  const double proj_yy = 1.0 - sep.dy * sep.dy / (sep.dist * sep.dist);
  return prefactor(sep.dist, cfg) * proj_yy;
}

Eigen::MatrixXcd channel_matrix(const std::vector<Point3>& rx_points,
                                const std::vector<Point3>& tx_points,
                                const PhysicalConfig& cfg) {
  Eigen::MatrixXcd h(rx_points.size(), tx_points.size());
  for (Eigen::Index j = 0; j < h.cols(); ++j)
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      h(i, j) = scalar_channel(rx_points[i], tx_points[j], cfg);
  return h;
}

}  // namespace capa
