#include "capa/geometry.hpp"

#include <cmath>

namespace capa {

bool Aperture::contains(const Point3& p, double tol) const {
  return std::abs(p.x - center.x) <= 0.5 * len_x + tol &&
         std::abs(p.y - center.y) <= 0.5 * len_y + tol &&
         std::abs(p.z - center.z) <= tol;
}

void Aperture::validate() const {
  if (!(len_x > 0.0) || !(len_y > 0.0))
    throw ConfigError("aperture edge lengths must be positive");
  if (!std::isfinite(center.x) || !std::isfinite(center.y) || !std::isfinite(center.z))
    throw ConfigError("aperture center must be finite");
}

void PhysicalConfig::validate() const {
  if (!(freq_hz > 0.0) || !(speed_of_light > 0.0) || !(impedance_eta > 0.0) ||
      !(noise_sigma2 > 0.0) || !(power_budget > 0.0))
    throw ConfigError("physical constants must be positive");
  if (num_streams < 1) throw ConfigError("num_streams must be >= 1");
}

PhysicalConfig default_physical_config(double freq_hz) {
  PhysicalConfig cfg;
  cfg.freq_hz = freq_hz;
  cfg.speed_of_light = 3.0e8;
  return cfg;
}

void UserRegion::validate() const {
  if (x_range.length() < 0.0 || y_range.length() < 0.0 || z_range.length() < 0.0)
    throw ConfigError("user region intervals must be nonempty");
  if (!(z_range.lo > 0.0))
    throw ConfigError("user region must lie strictly in front of the BS plane (z > 0)");
}

StreamCount stream_count(const Aperture& bs, const Aperture& ue, double wavelength) {
  if (!(wavelength > 0.0)) throw ConfigError("wavelength must be positive");
  auto dof = [wavelength](const Aperture& a) {
    const auto nx = static_cast<long>(std::ceil(a.len_x / wavelength));
    const auto ny = static_cast<long>(std::ceil(a.len_y / wavelength));
    return static_cast<int>((2 * nx + 1) * (2 * ny + 1));
  };
  StreamCount sc;
  sc.m_bs = dof(bs);
  sc.m_ue = dof(ue);
  sc.n = std::min(sc.m_bs, sc.m_ue);
  return sc;
}

Point3 sample_user_position(const UserRegion& region, Rng& rng) {
  Point3 p;
  p.x = rng.uniform(region.x_range.lo, region.x_range.hi);
  p.y = rng.uniform(region.y_range.lo, region.y_range.hi);
  p.z = rng.uniform(region.z_range.lo, region.z_range.hi);
  return p;
}

}  // namespace capa
