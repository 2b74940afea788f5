#pragma once

#include <cstdint>

#include "capa/error.hpp"
#include "capa/rng.hpp"

namespace capa {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  bool operator==(const Point3& o) const = default;
};

// Rectangular surface parallel to the global xy-plane.
struct Aperture {
  Point3 center;
  double len_x = 0.0;
  double len_y = 0.0;

  double area() const { return len_x * len_y; }
  bool contains(const Point3& p, double tol = 1e-12) const;
  void validate() const;
};

struct PhysicalConfig {
  double freq_hz = 3.0e8;
  double speed_of_light = 299792458.0;  // overridden to 3e8 by default_physical_config()
  double impedance_eta = 120.0 * 3.14159265358979323846;
  double noise_sigma2 = 5.6e-3;
  double power_budget = 1000.0;
  int num_streams = 1;

  double wavelength() const { return speed_of_light / freq_hz; }
  void validate() const;
};

// The reference setup rounds c to 3e8 m/s so that 2.4 GHz gives exactly
// lambda = 0.125 m (and 300 MHz gives 1 m).
PhysicalConfig default_physical_config(double freq_hz);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct UserRegion {
  Interval x_range;
  Interval y_range;
  Interval z_range;  // strictly positive: user sits in front of the BS plane

  void validate() const;
  bool contains(const Point3& p) const {
    return x_range.contains(p.x) && y_range.contains(p.y) && z_range.contains(p.z);
  }
};

// Local user-aperture coordinates -> global frame (pure translation by the
// aperture center).
inline Point3 local_to_global(const Point3& r_hat, const Point3& r_o) {
  return r_hat + r_o;
}

inline Point3 global_to_local(const Point3& r, const Point3& r_o) { return r - r_o; }

struct StreamCount {
  int m_bs = 0;  // BS-side spatial DoF
  int m_ue = 0;  // user-side spatial DoF
  int n = 0;     // multiplexing gain min(m_bs, m_ue)
};

// M = (2*ceil(Lx/lambda)+1) * (2*ceil(Ly/lambda)+1) per aperture; N = min.
StreamCount stream_count(const Aperture& bs, const Aperture& ue, double wavelength);

Point3 sample_user_position(const UserRegion& region, Rng& rng);

}  // namespace capa
