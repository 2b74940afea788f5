#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "capa/geometry.hpp"

namespace capa {

// Points closer than this are treated as coincident (the LoS kernel is
// singular there); apertures in this system never intersect.
inline constexpr double kChannelSingularityEps = 1e-9;

// Both apertures are polarized along y.
inline constexpr double kPolarization[3] = {0.0, 1.0, 0.0};

// Free-space LoS dyadic kernel
//   h(r,s) = -j eta exp(-j 2 pi |d| / lambda) / (2 lambda |d|) * (I - d d^T / |d|^2),
// d = r - s. Symmetric in (r, s).
Eigen::Matrix3cd dyadic_green(const Point3& r, const Point3& s, const PhysicalConfig& cfg);

// Polarization projection u^T h(r,s) u with u = e_y, i.e. the (y,y) entry.
std::complex<double> scalar_channel(const Point3& r, const Point3& s,
                                    const PhysicalConfig& cfg);

// Dense kernel samples H[i][j] = scalar_channel(rx[i], tx[j]).
Eigen::MatrixXcd channel_matrix(const std::vector<Point3>& rx_points,
                                const std::vector<Point3>& tx_points,
                                const PhysicalConfig& cfg);

}  // namespace capa
