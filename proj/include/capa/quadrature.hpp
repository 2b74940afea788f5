#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "capa/geometry.hpp"

namespace capa {

// Gauss-Legendre rule on [-1, 1]. Exact for polynomials of degree <= 2*order-1.
struct GlRule {
  int order = 0;
  std::vector<double> nodes;    // strictly increasing, in (-1, 1)
  std::vector<double> weights;  // positive, sum == 2
};

// Nodes by Newton iteration on P_M, converged to |P_M(theta)| < 1e-14.
GlRule gl_rule(int order);

enum class GridKind { GlTensor, Sobol, Patch };

// Weighted sample points over an aperture. Weights sum to the aperture area.
struct QuadratureGrid {
  std::vector<Point3> points;
  Eigen::VectorXd weights;
  GridKind kind = GridKind::GlTensor;

  int size() const { return static_cast<int>(points.size()); }

  // Rigid translation (local user grid -> global frame).
  QuadratureGrid translated(const Point3& offset) const;
};

// order x order tensor grid: points center + [theta_m Lx/2, theta_n Ly/2, 0],
// weights w_m w_n A / 4.
QuadratureGrid gl_grid(const Aperture& ap, int order);

// Regular lattice of patch centers with patch-area weights (the discrete-array
// surrogate). Spacing is an upper bound; counts are rounded up per axis.
QuadratureGrid patch_grid(const Aperture& ap, double spacing);

// sum_i weight_i * f(point_i)
Eigen::VectorXcd integrate(const QuadratureGrid& grid,
                           const std::function<Eigen::VectorXcd(const Point3&)>& f);

std::complex<double> integrate_scalar(
    const QuadratureGrid& grid,
    const std::function<std::complex<double>(const Point3&)>& f);

}  // namespace capa
