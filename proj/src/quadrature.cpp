#include "capa/quadrature.hpp"

#include <cmath>

#include "capa/error.hpp"

namespace capa {

namespace {

// P_M(x) and P'_M(x) via the three-term recurrence.
std::pair<double, double> legendre(int order, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= order; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double deriv = order * (x * p1 - p0) / (x * x - 1.0);
  return {p1, deriv};
}

}  // namespace

GlRule gl_rule(int order) {
  if (order < 1) throw ConfigError("GL rule order must be >= 1");
  GlRule rule;
  rule.order = order;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  if (order == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
    return rule;
  }
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < order; ++i) {
    // Chebyshev-type initial guess for the i-th root (descending), then Newton.
    double x = std::cos(pi * (i + 0.75) / (order + 0.5));
    double value = 0.0;
    double deriv = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      std::tie(value, deriv) = legendre(order, x);
      if (std::abs(value) < 1e-14) break;
      x -= value / deriv;
    }
    std::tie(value, deriv) = legendre(order, x);
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * deriv * deriv);
  }
  // Newton was seeded with descending roots; store ascending.
  for (int i = 0; i < order / 2; ++i) {
    std::swap(rule.nodes[i], rule.nodes[order - 1 - i]);
    std::swap(rule.weights[i], rule.weights[order - 1 - i]);
  }
  return rule;
}

QuadratureGrid QuadratureGrid::translated(const Point3& offset) const {
  QuadratureGrid out;
  out.points.reserve(points.size());
  for (const auto& p : points) out.points.push_back(p + offset);
  out.weights = weights;
  out.kind = kind;
  return out;
}

QuadratureGrid gl_grid(const Aperture& ap, int order) {
  ap.validate();
  const GlRule rule = gl_rule(order);
  QuadratureGrid grid;
  grid.kind = GridKind::GlTensor;
  grid.points.reserve(static_cast<std::size_t>(order) * order);
  grid.weights.resize(static_cast<Eigen::Index>(order) * order);
  const double quarter_area = ap.area() / 4.0;
  Eigen::Index idx = 0;
  for (int m = 0; m < order; ++m) {
    for (int n = 0; n < order; ++n) {
      Point3 p = ap.center;
      p.x += 0.5 * rule.nodes[m] * ap.len_x;
      p.y += 0.5 * rule.nodes[n] * ap.len_y;
      grid.points.push_back(p);
      grid.weights[idx++] = rule.weights[m] * rule.weights[n] * quarter_area;
    }
  }
  return grid;
}

QuadratureGrid patch_grid(const Aperture& ap, double spacing) {
  ap.validate();
  if (!(spacing > 0.0)) throw ConfigError("patch spacing must be positive");
  const auto count = [spacing](double len) {
    return std::max(1, static_cast<int>(std::ceil(len / spacing - 1e-9)));
  };
  const int nx = count(ap.len_x);
  const int ny = count(ap.len_y);
  QuadratureGrid grid;
  grid.kind = GridKind::Patch;
  grid.points.reserve(static_cast<std::size_t>(nx) * ny);
  grid.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(nx) * ny,
                                           ap.area() / (nx * ny));
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      Point3 p = ap.center;
      p.x += -0.5 * ap.len_x + (i + 0.5) * ap.len_x / nx;
      p.y += -0.5 * ap.len_y + (j + 0.5) * ap.len_y / ny;
      grid.points.push_back(p);
    }
  }
  return grid;
}

Eigen::VectorXcd integrate(const QuadratureGrid& grid,
                           const std::function<Eigen::VectorXcd(const Point3&)>& f) {
  Eigen::VectorXcd acc;
  for (int i = 0; i < grid.size(); ++i) {
    Eigen::VectorXcd v = f(grid.points[i]);
    if (acc.size() == 0) acc = Eigen::VectorXcd::Zero(v.size());
    acc += grid.weights[i] * v;
  }
  return acc;
}

std::complex<double> integrate_scalar(
    const QuadratureGrid& grid,
    const std::function<std::complex<double>(const Point3&)>& f) {
  std::complex<double> acc = 0.0;
  for (int i = 0; i < grid.size(); ++i) acc += grid.weights[i] * f(grid.points[i]);
  return acc;
}

}  // namespace capa
