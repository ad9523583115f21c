#pragma once

#include <Eigen/Dense>
#include <utility>

namespace plateau {

/// Gauss-Legendre nodes and weights on [-1, 1]. Deterministic (Newton on the
/// Legendre recurrence with Chebyshev seeds); results are cached per order.
struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
const GaussLegendre& gauss_legendre(int order);

/// Gauss-Legendre nodes/weights mapped to [a, b].
GaussLegendre gauss_legendre_on(int order, double a, double b);

/// Node angles and weights for quadrature over S^1 (periodic trapezoid) and
/// radial Gauss-Legendre panels on [0, 1]. Trapezoid weights are exact for
/// trigonometric polynomials up to the grid Nyquist frequency.
struct QuadratureRule {
  Eigen::VectorXd boundary_angles;   // 2 pi m / M
  Eigen::VectorXd boundary_weights;  // 2 pi / M each
  Eigen::VectorXd radial_nodes;      // in (0, 1)
  Eigen::VectorXd radial_weights;

  static QuadratureRule make(int boundary_size, int radial_panels, int radial_order);
};

}  // namespace plateau
