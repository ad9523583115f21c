#include "plateau/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace plateau {

namespace {

GaussLegendre compute_gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss-legendre order must be >= 1");
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-like seed, then Newton on P_n(x) = 0.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      if (n == 1) {
        p1 = x;
      }
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? x : p1;
      const double pn1 = (n == 1) ? 1.0 : p0;
      dp = n * (x * pn - pn1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussLegendre& gauss_legendre(int order) {
  static std::map<int, GaussLegendre> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
  return it->second;
}

GaussLegendre gauss_legendre_on(int order, double a, double b) {
  const GaussLegendre& base = gauss_legendre(order);
  GaussLegendre out;
  const double mid = 0.5 * (a + b);
  const double rad = 0.5 * (b - a);
  out.nodes = (base.nodes.array() * rad + mid).matrix();
  out.weights = base.weights * rad;
  return out;
}

QuadratureRule QuadratureRule::make(int boundary_size, int radial_panels, int radial_order) {
  if (boundary_size < 1 || radial_panels < 1) throw std::invalid_argument("quadrature sizes must be positive");
  QuadratureRule rule;
  rule.boundary_angles.resize(boundary_size);
  rule.boundary_weights.resize(boundary_size);
  const double w = 2.0 * std::numbers::pi / boundary_size;
  for (int m = 0; m < boundary_size; ++m) {
    rule.boundary_angles[m] = w * m;
    rule.boundary_weights[m] = w;
  }
  rule.radial_nodes.resize(radial_panels * radial_order);
  rule.radial_weights.resize(radial_panels * radial_order);
  for (int p = 0; p < radial_panels; ++p) {
    const double a = static_cast<double>(p) / radial_panels;
    const double b = static_cast<double>(p + 1) / radial_panels;
    const GaussLegendre panel = gauss_legendre_on(radial_order, a, b);
    rule.radial_nodes.segment(p * radial_order, radial_order) = panel.nodes;
    rule.radial_weights.segment(p * radial_order, radial_order) = panel.weights;
  }
  return rule;
}

}  // namespace plateau
