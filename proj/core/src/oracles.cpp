#include "plateau/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "plateau/quadrature.hpp"
#include "plateau/spectral.hpp"

namespace plateau::oracles {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Eigen::VectorXd poisson_eval(const GridSamples& samples, double r, double phi) {
  if (!(r >= 0.0 && r < 1.0))
    throw std::invalid_argument("poisson kernel evaluation requires 0 <= r < 1");
  const int M = samples.grid_size();
  const double r2 = r * r;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(samples.n_components());
  for (int m = 0; m < M; ++m) {
    const double alpha = phi - GridSamples::angle(m, M);
    const double kernel = (1.0 - r2) / (1.0 - 2.0 * r * std::cos(alpha) + r2);
    acc += kernel * samples.values.col(m);
  }
  return acc / static_cast<double>(M);
}

Eigen::VectorXd dense_project(const targets::CurveTarget& curve, const Eigen::VectorXd& q,
                              int samples) {
  if (samples < 10000) throw std::invalid_argument("dense projection oracle needs >= 10^4 samples");
  const double L = curve.length();
  double best_d2 = std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i < samples; ++i) {
    const double d2 = (q - curve.point_at(L * i / samples)).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_i = i;
    }
  }
  double a = L * (best_i - 1) / samples;
  double b = L * (best_i + 1) / samples;
  for (int it = 0; it < 100; ++it) {
    const double m1 = a + (b - a) / 3.0;
    const double m2 = b - (b - a) / 3.0;
    if ((q - curve.point_at(m1)).squaredNorm() < (q - curve.point_at(m2)).squaredNorm())
      b = m2;
    else
      a = m1;
  }
  return curve.point_at(0.5 * (a + b));
}

double fd_energy_derivative(const flow::FlowState& before, const flow::FlowState& after) {
  const double dt = after.t - before.t;
  if (!(dt > 0.0)) throw std::invalid_argument("energy derivative probe needs increasing times");
  return (spectral::dirichlet_energy(after.field) - spectral::dirichlet_energy(before.field)) / dt;
}

double disc_energy_quadrature(const BoundaryField& u, Complex z0, double R,
                              const std::function<double(Complex)>& weight) {
  if (!(R > 0.0)) throw std::invalid_argument("quadrature radius must be positive");
  const double d = std::abs(z0);
  if (d > 1.0 + 1e-12) throw std::invalid_argument("quadrature center must lie in the closed disc");
  const double beta = (d > 0.0) ? std::arg(z0) : 0.0;
  const int K = u.max_mode();

  // angular kinks: r_max(alpha) switches between R and the disc-boundary hit
  std::vector<double> cuts{beta, beta + kTwoPi};
  if (d > 1e-14) {
    const double gamma1 = (1.0 - d * d - R * R) / (2.0 * d * R);
    if (std::abs(gamma1) <= 1.0) {
      const double theta = std::acos(gamma1);
      cuts.push_back(beta + theta);
      cuts.push_back(beta + kTwoPi - theta);
    }
    if (d >= 1.0 - 1e-12) {  // boundary center: radial extent vanishes on half the angles
      cuts.push_back(beta + 0.5 * std::numbers::pi);
      cuts.push_back(beta + 1.5 * std::numbers::pi);
    }
  }
  std::sort(cuts.begin(), cuts.end());

  const int n_radial = std::max(24, K + 2);
  const GaussLegendre& radial = gauss_legendre(n_radial);
  const GaussLegendre& angular = gauss_legendre(10);

  double total = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double lo = cuts[c], hi = cuts[c + 1];
    if (hi - lo < 1e-14) continue;
    const int panels = std::max(8, static_cast<int>(std::ceil((hi - lo) * std::max(8, K) / 3.0)));
    for (int p = 0; p < panels; ++p) {
      const double a = lo + (hi - lo) * p / panels;
      const double b = lo + (hi - lo) * (p + 1) / panels;
      for (int qa = 0; qa < angular.nodes.size(); ++qa) {
        const double alpha = 0.5 * (a + b) + 0.5 * (b - a) * angular.nodes[qa];
        const double wa = 0.5 * (b - a) * angular.weights[qa];
        // clip the ray at the unit circle: t^2 + 2 b t + (d^2 - 1) = 0
        const double bb = (std::cos(alpha) * z0.real() + std::sin(alpha) * z0.imag());
        const double disc = bb * bb + (1.0 - d * d);
        const double t_exit = -bb + std::sqrt(std::max(disc, 0.0));
        const double t_hi = std::min(R, std::max(t_exit, 0.0));
        if (t_hi <= 0.0) continue;
        for (int qr = 0; qr < radial.nodes.size(); ++qr) {
          const double t = 0.5 * t_hi * (radial.nodes[qr] + 1.0);
          const double wt = 0.5 * t_hi * radial.weights[qr];
          const Complex z = z0 + std::polar(t, alpha);
          const double r = std::min(std::abs(z), 1.0);
          const spectral::ExtensionGradient g = spectral::grad_extension(u, r, std::arg(z));
          double density = g.dx.squaredNorm() + g.dy.squaredNorm();
          if (weight) density *= weight(z);
          total += wa * wt * t * density;
        }
      }
    }
  }
  return total;
}

}  // namespace plateau::oracles
