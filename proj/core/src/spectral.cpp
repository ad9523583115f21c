#include "plateau/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "plateau/quadrature.hpp"

namespace plateau::spectral {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// sum_{k>=1} c_k z^k by Horner; exploits conjugate symmetry, so the caller
// reconstructs u = c_0 + 2 Re(f).
Complex holomorphic_part(const BoundaryField& u, int component, Complex z) {
  Complex s(0.0, 0.0);
  for (int k = u.max_mode(); k >= 1; --k) s = (s + u.coeff(component, k)) * z;
  return s;
}

// f'(z) = sum_{k>=1} k c_k z^{k-1}.
Complex holomorphic_part_derivative(const BoundaryField& u, int component, Complex z) {
  Complex s(0.0, 0.0);
  for (int k = u.max_mode(); k >= 1; --k) {
    s = s * z + static_cast<double>(k) * u.coeff(component, k);
  }
  return s;
}

BoundaryField apply_symbol(const BoundaryField& u, double (*symbol)(int)) {
  Eigen::MatrixXcd out = u.modes();
  const int K = u.max_mode();
  for (int k = -K; k <= K; ++k) out.col(k + K) *= symbol(k);
  return BoundaryField::from_modes(out);
}

}  // namespace

GridSamples synthesize(const BoundaryField& u, int grid_size) {
  if (grid_size < 1) throw std::invalid_argument("grid size must be positive");
  GridSamples out(u.n_components(), grid_size);
  for (int m = 0; m < grid_size; ++m) {
    const Complex w = std::polar(1.0, GridSamples::angle(m, grid_size));
    for (int j = 0; j < u.n_components(); ++j) {
      out.values(j, m) = u.coeff(j, 0).real() + 2.0 * holomorphic_part(u, j, w).real();
    }
  }
  return out;
}

BoundaryField analyze(const GridSamples& samples, int max_mode) {
  const int M = samples.grid_size();
  if (M < 2 * max_mode + 1)
    throw std::invalid_argument("grid too small for requested max_mode (need M >= 2K+1)");
  const int n = samples.n_components();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, max_mode + 1);
  for (int m = 0; m < M; ++m) {
    const Complex cw = std::polar(1.0, -GridSamples::angle(m, M));
    Complex p(1.0, 0.0);
    for (int k = 0; k <= max_mode; ++k) {
      for (int j = 0; j < n; ++j) acc(j, k) += samples.values(j, m) * p;
      p *= cw;
    }
  }
  acc /= static_cast<double>(M);
  Eigen::MatrixXcd coeffs = Eigen::MatrixXcd::Zero(n, 2 * max_mode + 1);
  for (int k = 0; k <= max_mode; ++k) {
    coeffs.col(max_mode + k) = acc.col(k);
    if (k > 0) coeffs.col(max_mode - k) = acc.col(k).conjugate();
  }
  return BoundaryField::from_modes(coeffs);
}

BoundaryField dtn(const BoundaryField& u) {
  return apply_symbol(u, [](int k) { return static_cast<double>(std::abs(k)); });
}

BoundaryField quarter_laplacian(const BoundaryField& u) {
  return apply_symbol(u, [](int k) { return std::sqrt(static_cast<double>(std::abs(k))); });
}

BoundaryField angular_derivative(const BoundaryField& u) {
  Eigen::MatrixXcd out = u.modes();
  const int K = u.max_mode();
  for (int k = -K; k <= K; ++k) out.col(k + K) *= Complex(0.0, static_cast<double>(k));
  return BoundaryField::from_modes(out);
}

BoundaryField galerkin_truncate(const BoundaryField& u, int cutoff) {
  if (cutoff < 0) throw std::invalid_argument("mode cutoff must be >= 0");
  Eigen::MatrixXcd out = u.modes();
  const int K = u.max_mode();
  for (int k = -K; k <= K; ++k)
    if (std::abs(k) > cutoff) out.col(k + K).setZero();
  return BoundaryField::from_modes(out);
}

double dirichlet_energy(const BoundaryField& u) {
  double sum = 0.0;
  const int K = u.max_mode();
  for (int j = 0; j < u.n_components(); ++j)
    for (int k = -K; k <= K; ++k) sum += std::abs(k) * std::norm(u.coeff(j, k));
  return std::numbers::pi * sum;
}

double half_energy(const BoundaryField& u) {
  const BoundaryField q = quarter_laplacian(u);
  const double norm = boundary_l2_norm(q);
  return 0.5 * norm * norm;
}

Eigen::VectorXd eval_extension(const BoundaryField& u, double r, double phi) {
  if (r < 0.0 || r > 1.0 + 1e-12) throw std::invalid_argument("extension radius must lie in [0, 1]");
  const Complex z = std::polar(std::min(r, 1.0), phi);
  Eigen::VectorXd out(u.n_components());
  for (int j = 0; j < u.n_components(); ++j)
    out[j] = u.coeff(j, 0).real() + 2.0 * holomorphic_part(u, j, z).real();
  return out;
}

Eigen::VectorXd eval_boundary(const BoundaryField& u, double phi) {
  return eval_extension(u, 1.0, phi);
}

ExtensionGradient grad_extension(const BoundaryField& u, double r, double phi) {
  if (r < 0.0 || r > 1.0 + 1e-12) throw std::invalid_argument("extension radius must lie in [0, 1]");
  const Complex z = std::polar(std::min(r, 1.0), phi);
  ExtensionGradient g{Eigen::VectorXd(u.n_components()), Eigen::VectorXd(u.n_components())};
  for (int j = 0; j < u.n_components(); ++j) {
    // U_j = c_0 + f_j(z) + conj(f_j(z)) with f holomorphic, so
    // dU/dx = 2 Re f', dU/dy = -2 Im f'.
    const Complex fp = holomorphic_part_derivative(u, j, z);
    g.dx[j] = 2.0 * fp.real();
    g.dy[j] = -2.0 * fp.imag();
  }
  return g;
}

namespace {

// Flux of (U - mean) . dU/dnu through an arc of the unit circle,
// phi in [phi_lo, phi_hi]; on the boundary dU/dnu = dU/dr is the DtN trace.
double boundary_arc_flux(const BoundaryField& u, const BoundaryField& du_dr,
                         const Eigen::VectorXd& mean, double phi_lo, double phi_hi) {
  const double arc = phi_hi - phi_lo;
  if (arc <= 0.0) return 0.0;
  const int K = u.max_mode();
  const int panels = std::max(4, static_cast<int>(std::ceil(arc * (K + 1) / 4.0)));
  const GaussLegendre& base = gauss_legendre(12);
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = phi_lo + arc * p / panels;
    const double b = phi_lo + arc * (p + 1) / panels;
    for (int q = 0; q < base.nodes.size(); ++q) {
      const double phi = 0.5 * (a + b) + 0.5 * (b - a) * base.nodes[q];
      const double w = 0.5 * (b - a) * base.weights[q];
      const Eigen::VectorXd uval = eval_boundary(u, phi) - mean;
      const Eigen::VectorXd nval = eval_boundary(du_dr, phi);
      total += w * uval.dot(nval);
    }
  }
  return total;
}

// Flux of (U - mean) . dU/dnu through the arc |z - z0| = R, alpha (angle
// around z0) in [lo, hi], outward normal pointing away from z0.
double disc_arc_flux(const BoundaryField& u, const Eigen::VectorXd& mean, Complex z0, double R,
                     double lo, double hi) {
  const double arc = hi - lo;
  if (arc <= 0.0) return 0.0;
  const int K = u.max_mode();
  const int panels = std::max(4, static_cast<int>(std::ceil(arc * (K * R + 1) / 4.0)));
  const GaussLegendre& base = gauss_legendre(12);
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + arc * p / panels;
    const double b = lo + arc * (p + 1) / panels;
    for (int q = 0; q < base.nodes.size(); ++q) {
      const double alpha = 0.5 * (a + b) + 0.5 * (b - a) * base.nodes[q];
      const double w = 0.5 * (b - a) * base.weights[q] * R;  // ds = R d(alpha)
      const Complex z = z0 + std::polar(R, alpha);
      const double r = std::min(std::abs(z), 1.0);
      const double phi = std::arg(z);
      const Eigen::VectorXd uval = eval_extension(u, r, phi) - mean;
      const ExtensionGradient g = grad_extension(u, r, phi);
      const double ca = std::cos(alpha), sa = std::sin(alpha);
      total += w * (g.dx.dot(uval) * ca + g.dy.dot(uval) * sa);
    }
  }
  return total;
}

}  // namespace

double local_energy(const BoundaryField& u, Complex z0, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("local energy radius must be positive");
  const double d = std::abs(z0);
  if (d > 1.0 + 1e-12) throw std::invalid_argument("local energy center must lie in the closed disc");
  if (R >= 1.0 + d) return 2.0 * dirichlet_energy(u);

  const Eigen::VectorXd mean = u.mean();
  const BoundaryField du_dr = dtn(u);
  const double beta = (d > 0.0) ? std::arg(z0) : 0.0;

  if (d + R <= 1.0) {
    // B_R(z0) entirely inside the disc: single closed arc around z0.
    return disc_arc_flux(u, mean, z0, R, beta, beta + kTwoPi);
  }

  // Proper intersection of the two circles.
  const double gamma1 = std::clamp((1.0 - d * d - R * R) / (2.0 * d * R), -1.0, 1.0);
  const double gamma2 = std::clamp((1.0 + d * d - R * R) / (2.0 * d), -1.0, 1.0);
  const double theta1 = std::acos(gamma1);  // arc of |z - z0| = R inside B
  const double theta2 = std::acos(gamma2);  // arc of |z| = 1 inside B_R(z0)

  double flux = disc_arc_flux(u, mean, z0, R, beta + theta1, beta + kTwoPi - theta1);
  flux += boundary_arc_flux(u, du_dr, mean, beta - theta2, beta + theta2);
  return flux;
}

int winding_degree(const BoundaryField& u) {
  if (u.n_components() != 2)
    throw std::invalid_argument("winding degree requires a plane-valued field (n = 2)");
  const int M = std::max(1024, 16 * u.max_mode() + 17);
  const GridSamples s = synthesize(u, M);
  double min_mod = std::numeric_limits<double>::infinity();
  double max_mod = 0.0;
  for (int m = 0; m < M; ++m) {
    const double mod = std::hypot(s.values(0, m), s.values(1, m));
    min_mod = std::min(min_mod, mod);
    max_mod = std::max(max_mod, mod);
  }
  if (!(min_mod > 1e-9 * std::max(1.0, max_mod)))
    throw std::domain_error("winding degree undefined: field passes too close to the origin");
  double total = 0.0;
  for (int m = 0; m < M; ++m) {
    const int m1 = (m + 1) % M;
    const Complex w0(s.values(0, m), s.values(1, m));
    const Complex w1(s.values(0, m1), s.values(1, m1));
    total += std::arg(w1 / w0);
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

BoundaryField compose_with_mobius(const BoundaryField& u, const MobiusParams& m, int out_mode) {
  m.validate();
  const int Kp = out_mode > 0 ? out_mode : 4 * std::max(1, u.max_mode());
  const int M = 4 * Kp + 5;  // oversampled: the composition is not band-limited
  GridSamples s(u.n_components(), M);
  for (int i = 0; i < M; ++i) {
    const double psi = m.boundary_angle(GridSamples::angle(i, M));
    s.values.col(i) = eval_boundary(u, psi);
  }
  return analyze(s, Kp);
}

}  // namespace plateau::spectral
