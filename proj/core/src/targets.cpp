#include "plateau/targets.hpp"

#include <cmath>
#include <string>

namespace plateau::targets {

namespace {

std::string describe(double distance, double rho) {
  return "point outside tubular neighborhood: dist " + std::to_string(distance) +
         " >= rho " + std::to_string(rho);
}

// Smooth step from 1 at x <= 0 to 0 at x >= 1.
double smooth_step_down(double x) {
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  const double f0 = std::exp(-1.0 / x);
  const double f1 = std::exp(-1.0 / (1.0 - x));
  return f1 / (f0 + f1);
}

}  // namespace

OutsideTubularNeighborhood::OutsideTubularNeighborhood(double distance, double rho)
    : std::runtime_error(describe(distance, rho)), distance_(distance), rho_(rho) {}

Eigen::VectorXd TargetManifold::project(const Eigen::VectorXd& q) const {
  auto p = try_project(q);
  if (!p) throw OutsideTubularNeighborhood(distance_to(q), tubular_radius());
  return *p;
}

Eigen::VectorXd TargetManifold::tangent_project(const Eigen::VectorXd& p,
                                                const Eigen::VectorXd& X) const {
  return X - normal_project(p, X);
}

Eigen::VectorXd TargetManifold::normal_project(const Eigen::VectorXd& p,
                                               const Eigen::VectorXd& X) const {
  const Eigen::MatrixXd frame = normal_frame(p);
  return frame * (frame.transpose() * X);
}

Eigen::VectorXd TargetManifold::dist_components(const Eigen::VectorXd& q) const {
  const Eigen::VectorXd foot = project(q);
  const Eigen::MatrixXd frame = normal_frame(foot);
  return frame.transpose() * (q - foot);
}

Eigen::VectorXd TargetManifold::signed_distance(const Eigen::VectorXd& q) const {
  const double rho = tubular_radius();
  auto foot = try_project(q);
  if (!foot) return Eigen::VectorXd::Zero(codim());
  const Eigen::MatrixXd frame = normal_frame(*foot);
  Eigen::VectorXd h = frame.transpose() * (q - *foot);
  for (int i = 0; i < h.size(); ++i) h[i] = eta_cutoff(h[i], rho);
  return h;
}

Eigen::MatrixXd TargetManifold::dist_gradient(const Eigen::VectorXd& q) const {
  const int n = ambient_dim();
  const int m = codim();
  const double step = 1e-6 * std::max(1.0, q.norm());
  Eigen::MatrixXd grad(n, m);
  for (int d = 0; d < n; ++d) {
    Eigen::VectorXd qp = q, qm = q;
    qp[d] += step;
    qm[d] -= step;
    const Eigen::VectorXd hp = dist_components(qp);
    const Eigen::VectorXd hm = dist_components(qm);
    grad.row(d) = ((hp - hm) / (2.0 * step)).transpose();
  }
  return grad;
}

std::vector<Eigen::MatrixXd> TargetManifold::normal_jacobian(const Eigen::VectorXd& q) const {
  const int n = ambient_dim();
  const int m = codim();
  const double step = 1e-5 * std::max(1.0, q.norm());
  std::vector<Eigen::MatrixXd> jac(m, Eigen::MatrixXd(n, n));
  for (int d = 0; d < n; ++d) {
    Eigen::VectorXd qp = q, qm = q;
    qp[d] += step;
    qm[d] -= step;
    const Eigen::MatrixXd gp = dist_gradient(qp);
    const Eigen::MatrixXd gm = dist_gradient(qm);
    for (int i = 0; i < m; ++i) jac[i].col(d) = (gp.col(i) - gm.col(i)) / (2.0 * step);
  }
  // Symmetrize: each jac[i] approximates a Hessian.
  for (int i = 0; i < m; ++i) jac[i] = 0.5 * (jac[i] + jac[i].transpose()).eval();
  return jac;
}

double eta_cutoff(double s, double rho) {
  const double half = 0.5 * rho;
  const double outer = 0.75 * rho;
  const double mag = std::abs(s);
  if (mag < half) return s;
  if (mag >= outer) return 0.0;
  return s * smooth_step_down((mag - half) / (outer - half));
}

double smooth_bump(double x) {
  return smooth_step_down(2.0 * (x - 0.5));
}

SphereTarget::SphereTarget(int ambient_dim) : n_(ambient_dim) {
  if (ambient_dim < 2) throw std::invalid_argument("sphere target needs ambient dimension >= 2");
}

std::optional<Eigen::VectorXd> SphereTarget::try_project(const Eigen::VectorXd& q) const {
  const double r = q.norm();
  if (!(std::abs(r - 1.0) < tubular_radius()) || r == 0.0) return std::nullopt;
  return q / r;
}

Eigen::MatrixXd SphereTarget::normal_frame(const Eigen::VectorXd& p) const {
  Eigen::MatrixXd frame(n_, 1);
  frame.col(0) = p / p.norm();  // outward unit normal
  return frame;
}

Eigen::VectorXd SphereTarget::tangent_project(const Eigen::VectorXd& p,
                                              const Eigen::VectorXd& X) const {
  const Eigen::VectorXd nu = p / p.norm();
  return X - nu.dot(X) * nu;
}

Eigen::VectorXd SphereTarget::dist_components(const Eigen::VectorXd& q) const {
  const double r = q.norm();
  if (!(std::abs(r - 1.0) < tubular_radius()))
    throw OutsideTubularNeighborhood(std::abs(r - 1.0), tubular_radius());
  Eigen::VectorXd h(1);
  h[0] = r - 1.0;
  return h;
}

Eigen::MatrixXd SphereTarget::dist_gradient(const Eigen::VectorXd& q) const {
  return q / q.norm();
}

std::vector<Eigen::MatrixXd> SphereTarget::normal_jacobian(const Eigen::VectorXd& q) const {
  const double r = q.norm();
  const Eigen::VectorXd nu = q / r;
  std::vector<Eigen::MatrixXd> jac(1);
  jac[0] = (Eigen::MatrixXd::Identity(n_, n_) - nu * nu.transpose()) / r;
  return jac;
}

double SphereTarget::distance_to(const Eigen::VectorXd& q) const {
  return std::abs(q.norm() - 1.0);
}

}  // namespace plateau::targets
