#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <vector>

namespace plateau::targets {

/// Raised when a query point lies outside the tubular neighborhood N_rho on
/// which the nearest-point projection is single-valued. Recoverable: the time
/// integrator rejects the step and retries with smaller dt. Never clamp.
class OutsideTubularNeighborhood : public std::runtime_error {
 public:
  OutsideTubularNeighborhood(double distance, double rho);
  double distance() const { return distance_; }
  double rho() const { return rho_; }

 private:
  double distance_;
  double rho_;
};

/// Closed submanifold N of R^n with a parallelizable normal bundle: bundles
/// the nearest-point projection, tangential/normal projectors, an orthonormal
/// normal frame nu_1..nu_m, and the truncated vector-valued signed distance.
class TargetManifold {
 public:
  virtual ~TargetManifold() = default;

  virtual int ambient_dim() const = 0;
  virtual int codim() const = 0;
  virtual double tubular_radius() const = 0;

  /// Nearest point on N, or nullopt when dist(q, N) >= tubular_radius.
  virtual std::optional<Eigen::VectorXd> try_project(const Eigen::VectorXd& q) const = 0;
  /// Nearest point on N; throws OutsideTubularNeighborhood.
  Eigen::VectorXd project(const Eigen::VectorXd& q) const;

  /// Orthonormal basis of the normal space at p in N, returned as the columns
  /// of an n x m matrix. The frame is orthonormal to machine precision at the
  /// query point (interpolated data is re-orthonormalized), so the projector
  /// split below is exactly Pythagorean.
  virtual Eigen::MatrixXd normal_frame(const Eigen::VectorXd& p) const = 0;

  /// Orthogonal projection of X onto the tangent space T_p N.
  virtual Eigen::VectorXd tangent_project(const Eigen::VectorXd& p, const Eigen::VectorXd& X) const;
  /// Complementary projection onto the normal space, sum_i nu_i <nu_i, X>.
  Eigen::VectorXd normal_project(const Eigen::VectorXd& p, const Eigen::VectorXd& X) const;

  /// Untruncated signed-distance components h^i(q) = <nu_i(pi(q)), q - pi(q)>
  /// for q in the tubular neighborhood.
  virtual Eigen::VectorXd dist_components(const Eigen::VectorXd& q) const;

  /// Truncated signed distance: eta(h^i(q)) inside N_rho and 0 outside, where
  /// eta is smooth, the identity for |s| < rho/2, and 0 for |s| >= 3 rho/4.
  /// Total function.
  Eigen::VectorXd signed_distance(const Eigen::VectorXd& q) const;

  /// Gradients of the h^i as columns of an n x m matrix. Default: centered
  /// finite differences of dist_components.
  virtual Eigen::MatrixXd dist_gradient(const Eigen::VectorXd& q) const;

  /// Hessians of the h^i (the derivative of the extended normal fields
  /// nu_i = grad h^i). Default: centered finite differences of dist_gradient.
  virtual std::vector<Eigen::MatrixXd> normal_jacobian(const Eigen::VectorXd& q) const;

  /// dist(q, N); may exceed tubular_radius (used for drift monitoring).
  virtual double distance_to(const Eigen::VectorXd& q) const = 0;
};

/// Unit sphere S^{n-1} in R^n. Projection q -> q/|q|; tubular radius 1/2.
class SphereTarget final : public TargetManifold {
 public:
  explicit SphereTarget(int ambient_dim);

  int ambient_dim() const override { return n_; }
  int codim() const override { return 1; }
  double tubular_radius() const override { return 0.5; }

  std::optional<Eigen::VectorXd> try_project(const Eigen::VectorXd& q) const override;
  Eigen::MatrixXd normal_frame(const Eigen::VectorXd& p) const override;
  Eigen::VectorXd tangent_project(const Eigen::VectorXd& p, const Eigen::VectorXd& X) const override;
  Eigen::VectorXd dist_components(const Eigen::VectorXd& q) const override;
  Eigen::MatrixXd dist_gradient(const Eigen::VectorXd& q) const override;
  std::vector<Eigen::MatrixXd> normal_jacobian(const Eigen::VectorXd& q) const override;
  double distance_to(const Eigen::VectorXd& q) const override;

 private:
  int n_;
};

/// Smooth cutoff eta: identity on |s| < rho/2, zero for |s| >= 3 rho/4.
double eta_cutoff(double s, double rho);

/// Smooth bump: 1 on [0, 1/2], 0 on [1, inf), C-infinity transition.
double smooth_bump(double x);

}  // namespace plateau::targets
