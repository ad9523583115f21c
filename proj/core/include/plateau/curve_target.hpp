#pragma once

#include <string>
#include <vector>

#include "plateau/periodic_spline.hpp"
#include "plateau/targets.hpp"

namespace plateau::targets {

struct CurveOptions {
  int table_size = 2048;      // dense arclength grid backing the target
  double rho_override = 0.0;  // > 0 replaces the estimated tubular radius
};

/// Smoothly embedded oriented closed curve in R^2 or R^3, stored as a
/// periodic cubic spline reparametrized by arclength, with a precomputed
/// normal frame table. In R^3 the frame is rotation-minimizing transport with
/// the closure defect spread as a uniform twist so that nu_i(L) = nu_i(0).
class CurveTarget final : public TargetManifold {
 public:
  int ambient_dim() const override { return static_cast<int>(position_.dimension()); }
  int codim() const override { return ambient_dim() - 1; }
  double tubular_radius() const override { return rho_; }

  std::optional<Eigen::VectorXd> try_project(const Eigen::VectorXd& q) const override;
  Eigen::MatrixXd normal_frame(const Eigen::VectorXd& p) const override;
  Eigen::VectorXd tangent_project(const Eigen::VectorXd& p, const Eigen::VectorXd& X) const override;
  Eigen::MatrixXd dist_gradient(const Eigen::VectorXd& q) const override;
  double distance_to(const Eigen::VectorXd& q) const override;

  double length() const { return position_.period(); }
  Eigen::VectorXd point_at(double s) const { return position_.eval(s); }
  Eigen::VectorXd tangent_at(double s) const;
  /// Orthonormal normal frame at arclength s (n x m columns).
  Eigen::MatrixXd frame_at(double s) const;
  double max_curvature() const { return max_curvature_; }
  double min_self_distance() const { return min_self_distance_; }

  /// Arclength parameter of the nearest curve point; nullopt outside the
  /// tubular neighborhood. Newton on <q - gamma(s), gamma'(s)> = 0 seeded
  /// from a dense grid scan (the grid guarantees the global minimizer).
  std::optional<double> locate(const Eigen::VectorXd& q) const;

 private:
  friend CurveTarget build_curve(const std::vector<Eigen::VectorXd>&, const CurveOptions&);

  PeriodicSpline position_;  // arclength-parametrized
  PeriodicSpline frame1_;    // first normal table (n = 3 only)
  double rho_ = 0.0;
  double max_curvature_ = 0.0;
  double min_self_distance_ = 0.0;
  int seed_grid_ = 0;
};

/// Fit a closed curve through ordered control points (orientation = row
/// order): periodic spline, arclength reparametrization, frame construction,
/// and tubular radius estimate min(0.9 / max curvature, 0.45 * min
/// self-distance). Throws on degenerate (collinear) or self-intersecting
/// input.
CurveTarget build_curve(const std::vector<Eigen::VectorXd>& control_points,
                        const CurveOptions& options = {});

/// Control points from CSV: one point per line, comma-separated decimal
/// coordinates, lines starting with '#' skipped.
std::vector<Eigen::VectorXd> load_curve_csv(const std::string& path);

/// Convenience: n_points on the ellipse with the given semi-axes.
std::vector<Eigen::VectorXd> ellipse_points(double semi_a, double semi_b, int n_points);

}  // namespace plateau::targets
