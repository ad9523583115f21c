#pragma once

#include <Eigen/Dense>

namespace plateau::targets {

/// Vector-valued C^2 periodic cubic spline over knots t_0 < ... < t_{n-1}
/// with period T (the closing segment runs from t_{n-1} to t_0 + T).
class PeriodicSpline {
 public:
  PeriodicSpline() = default;

  /// knots: n strictly increasing parameters in [0, period);
  /// values: d x n matrix, one column per knot.
  static PeriodicSpline fit(const Eigen::VectorXd& knots, const Eigen::MatrixXd& values,
                            double period);

  Eigen::VectorXd eval(double t) const;
  Eigen::VectorXd derivative(double t) const;
  Eigen::VectorXd second_derivative(double t) const;

  double period() const { return period_; }
  int dimension() const { return static_cast<int>(values_.rows()); }
  int size() const { return static_cast<int>(values_.cols()); }

 private:
  int locate(double& t) const;  // wraps t into range, returns segment index

  Eigen::VectorXd knots_;
  Eigen::MatrixXd values_;   // d x n
  Eigen::MatrixXd second_;   // d x n, second derivatives at knots
  double period_ = 0.0;
};

/// Solve a cyclic tridiagonal system: sub[i] x_{i-1} + diag[i] x_i +
/// sup[i] x_{i+1} = rhs[i] (indices mod n). rhs may have multiple columns.
Eigen::MatrixXd cyclic_tridiagonal_solve(const Eigen::VectorXd& sub, const Eigen::VectorXd& diag,
                                         const Eigen::VectorXd& sup, const Eigen::MatrixXd& rhs);

}  // namespace plateau::targets
