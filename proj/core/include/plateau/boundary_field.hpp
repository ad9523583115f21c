#pragma once

#include <Eigen/Dense>
#include <complex>

namespace plateau {

using Complex = std::complex<double>;

/// Band-limited field u: S^1 -> R^n stored as a two-sided complex Fourier
/// spectrum with enforced conjugate symmetry, u_j(phi) = sum_k c[j][k] e^{ik phi}
/// for |k| <= max_mode. Immutable in spirit: operations return new fields.
class BoundaryField {
 public:
  BoundaryField() = default;
  BoundaryField(int n_components, int max_mode);

  /// Wrap an n x (2K+1) coefficient table, column index = mode + K.
  /// Conjugate symmetry is enforced by averaging c[k] with conj(c[-k]).
  static BoundaryField from_modes(const Eigen::MatrixXcd& coeffs);

  int n_components() const { return static_cast<int>(coeffs_.rows()); }
  int max_mode() const { return max_mode_; }

  Complex coeff(int component, int mode) const {
    return coeffs_(component, mode + max_mode_);
  }
  /// Set mode k >= 0 together with its conjugate partner at -k.
  void set_mode_pair(int component, int mode, Complex value);

  const Eigen::MatrixXcd& modes() const { return coeffs_; }

  bool is_finite() const;
  /// max_{j,k} |c[j][-k] - conj(c[j][k])|, zero for fields built through the
  /// public constructors.
  double reality_defect() const;

  /// Mean value over S^1 (the k = 0 coefficients).
  Eigen::VectorXd mean() const;

  BoundaryField operator+(const BoundaryField& other) const;
  BoundaryField operator-(const BoundaryField& other) const;
  BoundaryField operator*(double scale) const;

 private:
  Eigen::MatrixXcd coeffs_;  // n x (2K+1), column k + K
  int max_mode_ = 0;
};

/// Real samples of an R^n-valued field on the equispaced periodic grid
/// phi_m = 2 pi m / M.
struct GridSamples {
  Eigen::MatrixXd values;  // n x M

  GridSamples() = default;
  GridSamples(int n_components, int grid_size)
      : values(Eigen::MatrixXd::Zero(n_components, grid_size)) {}

  int n_components() const { return static_cast<int>(values.rows()); }
  int grid_size() const { return static_cast<int>(values.cols()); }
  static double angle(int m, int grid_size);
};

/// L^2(S^1) norm, sqrt(2 pi sum |c|^2).
double boundary_l2_norm(const BoundaryField& u);
double boundary_l2_distance(const BoundaryField& u, const BoundaryField& v);

}  // namespace plateau
