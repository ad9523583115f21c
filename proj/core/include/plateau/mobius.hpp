#pragma once

#include <complex>

namespace plateau {

using Complex = std::complex<double>;

/// Conformal automorphism of the unit disc,
///   Phi(z) = e^{i theta} (z - a) / (1 - conj(a) z),  |a| < 1.
/// The boundary restriction is an orientation-preserving circle diffeomorphism.
struct MobiusParams {
  Complex a{0.0, 0.0};
  double theta = 0.0;

  void validate() const;

  Complex disc_map(Complex z) const;
  /// arg Phi(e^{i phi}).
  double boundary_angle(double phi) const;
  /// |Phi'(e^{i phi})| = (1 - |a|^2) / |1 - conj(a) e^{i phi}|^2, the Jacobian
  /// of the boundary angle map.
  double boundary_derivative(double phi) const;
  MobiusParams inverse() const;
};

}  // namespace plateau
