#include "plateau/boundary_field.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace plateau {

BoundaryField::BoundaryField(int n_components, int max_mode) : max_mode_(max_mode) {
  if (n_components < 1) throw std::invalid_argument("boundary field needs n_components >= 1");
  if (max_mode < 0) throw std::invalid_argument("boundary field needs max_mode >= 0");
  coeffs_ = Eigen::MatrixXcd::Zero(n_components, 2 * max_mode + 1);
}

BoundaryField BoundaryField::from_modes(const Eigen::MatrixXcd& coeffs) {
  if (coeffs.cols() % 2 == 0) throw std::invalid_argument("coefficient table must have 2K+1 columns");
  BoundaryField u;
  u.max_mode_ = static_cast<int>(coeffs.cols() / 2);
  u.coeffs_ = coeffs;
  const int K = u.max_mode_;
  for (int j = 0; j < u.n_components(); ++j) {
    u.coeffs_(j, K) = Complex(coeffs(j, K).real(), 0.0);
    for (int k = 1; k <= K; ++k) {
      const Complex avg = 0.5 * (coeffs(j, K + k) + std::conj(coeffs(j, K - k)));
      u.coeffs_(j, K + k) = avg;
      u.coeffs_(j, K - k) = std::conj(avg);
    }
  }
  return u;
}

void BoundaryField::set_mode_pair(int component, int mode, Complex value) {
  if (mode < 0 || mode > max_mode_) throw std::out_of_range("mode outside [0, max_mode]");
  if (mode == 0) {
    coeffs_(component, max_mode_) = Complex(value.real(), 0.0);
    return;
  }
  coeffs_(component, max_mode_ + mode) = value;
  coeffs_(component, max_mode_ - mode) = std::conj(value);
}

bool BoundaryField::is_finite() const {
  return coeffs_.allFinite();
}

double BoundaryField::reality_defect() const {
  double defect = 0.0;
  const int K = max_mode_;
  for (int j = 0; j < n_components(); ++j) {
    defect = std::max(defect, std::abs(coeffs_(j, K).imag()));
    for (int k = 1; k <= K; ++k)
      defect = std::max(defect, std::abs(coeffs_(j, K + k) - std::conj(coeffs_(j, K - k))));
  }
  return defect;
}

Eigen::VectorXd BoundaryField::mean() const {
  return coeffs_.col(max_mode_).real();
}

BoundaryField BoundaryField::operator+(const BoundaryField& other) const {
  if (max_mode_ != other.max_mode_ || n_components() != other.n_components())
    throw std::invalid_argument("field shape mismatch");
  BoundaryField out = *this;
  out.coeffs_ += other.coeffs_;
  return out;
}

BoundaryField BoundaryField::operator-(const BoundaryField& other) const {
  if (max_mode_ != other.max_mode_ || n_components() != other.n_components())
    throw std::invalid_argument("field shape mismatch");
  BoundaryField out = *this;
  out.coeffs_ -= other.coeffs_;
  return out;
}

BoundaryField BoundaryField::operator*(double scale) const {
  BoundaryField out = *this;
  out.coeffs_ *= scale;
  return out;
}

double GridSamples::angle(int m, int grid_size) {
  return 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(grid_size);
}

double boundary_l2_norm(const BoundaryField& u) {
  return std::sqrt(2.0 * std::numbers::pi * u.modes().squaredNorm());
}

double boundary_l2_distance(const BoundaryField& u, const BoundaryField& v) {
  if (u.max_mode() == v.max_mode()) return boundary_l2_norm(u - v);
  const BoundaryField& hi = u.max_mode() > v.max_mode() ? u : v;
  const BoundaryField& lo = u.max_mode() > v.max_mode() ? v : u;
  if (hi.n_components() != lo.n_components()) throw std::invalid_argument("field shape mismatch");
  double sum = 0.0;
  for (int j = 0; j < hi.n_components(); ++j)
    for (int k = -hi.max_mode(); k <= hi.max_mode(); ++k) {
      const Complex c = hi.coeff(j, k) - (std::abs(k) <= lo.max_mode() ? lo.coeff(j, k) : Complex(0, 0));
      sum += std::norm(c);
    }
  return std::sqrt(2.0 * std::numbers::pi * sum);
}

}  // namespace plateau
