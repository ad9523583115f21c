#include "plateau/mobius.hpp"

#include <cmath>
#include <stdexcept>

namespace plateau {

void MobiusParams::validate() const {
  if (!(std::abs(a) < 1.0)) throw std::invalid_argument("mobius parameter requires |a| < 1");
  if (!std::isfinite(theta)) throw std::invalid_argument("mobius angle must be finite");
}

Complex MobiusParams::disc_map(Complex z) const {
  return std::polar(1.0, theta) * (z - a) / (1.0 - std::conj(a) * z);
}

double MobiusParams::boundary_angle(double phi) const {
  return std::arg(disc_map(std::polar(1.0, phi)));
}

double MobiusParams::boundary_derivative(double phi) const {
  const Complex w = std::polar(1.0, phi);
  return (1.0 - std::norm(a)) / std::norm(1.0 - std::conj(a) * w);
}

MobiusParams MobiusParams::inverse() const {
  return MobiusParams{-a * std::polar(1.0, theta), -theta};
}

}  // namespace plateau
