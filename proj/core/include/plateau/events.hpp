#pragma once

#include <complex>

#include "plateau/boundary_field.hpp"

namespace plateau::diag {

/// Local energy concentration detected during a scan: at time t the energy in
/// B_radius(center) intersected with the disc reached local_energy (>= the
/// configured threshold at creation).
struct ConcentrationEvent {
  std::complex<double> center;
  double radius = 0.0;
  double local_energy = 0.0;
  double time = 0.0;
};

/// Conformally rescaled field recovered around a concentration event.
struct BubbleExtract {
  BoundaryField field;
  std::complex<double> center;
  double scale = 0.0;  // zoom scale of the disc chart (> 0)
  double energy = 0.0;
  double residual = 0.0;
  double conformality_defect = 0.0;
};

}  // namespace plateau::diag
