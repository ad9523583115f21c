#pragma once

#include <functional>

#include "plateau/boundary_field.hpp"
#include "plateau/curve_target.hpp"
#include "plateau/flow.hpp"

namespace plateau::oracles {

/// Harmonic extension through the Poisson integral, evaluated by periodic
/// trapezoid quadrature directly on the given samples:
///   U(r, phi) = 1/M sum_m P_r(phi - theta_m) v_m,
///   P_r(alpha) = (1 - r^2) / (1 - 2 r cos(alpha) + r^2).
/// Independent of the spectral path; aliasing error decays like r^(M - K),
/// so the sample count must grow as r -> 1.
Eigen::VectorXd poisson_eval(const GridSamples& samples, double r, double phi);

/// Brute-force nearest point on a curve: global argmin over a dense parameter
/// grid plus a ternary refinement of the bracketing interval.
Eigen::VectorXd dense_project(const targets::CurveTarget& curve, const Eigen::VectorXd& q,
                              int samples = 100000);

/// Forward difference (E(t1) - E(t0)) / (t1 - t0) between two flow states,
/// for comparison against -|u_t|^2.
double fd_energy_derivative(const flow::FlowState& before, const flow::FlowState& after);

/// Area quadrature of |grad U|^2 (optionally weighted) over B_R(z0)
/// intersected with the unit disc: tensor Gauss-Legendre in a polar frame
/// about z0 with the radial extent clipped at the disc boundary per angle.
/// Slow reference for spectral::local_energy.
double disc_energy_quadrature(const BoundaryField& u, Complex z0, double R,
                              const std::function<double(Complex)>& weight = nullptr);

}  // namespace plateau::oracles
