#pragma once

#include <Eigen/Dense>

#include "plateau/boundary_field.hpp"
#include "plateau/mobius.hpp"

namespace plateau::spectral {

/// Sample the band-limited field on the equispaced grid of the given size.
/// Exact (no aliasing) for any grid size; synthesis uses the conjugate
/// symmetry so the output is real to machine precision.
GridSamples synthesize(const BoundaryField& u, int grid_size);

/// Trigonometric interpolation: recover modes |k| <= max_mode from grid
/// samples. Requires grid_size >= 2*max_mode + 1; for band-limited data this
/// inverts synthesize exactly.
BoundaryField analyze(const GridSamples& samples, int max_mode);

/// Normal derivative of the harmonic extension on the boundary; Fourier
/// symbol |k|. Realizes the half-Laplacian on S^1.
BoundaryField dtn(const BoundaryField& u);

/// Fourier symbol sqrt(|k|); applying it twice equals dtn.
BoundaryField quarter_laplacian(const BoundaryField& u);

/// d/dphi, Fourier symbol ik.
BoundaryField angular_derivative(const BoundaryField& u);

/// Zero all modes with |k| > cutoff.
BoundaryField galerkin_truncate(const BoundaryField& u, int cutoff);

/// Dirichlet energy of the harmonic extension, pi * sum |k| |c|^2.
double dirichlet_energy(const BoundaryField& u);

/// 1/2 || quarter_laplacian(u) ||^2 over S^1; coincides with dirichlet_energy
/// in exact arithmetic.
double half_energy(const BoundaryField& u);

/// Harmonic extension U(r e^{i phi}) = sum c_k r^|k| e^{ik phi}; r in [0, 1]
/// (r = 1 returns the boundary trace).
Eigen::VectorXd eval_extension(const BoundaryField& u, double r, double phi);

struct ExtensionGradient {
  Eigen::VectorXd dx;  // d/dx of each component
  Eigen::VectorXd dy;
};
/// Cartesian gradient of the harmonic extension at r e^{i phi}.
ExtensionGradient grad_extension(const BoundaryField& u, double r, double phi);

/// integral of |grad U|^2 over B_R(z0) intersected with the unit disc,
/// evaluated through the divergence identity: the integral equals the flux
/// of U . dU/dnu over the (piecewise circular) boundary of the region, which
/// costs O(K) per quadrature node instead of an area rule. z0 must lie in the
/// closed disc. Returns 2 * dirichlet_energy when the region covers the disc.
double local_energy(const BoundaryField& u, Complex z0, double R);

/// Winding number of a plane-valued field around the origin (n = 2 only).
/// Throws if the field passes too close to 0 on a dense evaluation grid.
int winding_degree(const BoundaryField& u);

/// Boundary reparametrization u(Phi|_{S^1}), re-analyzed at out_mode modes.
/// Composition is not band-limited; out_mode = 4K captures |a| <= 0.5 to
/// ~1e-8 energy error. out_mode = 0 selects that default.
BoundaryField compose_with_mobius(const BoundaryField& u, const MobiusParams& m, int out_mode = 0);

/// Evaluate the field at an arbitrary boundary angle (not necessarily a grid
/// point).
Eigen::VectorXd eval_boundary(const BoundaryField& u, double phi);

}  // namespace plateau::spectral
