#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "plateau/boundary_field.hpp"
#include "plateau/events.hpp"
#include "plateau/flow.hpp"
#include "plateau/targets.hpp"

namespace plateau::diag {

/// L2(S^1) norm of the tangential radial derivative dpi_N(u) du/dr on the
/// dealiased grid: the stationarity defect. Zero iff u is discretely
/// half-harmonic.
double residual(const BoundaryField& u, const targets::TargetManifold& target, int grid_size = 0);

/// max over the grid of | |u_r|^2 - |dpi u_r|^2 - |dpi_perp u_r|^2 |.
double pythagoras_check(const BoundaryField& u, const targets::TargetManifold& target,
                        int grid_size = 0);

struct DistLaplaceResult {
  double max_defect = 0.0;  // max over points and components
  int evaluated = 0;
  int skipped = 0;  // extension left N_{rho/2} at these points
};

/// Compares the centered finite-difference Laplacian of z -> dist_N(U(z))
/// against grad U . d(nu_i)(U) grad U at the given interior points. The
/// stencil width is min(0.01, (1 - r)/4) scaled by h_scale, keeping the
/// stencil inside the disc.
DistLaplaceResult dist_laplace_check(const BoundaryField& u, const targets::TargetManifold& target,
                                     const std::vector<Complex>& interior_points,
                                     double h_scale = 1.0);

/// Hopf differential f = |U_x|^2 - |U_y|^2 - 2i U_x . U_y of the harmonic
/// extension at the given points; identically zero iff the extension is
/// conformal.
std::vector<Complex> hopf_differential(const BoundaryField& u, const std::vector<Complex>& points);

/// max |f| over a fixed interior polar lattice (radii 0.05..0.95, 64 angles).
double conformality_defect(const BoundaryField& u);

struct ScanOptions {
  double delta_conc = 0.0;
  std::vector<double> ladder;  // radii, descending
  int lattice_size = 64;       // equispaced boundary centers
  // scans threshold O(1) energies, so very high modes are truncated before
  // scanning to bound the cost; the dropped tail energy is negligible for
  // resolved fields. 0 disables the cap.
  int scan_mode_cap = 512;
};

struct ScanResult {
  std::vector<ConcentrationEvent> events;
  double max_local_energy = 0.0;  // over lattice x ladder
};

/// Scan local_energy over the boundary lattice and radius ladder for one
/// field. An event fires at a center when the smallest ladder radius still
/// carries local energy >= delta_conc; events are deduplicated by clustering
/// centers within the firing radius.
ScanResult scan_concentration(const BoundaryField& field, double t, const ScanOptions& opts);

/// Scan a trajectory window (snapshot states) and collect all events.
std::vector<ConcentrationEvent> detect_concentration(std::span<const flow::FlowState> window,
                                                     const ScanOptions& opts);

class StaleEventError : public std::runtime_error {
 public:
  StaleEventError();
};

struct ExtractionOptions {
  double delta_conc = 0.0;      // 0: half the event's recorded local energy
  std::vector<double> ladder;   // empty: {2R, R, R/2} clipped to (0, 1]
  int out_mode = 0;             // 0: same band limit as the input field
};

/// Recover the concentrating bubble: zoom into the event center with a
/// disc-preserving Mobius chart whose scale is chosen by minimizing the
/// boundary energy-density imbalance, rotate the max-gradient point to angle
/// 0, and report energy / stationarity residual / conformality defect of the
/// rescaled field. Throws StaleEventError when the local energy has since
/// dispersed below the threshold.
BubbleExtract extract_bubble(const flow::FlowState& state, const ConcentrationEvent& event,
                             const targets::TargetManifold& target,
                             const ExtractionOptions& opts = {});

struct DissipationInterval {
  double t0 = 0.0, t1 = 0.0;
  double energy_drop = 0.0;       // E(t0) - E(t1)
  double dissipated = 0.0;        // integral of |u_t|^2 over the interval
  double defect = 0.0;            // energy_drop - dissipated
};

struct LocalizedBalance {
  Complex center;
  double radius = 0.0;
  double epsilon = 0.0;
  double t0 = 0.0, t1 = 0.0;
  double energy_start = 0.0;     // weighted local energy at t0
  double energy_end = 0.0;       // weighted local energy at t1
  double dissipated = 0.0;       // 4 int int |u_t|^2 phi^2
  double inferred_constant = 0.0;  // (lhs - 4 rhs) / (eps E0), reported only
};

struct DissipationReport {
  std::vector<DissipationInterval> intervals;  // between consecutive snapshots
  double global_defect = 0.0;  // E(T) - E(0) + total dissipation
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double total_dissipated = 0.0;
  bool global_inequality_holds = false;  // E(T) + dissipation <= E(0) + tol
  std::optional<LocalizedBalance> localized;
};

/// Per-interval and global energy-dissipation bookkeeping over a trajectory;
/// optionally evaluates the localized balance on a cutoff around (z0, R).
DissipationReport dissipation_report(const flow::Trajectory& traj,
                                     const targets::TargetManifold& target,
                                     std::optional<Complex> z0 = std::nullopt, double R = 0.25,
                                     double epsilon = 0.5);

}  // namespace plateau::diag
