#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plateau/boundary_field.hpp"
#include "plateau/events.hpp"
#include "plateau/targets.hpp"

namespace plateau::flow {

enum class Scheme { EulerProject, Rk4Project, ImexFactor };

Scheme scheme_from_string(const std::string& name);
std::string scheme_to_string(Scheme scheme);

/// Fixed dt, or adaptive: start at safety * c_stab / K, halve on rejected
/// steps, grow back by 5/4 after accepted ones. The cap c_stab / K reflects
/// the |k| growth of the DtN symbol (explicit Euler on u_t = -|k| u needs
/// dt < 2/K).
struct DtPolicy {
  bool adaptive = true;
  double dt = 0.0;  // fixed-mode step
  double safety = 0.9;
  double c_stab = 0.5;
};

struct FlowConfig {
  int max_mode = 32;  // K
  int grid_size = 0;  // collocation grid M; 0 selects 3K+1 (dealiased)
  Scheme scheme = Scheme::EulerProject;
  double epsilon = 0.0;  // normal regularization strength
  DtPolicy dt_policy{};
  double t_max = 10.0;
  double residual_tol = 1e-8;
  double snapshot_interval = 1.0;
  // concentration detection (0 disables the scan)
  double delta_conc = 0.0;
  double ladder_top = 0.4;
  int ladder_levels = 3;
  int lattice_size = 64;
  bool reprojection = true;
  double on_manifold_tol = 1e-9;
  double dt_floor = 1e-12;

  int dealias_grid() const { return grid_size > 0 ? grid_size : 3 * max_mode + 1; }
  double stability_cap() const;
  std::vector<double> radius_ladder() const;
  void validate() const;
};

struct FlowState {
  double t = 0.0;
  BoundaryField field;
  long step_count = 0;
  double last_dt = 0.0;
  double on_manifold_defect = 0.0;
};

enum class Termination { Converged, TMaxReached, ConcentrationDetected, StepRejectedFloor };
std::string termination_to_string(Termination t);

struct SeriesRow {
  double t = 0.0;
  double energy = 0.0;
  double energy_half = 0.0;
  double dissipation = 0.0;  // |u_t|^2 over S^1 = residual^2
  double residual = 0.0;
  std::optional<double> max_local_energy;  // last scan value
  std::optional<int> degree;               // winding number when defined
};

struct Trajectory {
  std::vector<FlowState> snapshots;  // strictly increasing times
  std::vector<SeriesRow> series;     // one row per accepted step (incl. t = 0)
  std::vector<diag::ConcentrationEvent> events;
  Termination termination = Termination::TMaxReached;
};

/// Raised when repeated step rejection drives dt below the floor.
class StepFloorError : public std::runtime_error {
 public:
  explicit StepFloorError(double dt);
};

/// -dpi_N(u) du/dr: DtN, pointwise tangential projection on the dealiased
/// grid, re-analysis. Propagates OutsideTubularNeighborhood.
BoundaryField rhs(const BoundaryField& u, const targets::TargetManifold& target, int grid_size = 0);

/// -(eps + dpi_N(u)) du/dr; reduces to rhs at eps = 0.
BoundaryField rhs_regularized(const BoundaryField& u, const targets::TargetManifold& target,
                              double epsilon, int grid_size = 0);

/// Pointwise projection of the sampled field onto the target, re-analyzed at
/// max_mode.
BoundaryField project_to_target(const BoundaryField& u, const targets::TargetManifold& target,
                                int grid_size, int max_mode);

/// One accepted step of the configured scheme. Rejected steps (projection
/// failures) halve dt and retry internally; below cfg.dt_floor a
/// StepFloorError is thrown.
FlowState step(const FlowState& state, const FlowConfig& cfg, const targets::TargetManifold& target);

/// Integrate from u0 (pointwise projected onto the target first) until the
/// stationarity residual drops below residual_tol, t reaches t_max, a
/// concentration event fires, or dt hits the floor.
Trajectory run(const BoundaryField& u0, const FlowConfig& cfg, const targets::TargetManifold& target);

}  // namespace plateau::flow
