#include "plateau/flow.hpp"

#include <cmath>
#include <numbers>

#include "plateau/diagnostics.hpp"
#include "plateau/spectral.hpp"

namespace plateau::flow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct GridEval {
  GridSamples tangential;    // dpi_N(u) du/dr at the grid samples
  GridSamples radial;        // du/dr at the grid samples
  double residual = 0.0;     // L2(S^1) grid norm of the tangential part
  double radial_norm2 = 0.0; // squared L2 grid norm of du/dr
};

// DtN followed by the pointwise tangential/normal split on the dealiased
// grid. Throws OutsideTubularNeighborhood when a sample leaves N_rho.
GridEval split_radial_derivative(const BoundaryField& u, const targets::TargetManifold& target,
                                 int grid_size) {
  const int M = grid_size;
  const GridSamples us = spectral::synthesize(u, M);
  const GridSamples ws = spectral::synthesize(spectral::dtn(u), M);
  GridEval out;
  out.tangential = GridSamples(u.n_components(), M);
  out.radial = ws;
  double tan2 = 0.0, rad2 = 0.0;
  for (int m = 0; m < M; ++m) {
    const Eigen::VectorXd foot = target.project(us.values.col(m));
    const Eigen::VectorXd tang = target.tangent_project(foot, ws.values.col(m));
    out.tangential.values.col(m) = tang;
    tan2 += tang.squaredNorm();
    rad2 += ws.values.col(m).squaredNorm();
  }
  out.residual = std::sqrt(kTwoPi / M * tan2);
  out.radial_norm2 = kTwoPi / M * rad2;
  return out;
}

double phi1(double z) {
  return std::abs(z) < 1e-12 ? 1.0 + 0.5 * z : std::expm1(z) / z;
}

double max_manifold_distance(const BoundaryField& u, const targets::TargetManifold& target,
                             int grid_size) {
  const GridSamples s = spectral::synthesize(u, grid_size);
  double defect = 0.0;
  for (int m = 0; m < grid_size; ++m)
    defect = std::max(defect, target.distance_to(s.values.col(m)));
  return defect;
}

}  // namespace

Scheme scheme_from_string(const std::string& name) {
  if (name == "euler_project") return Scheme::EulerProject;
  if (name == "rk4_project") return Scheme::Rk4Project;
  if (name == "imex_factor") return Scheme::ImexFactor;
  throw std::invalid_argument("unknown scheme: " + name);
}

std::string scheme_to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::EulerProject: return "euler_project";
    case Scheme::Rk4Project: return "rk4_project";
    case Scheme::ImexFactor: return "imex_factor";
  }
  return "?";
}

std::string termination_to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::TMaxReached: return "t_max_reached";
    case Termination::ConcentrationDetected: return "concentration_detected";
    case Termination::StepRejectedFloor: return "step_rejected_floor";
  }
  return "?";
}

double FlowConfig::stability_cap() const {
  return dt_policy.c_stab / ((1.0 + epsilon) * std::max(1, max_mode));
}

std::vector<double> FlowConfig::radius_ladder() const {
  std::vector<double> ladder(ladder_levels);
  for (int j = 0; j < ladder_levels; ++j) ladder[j] = ladder_top * std::pow(2.0, -j);
  return ladder;
}

void FlowConfig::validate() const {
  if (max_mode < 1) throw std::invalid_argument("flow config: max_mode must be >= 1");
  if (!(t_max > 0.0)) throw std::invalid_argument("flow config: t_max must be positive");
  if (!(residual_tol > 0.0)) throw std::invalid_argument("flow config: residual_tol must be positive");
  if (grid_size != 0 && grid_size < 3 * max_mode + 1)
    throw std::invalid_argument("flow config: grid_size must be >= 3K+1 for dealiased projection");
  if (epsilon < 0.0) throw std::invalid_argument("flow config: epsilon must be >= 0");
  if (snapshot_interval < 0.0) throw std::invalid_argument("flow config: snapshot_interval must be >= 0");
  if (!(dt_floor > 0.0)) throw std::invalid_argument("flow config: dt_floor must be positive");
  if (delta_conc < 0.0) throw std::invalid_argument("flow config: delta_conc must be >= 0");
  if (!(ladder_top > 0.0) || ladder_levels < 1)
    throw std::invalid_argument("flow config: radius ladder must be nonempty with positive top");
  if (lattice_size < 4) throw std::invalid_argument("flow config: lattice_size must be >= 4");
  if (!(on_manifold_tol > 0.0)) throw std::invalid_argument("flow config: on_manifold_tol must be positive");
  if (dt_policy.adaptive) {
    if (!(dt_policy.safety > 0.0 && dt_policy.safety <= 1.0))
      throw std::invalid_argument("flow config: adaptive safety factor must lie in (0, 1]");
    if (!(dt_policy.c_stab > 0.0)) throw std::invalid_argument("flow config: c_stab must be positive");
  } else {
    if (!(dt_policy.dt > 0.0)) throw std::invalid_argument("flow config: fixed dt must be positive");
    if (scheme != Scheme::ImexFactor && dt_policy.dt > stability_cap() * (1.0 + 1e-12))
      throw std::invalid_argument("flow config: fixed dt exceeds the stability cap c_stab/K");
  }
}

StepFloorError::StepFloorError(double dt)
    : std::runtime_error("step rejected: dt " + std::to_string(dt) + " fell below the floor") {}

BoundaryField rhs(const BoundaryField& u, const targets::TargetManifold& target, int grid_size) {
  const int M = grid_size > 0 ? grid_size : 3 * u.max_mode() + 1;
  const GridEval ev = split_radial_derivative(u, target, M);
  return spectral::analyze(ev.tangential, u.max_mode()) * (-1.0);
}

BoundaryField rhs_regularized(const BoundaryField& u, const targets::TargetManifold& target,
                              double epsilon, int grid_size) {
  BoundaryField f = rhs(u, target, grid_size);
  if (epsilon != 0.0) f = f - spectral::dtn(u) * epsilon;
  return f;
}

BoundaryField project_to_target(const BoundaryField& u, const targets::TargetManifold& target,
                                int grid_size, int max_mode) {
  const GridSamples s = spectral::synthesize(u, grid_size);
  GridSamples projected(u.n_components(), grid_size);
  for (int m = 0; m < grid_size; ++m) projected.values.col(m) = target.project(s.values.col(m));
  return spectral::analyze(projected, max_mode);
}

namespace {

BoundaryField reproject_if(const BoundaryField& u, const FlowConfig& cfg,
                           const targets::TargetManifold& target) {
  if (!cfg.reprojection) return u;
  return project_to_target(u, target, cfg.dealias_grid(), cfg.max_mode);
}

BoundaryField attempt_step(const BoundaryField& u, double dt, const FlowConfig& cfg,
                           const targets::TargetManifold& target) {
  const int M = cfg.dealias_grid();
  const int K = cfg.max_mode;
  const double eps = cfg.epsilon;
  switch (cfg.scheme) {
    case Scheme::EulerProject: {
      const GridEval ev = split_radial_derivative(u, target, M);
      BoundaryField f = spectral::analyze(ev.tangential, K) * (-1.0);
      if (eps != 0.0) f = f - spectral::dtn(u) * eps;
      return reproject_if(u + f * dt, cfg, target);
    }
    case Scheme::Rk4Project: {
      auto force = [&](const BoundaryField& v) { return rhs_regularized(v, target, eps, M); };
      const BoundaryField k1 = force(u);
      const BoundaryField u2 = reproject_if(u + k1 * (0.5 * dt), cfg, target);
      const BoundaryField k2 = force(u2);
      const BoundaryField u3 = reproject_if(u + k2 * (0.5 * dt), cfg, target);
      const BoundaryField k3 = force(u3);
      const BoundaryField u4 = reproject_if(u + k3 * dt, cfg, target);
      const BoundaryField k4 = force(u4);
      const BoundaryField sum = (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
      return reproject_if(u + sum, cfg, target);
    }
    case Scheme::ImexFactor: {
      // u_t = -(1 + eps) du/dr + dpi_perp(u) du/dr: integrate the linear part
      // exactly mode-by-mode, treat the normal remainder explicitly.
      const GridEval ev = split_radial_derivative(u, target, M);
      GridSamples normal = ev.radial;
      normal.values -= ev.tangential.values;
      const BoundaryField g = spectral::analyze(normal, K);
      Eigen::MatrixXcd coeffs(u.n_components(), 2 * K + 1);
      for (int k = -K; k <= K; ++k) {
        const double lambda = (1.0 + eps) * std::abs(k);
        const double decay = std::exp(-lambda * dt);
        const double weight = dt * phi1(-lambda * dt);
        for (int j = 0; j < u.n_components(); ++j)
          coeffs(j, k + K) = decay * u.coeff(j, k) + weight * g.coeff(j, k);
      }
      return reproject_if(BoundaryField::from_modes(coeffs), cfg, target);
    }
  }
  throw std::logic_error("unreachable scheme");
}

}  // namespace

FlowState step(const FlowState& state, const FlowConfig& cfg, const targets::TargetManifold& target) {
  cfg.validate();
  const double cap = cfg.dt_policy.adaptive ? cfg.dt_policy.safety * cfg.stability_cap()
                                            : cfg.dt_policy.dt;
  double dt = cap;
  if (cfg.dt_policy.adaptive && state.last_dt > 0.0)
    dt = std::min(state.last_dt * 1.25, cap);
  dt = std::min(dt, std::max(cfg.t_max - state.t, cfg.dt_floor));

  while (true) {
    if (dt < cfg.dt_floor) throw StepFloorError(dt);
    try {
      BoundaryField next = attempt_step(state.field, dt, cfg, target);
      if (!next.is_finite()) throw std::runtime_error("flow produced a non-finite field");
      FlowState out;
      out.t = state.t + dt;
      out.field = std::move(next);
      out.step_count = state.step_count + 1;
      out.last_dt = dt;
      out.on_manifold_defect = max_manifold_distance(out.field, target, cfg.dealias_grid());
      return out;
    } catch (const targets::OutsideTubularNeighborhood&) {
      dt *= 0.5;  // reject and retry: the step left the projection domain
    }
  }
}

Trajectory run(const BoundaryField& u0, const FlowConfig& cfg, const targets::TargetManifold& target) {
  cfg.validate();
  if (u0.n_components() != target.ambient_dim())
    throw std::invalid_argument("initial data dimension does not match the target");

  Trajectory traj;
  FlowState state;
  state.field = project_to_target(u0, target, cfg.dealias_grid(), cfg.max_mode);
  state.on_manifold_defect = max_manifold_distance(state.field, target, cfg.dealias_grid());

  const diag::ScanOptions scan_opts{cfg.delta_conc, cfg.radius_ladder(), cfg.lattice_size};
  std::optional<double> last_scan_max;
  double next_snapshot = 0.0;
  bool done = false;

  while (true) {
    SeriesRow row;
    row.t = state.t;
    row.energy = spectral::dirichlet_energy(state.field);
    row.energy_half = spectral::half_energy(state.field);
    const GridEval ev = split_radial_derivative(state.field, target, cfg.dealias_grid());
    row.residual = ev.residual;
    row.dissipation = ev.residual * ev.residual + cfg.epsilon * ev.radial_norm2;
    if (state.field.n_components() == 2) {
      try {
        row.degree = spectral::winding_degree(state.field);
      } catch (const std::domain_error&) {
        row.degree = std::nullopt;
      }
    }

    const bool snapshot_due =
        traj.snapshots.empty() || (cfg.snapshot_interval > 0.0 && state.t >= next_snapshot - 1e-12);
    if (snapshot_due) {
      traj.snapshots.push_back(state);
      next_snapshot = state.t + cfg.snapshot_interval;
      if (cfg.delta_conc > 0.0) {
        const diag::ScanResult scan = diag::scan_concentration(state.field, state.t, scan_opts);
        last_scan_max = scan.max_local_energy;
        if (!scan.events.empty()) {
          row.max_local_energy = last_scan_max;
          traj.series.push_back(row);
          traj.events.insert(traj.events.end(), scan.events.begin(), scan.events.end());
          traj.termination = Termination::ConcentrationDetected;
          done = true;
        }
      }
    }
    if (done) break;

    row.max_local_energy = last_scan_max;
    traj.series.push_back(row);

    if (row.residual <= cfg.residual_tol) {
      traj.termination = Termination::Converged;
      break;
    }
    if (state.t >= cfg.t_max - 1e-12) {
      traj.termination = Termination::TMaxReached;
      break;
    }
    try {
      state = step(state, cfg, target);
    } catch (const StepFloorError&) {
      traj.termination = Termination::StepRejectedFloor;
      break;
    }
  }

  if (traj.snapshots.empty() || traj.snapshots.back().t < state.t - 1e-15)
    traj.snapshots.push_back(state);
  return traj;
}

}  // namespace plateau::flow
