#include "plateau/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "plateau/mobius.hpp"
#include "plateau/oracles.hpp"
#include "plateau/spectral.hpp"

namespace plateau::diag {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

int dealias(const BoundaryField& u, int grid_size) {
  return grid_size > 0 ? grid_size : 3 * u.max_mode() + 1;
}
}  // namespace

double residual(const BoundaryField& u, const targets::TargetManifold& target, int grid_size) {
  const int M = dealias(u, grid_size);
  const GridSamples us = spectral::synthesize(u, M);
  const GridSamples ws = spectral::synthesize(spectral::dtn(u), M);
  double sum = 0.0;
  for (int m = 0; m < M; ++m) {
    const Eigen::VectorXd foot = target.project(us.values.col(m));
    sum += target.tangent_project(foot, ws.values.col(m)).squaredNorm();
  }
  return std::sqrt(kTwoPi / M * sum);
}

double pythagoras_check(const BoundaryField& u, const targets::TargetManifold& target,
                        int grid_size) {
  const int M = dealias(u, grid_size);
  const GridSamples us = spectral::synthesize(u, M);
  const GridSamples ws = spectral::synthesize(spectral::dtn(u), M);
  double defect = 0.0;
  for (int m = 0; m < M; ++m) {
    const Eigen::VectorXd foot = target.project(us.values.col(m));
    const Eigen::VectorXd w = ws.values.col(m);
    const double tan2 = target.tangent_project(foot, w).squaredNorm();
    const double nor2 = target.normal_project(foot, w).squaredNorm();
    defect = std::max(defect, std::abs(w.squaredNorm() - tan2 - nor2));
  }
  return defect;
}

DistLaplaceResult dist_laplace_check(const BoundaryField& u, const targets::TargetManifold& target,
                                     const std::vector<Complex>& interior_points, double h_scale) {
  DistLaplaceResult result;
  const double rho = target.tubular_radius();
  const int m_codim = target.codim();
  for (const Complex& z : interior_points) {
    const double r = std::abs(z);
    if (r >= 1.0) {
      ++result.skipped;
      continue;
    }
    const double h = h_scale * std::min(0.01, (1.0 - r) / 4.0);
    const Complex offsets[5] = {z, z + h, z - h, z + Complex(0.0, h), z - Complex(0.0, h)};
    Eigen::MatrixXd dist_vals(m_codim, 5);
    Eigen::VectorXd center_point;
    bool ok = true;
    for (int s = 0; s < 5; ++s) {
      const Eigen::VectorXd q = spectral::eval_extension(u, std::abs(offsets[s]), std::arg(offsets[s]));
      try {
        const Eigen::VectorXd hc = target.dist_components(q);
        if (hc.lpNorm<Eigen::Infinity>() >= 0.5 * rho) {
          ok = false;  // outside N_{rho/2}: the cutoff would distort the identity
          break;
        }
        dist_vals.col(s) = hc;
      } catch (const targets::OutsideTubularNeighborhood&) {
        ok = false;
        break;
      }
      if (s == 0) center_point = q;
    }
    if (!ok) {
      ++result.skipped;
      continue;
    }
    const spectral::ExtensionGradient g = spectral::grad_extension(u, r, std::arg(z));
    const std::vector<Eigen::MatrixXd> jac = target.normal_jacobian(center_point);
    for (int i = 0; i < m_codim; ++i) {
      const double fd_laplace = (dist_vals(i, 1) + dist_vals(i, 2) + dist_vals(i, 3) +
                                 dist_vals(i, 4) - 4.0 * dist_vals(i, 0)) /
                                (h * h);
      const double rhs = g.dx.dot(jac[i] * g.dx) + g.dy.dot(jac[i] * g.dy);
      result.max_defect = std::max(result.max_defect, std::abs(fd_laplace - rhs));
    }
    ++result.evaluated;
  }
  return result;
}

std::vector<Complex> hopf_differential(const BoundaryField& u, const std::vector<Complex>& points) {
  std::vector<Complex> values;
  values.reserve(points.size());
  for (const Complex& z : points) {
    const spectral::ExtensionGradient g = spectral::grad_extension(u, std::abs(z), std::arg(z));
    values.emplace_back(g.dx.squaredNorm() - g.dy.squaredNorm(), -2.0 * g.dx.dot(g.dy));
  }
  return values;
}

double conformality_defect(const BoundaryField& u) {
  std::vector<Complex> lattice;
  for (int ir = 0; ir < 10; ++ir) {
    const double r = 0.05 + 0.1 * ir;
    for (int ia = 0; ia < 64; ++ia) lattice.push_back(std::polar(r, kTwoPi * ia / 64.0));
  }
  double defect = 0.0;
  for (const Complex& f : hopf_differential(u, lattice)) defect = std::max(defect, std::abs(f));
  return defect;
}

ScanResult scan_concentration(const BoundaryField& raw_field, double t, const ScanOptions& opts) {
  if (!(opts.delta_conc > 0.0)) throw std::invalid_argument("concentration scan needs delta_conc > 0");
  if (opts.ladder.empty()) throw std::invalid_argument("concentration scan needs a radius ladder");
  const bool cap = opts.scan_mode_cap > 0 && raw_field.max_mode() > opts.scan_mode_cap;
  BoundaryField field = raw_field;
  if (cap) {  // drop the tail columns so per-node evaluation cost shrinks too
    const int K = raw_field.max_mode(), Kc = opts.scan_mode_cap;
    field = BoundaryField::from_modes(
        raw_field.modes().middleCols(K - Kc, 2 * Kc + 1).eval());
  }
  std::vector<double> ladder = opts.ladder;
  std::sort(ladder.begin(), ladder.end(), std::greater<double>());
  const double r_min = ladder.back();

  ScanResult result;
  struct Candidate {
    Complex center;
    double value;
  };
  std::vector<Candidate> firing;
  for (int l = 0; l < opts.lattice_size; ++l) {
    const Complex z0 = std::polar(1.0, kTwoPi * l / opts.lattice_size);
    double smallest_value = 0.0;
    for (double R : ladder) {
      const double e = spectral::local_energy(field, z0, R);
      result.max_local_energy = std::max(result.max_local_energy, e);
      if (R == r_min) smallest_value = e;
    }
    if (smallest_value >= opts.delta_conc) firing.push_back({z0, smallest_value});
  }
  // cluster: keep strongest centers separated by at least the firing radius
  std::sort(firing.begin(), firing.end(),
            [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
  for (const Candidate& c : firing) {
    bool close = false;
    for (const ConcentrationEvent& kept : result.events)
      if (std::abs(c.center - kept.center) < r_min) close = true;
    if (!close) result.events.push_back({c.center, r_min, c.value, t});
  }
  return result;
}

std::vector<ConcentrationEvent> detect_concentration(std::span<const flow::FlowState> window,
                                                     const ScanOptions& opts) {
  std::vector<ConcentrationEvent> events;
  for (const flow::FlowState& state : window) {
    const ScanResult scan = scan_concentration(state.field, state.t, opts);
    events.insert(events.end(), scan.events.begin(), scan.events.end());
  }
  return events;
}

StaleEventError::StaleEventError()
    : std::runtime_error("event stale: local energy has dispersed since detection") {}

namespace {

// max/mean imbalance of the boundary energy density of u composed with the
// zoom chart of scale sigma about the boundary angle beta.
double density_imbalance(const BoundaryField& du_dphi, double sigma, double beta) {
  const MobiusParams chart{-std::polar(1.0 - sigma, beta), 0.0};
  const int M = std::clamp(4 * du_dphi.max_mode() + 1, 1024, 4096);
  double max_d = 0.0, mean_d = 0.0;
  for (int m = 0; m < M; ++m) {
    const double phi = GridSamples::angle(m, M);
    const double psi = chart.boundary_angle(phi);
    const double jac = chart.boundary_derivative(phi);
    const double density = spectral::eval_boundary(du_dphi, psi).squaredNorm() * jac * jac;
    max_d = std::max(max_d, density);
    mean_d += density;
  }
  mean_d /= M;
  return mean_d > 0.0 ? max_d / mean_d : std::numeric_limits<double>::infinity();
}

}  // namespace

BubbleExtract extract_bubble(const flow::FlowState& state, const ConcentrationEvent& event,
                             const targets::TargetManifold& target,
                             const ExtractionOptions& opts) {
  const BoundaryField& field = state.field;
  const double delta = opts.delta_conc > 0.0 ? opts.delta_conc : 0.5 * event.local_energy;
  if (!(delta > 0.0)) throw StaleEventError();
  std::vector<double> ladder = opts.ladder;
  if (ladder.empty()) ladder = {2.0 * event.radius, event.radius, 0.5 * event.radius};
  std::sort(ladder.begin(), ladder.end(), std::greater<double>());

  if (spectral::local_energy(field, event.center, ladder.front()) < delta) throw StaleEventError();
  double r_k = ladder.front();
  for (double R : ladder) {
    if (spectral::local_energy(field, event.center, R) >= delta) r_k = R;
  }

  const double beta = std::abs(event.center) > 0.0 ? std::arg(event.center) : 0.0;
  const BoundaryField du = spectral::angular_derivative(field);

  // zoom scale: minimize the boundary energy-density imbalance over a
  // log-spaced grid around the firing radius, then refine once
  double best_sigma = std::min(1.0, r_k);
  double best_ratio = std::numeric_limits<double>::infinity();
  for (int j = -12; j <= 4; ++j) {
    const double sigma = std::min(1.0, r_k * std::pow(2.0, j));
    const double ratio = density_imbalance(du, sigma, beta);
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best_sigma = sigma;
    }
    if (sigma >= 1.0) break;
  }
  for (double f : {0.5, 0.70710678118654752, 1.4142135623730951, 2.0}) {
    const double sigma = std::min(1.0, best_sigma * f);
    const double ratio = density_imbalance(du, sigma, beta);
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best_sigma = sigma;
    }
  }

  const int out_mode = opts.out_mode > 0 ? opts.out_mode : field.max_mode();
  const MobiusParams chart{-std::polar(1.0 - best_sigma, beta), 0.0};
  BoundaryField extract = spectral::compose_with_mobius(field, chart, out_mode);

  // gauge: rotate the maximal boundary gradient to angle 0
  const BoundaryField dext = spectral::angular_derivative(extract);
  const int Md = std::max(1024, 4 * out_mode + 1);
  const GridSamples dens = spectral::synthesize(dext, Md);
  int arg_max = 0;
  double max_val = -1.0;
  for (int m = 0; m < Md; ++m) {
    const double v = dens.values.col(m).squaredNorm();
    if (v > max_val) {
      max_val = v;
      arg_max = m;
    }
  }
  const double phi_star = GridSamples::angle(arg_max, Md);
  Eigen::MatrixXcd rotated = extract.modes();
  for (int k = -out_mode; k <= out_mode; ++k)
    rotated.col(k + out_mode) *= std::polar(1.0, k * phi_star);
  extract = BoundaryField::from_modes(rotated);

  BubbleExtract out;
  out.field = extract;
  out.center = event.center;
  out.scale = best_sigma;
  out.energy = spectral::dirichlet_energy(extract);
  out.residual = residual(extract, target);
  out.conformality_defect = conformality_defect(extract);
  return out;
}

DissipationReport dissipation_report(const flow::Trajectory& traj,
                                     const targets::TargetManifold& target,
                                     std::optional<Complex> z0, double R, double epsilon) {
  if (traj.snapshots.size() < 2)
    throw std::invalid_argument("dissipation report needs at least two snapshots");
  DissipationReport report;
  const auto& series = traj.series;

  auto dissipated_between = [&](double a, double b) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < series.size(); ++i) {
      const double lo = std::max(series[i].t, a);
      const double hi = std::min(series[i + 1].t, b);
      if (hi > lo) sum += (hi - lo) * series[i].dissipation;
    }
    return sum;
  };

  double max_dt = 0.0;
  for (std::size_t i = 0; i + 1 < series.size(); ++i)
    max_dt = std::max(max_dt, series[i + 1].t - series[i].t);

  for (std::size_t i = 0; i + 1 < traj.snapshots.size(); ++i) {
    DissipationInterval iv;
    iv.t0 = traj.snapshots[i].t;
    iv.t1 = traj.snapshots[i + 1].t;
    iv.energy_drop = spectral::dirichlet_energy(traj.snapshots[i].field) -
                     spectral::dirichlet_energy(traj.snapshots[i + 1].field);
    iv.dissipated = dissipated_between(iv.t0, iv.t1);
    iv.defect = iv.energy_drop - iv.dissipated;
    report.intervals.push_back(iv);
  }

  report.initial_energy = spectral::dirichlet_energy(traj.snapshots.front().field);
  report.final_energy = spectral::dirichlet_energy(traj.snapshots.back().field);
  report.total_dissipated = dissipated_between(series.front().t, series.back().t);
  report.global_defect = report.final_energy - report.initial_energy + report.total_dissipated;
  const double tol = std::max(1e-10, 2.0 * max_dt * std::max(report.total_dissipated,
                                                             report.initial_energy));
  report.global_inequality_holds =
      report.final_energy + report.total_dissipated <= report.initial_energy + tol;

  if (z0) {
    LocalizedBalance loc;
    loc.center = *z0;
    loc.radius = R;
    loc.epsilon = epsilon;
    loc.t0 = traj.snapshots.front().t;
    const double t1_target = loc.t0 + epsilon * R;
    std::size_t end = traj.snapshots.size() - 1;
    for (std::size_t i = 1; i < traj.snapshots.size(); ++i)
      if (traj.snapshots[i].t <= t1_target + 1e-12) end = i;
    loc.t1 = traj.snapshots[end].t;
    auto weight = [&](Complex z) {
      const double b = targets::smooth_bump(std::abs(z - *z0) / R);
      return b * b;
    };
    loc.energy_start = oracles::disc_energy_quadrature(traj.snapshots.front().field, *z0, R, weight);
    loc.energy_end = oracles::disc_energy_quadrature(traj.snapshots[end].field, *z0, R, weight);
    // boundary-weighted dissipation, trapezoid over snapshot times
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 <= end; ++i) {
      const flow::FlowState& s0 = traj.snapshots[i];
      const flow::FlowState& s1 = traj.snapshots[i + 1];
      auto weighted = [&](const flow::FlowState& s) {
        const BoundaryField f = flow::rhs(s.field, target);
        const int M = 3 * f.max_mode() + 1;
        const GridSamples g = spectral::synthesize(f, M);
        double sum = 0.0;
        for (int m = 0; m < M; ++m) {
          const Complex z = std::polar(1.0, GridSamples::angle(m, M));
          sum += g.values.col(m).squaredNorm() * weight(z);
        }
        return kTwoPi / M * sum;
      };
      acc += 0.5 * (weighted(s0) + weighted(s1)) * (s1.t - s0.t);
    }
    loc.dissipated = 4.0 * acc;
    const double lhs = loc.energy_end + loc.dissipated;
    loc.inferred_constant = std::max(0.0, lhs - 4.0 * loc.energy_start) /
                            std::max(epsilon * report.initial_energy, 1e-300);
    report.localized = loc;
  }
  return report;
}

}  // namespace plateau::diag
