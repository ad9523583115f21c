#include "plateau/curve_target.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "plateau/quadrature.hpp"

namespace plateau::targets {

namespace {

Eigen::MatrixXd stack_points(const std::vector<Eigen::VectorXd>& pts) {
  const int n = static_cast<int>(pts.front().size());
  Eigen::MatrixXd m(n, static_cast<int>(pts.size()));
  for (int i = 0; i < m.cols(); ++i) {
    if (pts[i].size() != n) throw std::invalid_argument("control points have mixed dimensions");
    m.col(i) = pts[i];
  }
  return m;
}

// Arclength of a spline segment by 16-point Gauss-Legendre.
double segment_length(const PeriodicSpline& spline, double a, double b) {
  const GaussLegendre rule = gauss_legendre_on(16, a, b);
  double len = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i)
    len += rule.weights[i] * spline.derivative(rule.nodes[i]).norm();
  return len;
}

// Resample a closed spline to a uniform-arclength knot grid.
PeriodicSpline arclength_resample(const PeriodicSpline& spline, int table_size, double* length_out) {
  const int n = spline.size();
  std::vector<double> breaks(n + 1);
  std::vector<double> cum(n + 1, 0.0);
  // Knot positions of the source spline are implicit; re-derive by walking
  // its period in n equal parameter segments would lose accuracy, so use
  // fine sampling: split the period into 4n panels.
  const int panels = 4 * n;
  std::vector<double> s_at(panels + 1, 0.0);
  const double period = spline.period();
  for (int i = 0; i < panels; ++i) {
    const double a = period * i / panels;
    const double b = period * (i + 1) / panels;
    s_at[i + 1] = s_at[i] + segment_length(spline, a, b);
  }
  const double total = s_at[panels];
  if (length_out) *length_out = total;

  Eigen::VectorXd knots(table_size);
  Eigen::MatrixXd values(spline.dimension(), table_size);
  for (int j = 0; j < table_size; ++j) {
    const double target = total * j / table_size;
    // bracket then bisect/Newton on s(t) = target
    int lo = 0;
    int hi = panels;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if (s_at[mid] <= target)
        lo = mid;
      else
        hi = mid;
    }
    double ta = period * lo / panels, tb = period * hi / panels;
    double sa = s_at[lo];
    double t = ta;
    for (int it = 0; it < 60; ++it) {
      const double tm = 0.5 * (ta + tb);
      const double sm = sa + segment_length(spline, ta, tm);
      if (sm <= target) {
        ta = tm;
        sa = sm;
      } else {
        tb = tm;
      }
      t = 0.5 * (ta + tb);
      if (tb - ta < 1e-14 * period) break;
    }
    knots[j] = total * j / table_size;
    values.col(j) = spline.eval(t);
  }
  return PeriodicSpline::fit(knots, values, total);
}

// Rotation-minimizing transport of an initial normal along the sampled curve
// (double-reflection), then uniform twist so the frame closes up.
Eigen::MatrixXd build_rmf_table(const PeriodicSpline& curve, int table_size) {
  const double L = curve.period();
  std::vector<Eigen::Vector3d> x(table_size + 1), tan(table_size + 1);
  for (int i = 0; i <= table_size; ++i) {
    const double s = L * i / table_size;
    x[i] = curve.eval(s);
    tan[i] = curve.derivative(s).normalized();
  }
  // initial normal: axis least aligned with the tangent, orthonormalized
  int axis = 0;
  for (int d = 1; d < 3; ++d)
    if (std::abs(tan[0][d]) < std::abs(tan[0][axis])) axis = d;
  Eigen::Vector3d nu = Eigen::Vector3d::Unit(axis);
  nu = (nu - nu.dot(tan[0]) * tan[0]).normalized();
  const Eigen::Vector3d nu0 = nu;
  const Eigen::Vector3d bi0 = tan[0].cross(nu0);

  Eigen::MatrixXd table(3, table_size);
  table.col(0) = nu;
  for (int i = 0; i < table_size; ++i) {
    const Eigen::Vector3d v1 = x[i + 1] - x[i];
    const double c1 = v1.squaredNorm();
    if (c1 == 0.0) throw std::invalid_argument("degenerate curve sample spacing");
    const Eigen::Vector3d nu_l = nu - (2.0 / c1) * v1.dot(nu) * v1;
    const Eigen::Vector3d tan_l = tan[i] - (2.0 / c1) * v1.dot(tan[i]) * v1;
    const Eigen::Vector3d v2 = tan[i + 1] - tan_l;
    const double c2 = v2.squaredNorm();
    nu = (c2 == 0.0) ? nu_l : (nu_l - (2.0 / c2) * v2.dot(nu_l) * v2).eval();
    nu = (nu - nu.dot(tan[i + 1]) * tan[i + 1]).normalized();
    if (i + 1 < table_size) table.col(i + 1) = nu;
  }
  // closure defect in the normal plane at s = 0
  const double defect = std::atan2(nu.dot(bi0), nu.dot(nu0));
  for (int i = 0; i < table_size; ++i) {
    const double twist = -defect * (L * i / table_size) / L;
    const Eigen::Vector3d t_i = tan[i];
    const Eigen::Vector3d n_i = table.col(i);
    const Eigen::Vector3d b_i = t_i.cross(n_i);
    table.col(i) = std::cos(twist) * n_i + std::sin(twist) * b_i;
  }
  return table;
}

}  // namespace

Eigen::VectorXd CurveTarget::tangent_at(double s) const {
  return position_.derivative(s).normalized();
}

Eigen::MatrixXd CurveTarget::frame_at(double s) const {
  const int n = ambient_dim();
  const Eigen::VectorXd tan = tangent_at(s);
  Eigen::MatrixXd frame(n, n - 1);
  if (n == 2) {
    // right normal of the oriented tangent (outward for a counterclockwise curve)
    frame(0, 0) = tan[1];
    frame(1, 0) = -tan[0];
  } else {
    Eigen::Vector3d nu = frame1_.eval(s);
    const Eigen::Vector3d t3(tan[0], tan[1], tan[2]);
    nu = (nu - nu.dot(t3) * t3).normalized();
    frame.col(0) = nu;
    frame.col(1) = t3.cross(nu);
  }
  return frame;
}

std::optional<double> CurveTarget::locate(const Eigen::VectorXd& q) const {
  const double L = length();
  // dense scan for the global minimizer
  double best_s = 0.0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < seed_grid_; ++i) {
    const double s = L * i / seed_grid_;
    const double d2 = (q - position_.eval(s)).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = s;
    }
  }
  if (best_d2 >= (rho_ + L / seed_grid_) * (rho_ + L / seed_grid_)) return std::nullopt;
  // Newton on g(s) = <q - gamma, gamma'> = 0; g' = -|gamma'|^2 + <q - gamma, gamma''>
  double s = best_s;
  for (int it = 0; it < 60; ++it) {
    const Eigen::VectorXd gamma = position_.eval(s);
    const Eigen::VectorXd dgamma = position_.derivative(s);
    const Eigen::VectorXd ddgamma = position_.second_derivative(s);
    const Eigen::VectorXd diff = q - gamma;
    const double g = diff.dot(dgamma);
    const double dg = -dgamma.squaredNorm() + diff.dot(ddgamma);
    if (dg >= -1e-12) break;  // outside the well-conditioned zone
    const double step = g / dg;
    s -= step;
    if (std::abs(step) < 1e-15 * L) break;
  }
  s -= L * std::floor(s / L);
  if ((q - position_.eval(s)).norm() >= rho_) return std::nullopt;
  return s;
}

std::optional<Eigen::VectorXd> CurveTarget::try_project(const Eigen::VectorXd& q) const {
  const auto s = locate(q);
  if (!s) return std::nullopt;
  return position_.eval(*s);
}

Eigen::MatrixXd CurveTarget::normal_frame(const Eigen::VectorXd& p) const {
  const auto s = locate(p);
  if (!s) throw OutsideTubularNeighborhood(distance_to(p), rho_);
  return frame_at(*s);
}

Eigen::VectorXd CurveTarget::tangent_project(const Eigen::VectorXd& p,
                                             const Eigen::VectorXd& X) const {
  const auto s = locate(p);
  if (!s) throw OutsideTubularNeighborhood(distance_to(p), rho_);
  const Eigen::VectorXd tan = tangent_at(*s);
  return tan.dot(X) * tan;
}

Eigen::MatrixXd CurveTarget::dist_gradient(const Eigen::VectorXd& q) const {
  const auto s_opt = locate(q);
  if (!s_opt) throw OutsideTubularNeighborhood(distance_to(q), rho_);
  const double s = *s_opt;
  const int n = ambient_dim();
  const int m = n - 1;
  const Eigen::MatrixXd frame = frame_at(s);
  const Eigen::VectorXd y = frame.transpose() * (q - position_.eval(s));
  // Tubular coordinates T(s, y) = gamma(s) + sum y^i nu_i(s); the rows of the
  // inverse Jacobian are the gradients of (s, y^1, ..., y^m).
  const double h = 1e-6 * std::max(1.0, length());
  Eigen::MatrixXd jac(n, n);
  Eigen::VectorXd col0 = position_.derivative(s);
  const Eigen::MatrixXd frame_p = frame_at(s + h);
  const Eigen::MatrixXd frame_m = frame_at(s - h);
  for (int i = 0; i < m; ++i) col0 += y[i] * (frame_p.col(i) - frame_m.col(i)) / (2.0 * h);
  jac.col(0) = col0;
  for (int i = 0; i < m; ++i) jac.col(i + 1) = frame.col(i);
  const Eigen::MatrixXd inv = jac.inverse();
  Eigen::MatrixXd grad(n, m);
  for (int i = 0; i < m; ++i) grad.col(i) = inv.row(i + 1).transpose();
  return grad;
}

double CurveTarget::distance_to(const Eigen::VectorXd& q) const {
  // scan only: valid beyond the tubular radius
  const double L = length();
  double best = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  for (int i = 0; i < seed_grid_; ++i) {
    const double s = L * i / seed_grid_;
    const double d = (q - position_.eval(s)).norm();
    if (d < best) {
      best = d;
      best_s = s;
    }
  }
  // one ternary-search refinement around the best sample
  double a = best_s - L / seed_grid_, b = best_s + L / seed_grid_;
  for (int it = 0; it < 80; ++it) {
    const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
    if ((q - position_.eval(m1)).squaredNorm() < (q - position_.eval(m2)).squaredNorm())
      b = m2;
    else
      a = m1;
  }
  return std::min(best, (q - position_.eval(0.5 * (a + b))).norm());
}

CurveTarget build_curve(const std::vector<Eigen::VectorXd>& control_points,
                        const CurveOptions& options) {
  if (control_points.size() < 4)
    throw std::invalid_argument("closed curve needs at least 4 control points");
  const Eigen::MatrixXd pts = stack_points(control_points);
  const int n = static_cast<int>(pts.rows());
  if (n != 2 && n != 3) throw std::invalid_argument("curve targets support ambient dimension 2 or 3");

  // degenerate input: all points on a line (rank of centered cloud < 2)
  Eigen::MatrixXd centered = pts.colwise() - pts.rowwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  if (svd.singularValues()[1] < 1e-10 * std::max(1.0, svd.singularValues()[0]))
    throw std::invalid_argument("degenerate control points: collinear input");

  // chord-length parameters
  const int npts = static_cast<int>(pts.cols());
  Eigen::VectorXd knots(npts);
  knots[0] = 0.0;
  for (int i = 1; i < npts; ++i) {
    const double chord = (pts.col(i) - pts.col(i - 1)).norm();
    if (chord == 0.0) throw std::invalid_argument("degenerate control points: repeated point");
    knots[i] = knots[i - 1] + chord;
  }
  const double period = knots[npts - 1] + (pts.col(0) - pts.col(npts - 1)).norm();
  PeriodicSpline chord_spline = PeriodicSpline::fit(knots, pts, period);

  // two passes of arclength reparametrization
  CurveTarget curve;
  double length = 0.0;
  PeriodicSpline resampled = arclength_resample(chord_spline, options.table_size, &length);
  resampled = arclength_resample(resampled, options.table_size, &length);
  curve.position_ = resampled;

  // curvature and self-distance from the dense table
  const int table = options.table_size;
  double max_curv = 0.0;
  Eigen::MatrixXd samples(n, table);
  for (int i = 0; i < table; ++i) {
    const double s = length * i / table;
    samples.col(i) = resampled.eval(s);
    max_curv = std::max(max_curv, resampled.second_derivative(s).norm());
  }
  double min_self = std::numeric_limits<double>::infinity();
  const int window = table / 6;  // pairs at least L/6 apart along the curve
  const int stride = std::max(1, table / 1024);
  for (int i = 0; i < table; i += stride)
    for (int j = i + window; j <= i + table - window; j += stride) {
      const double d = (samples.col(i) - samples.col(j % table)).norm();
      min_self = std::min(min_self, d);
    }
  if (!(min_self > 1e-9 * length))
    throw std::invalid_argument("self-intersecting control polygon: curve returns to itself");

  curve.max_curvature_ = max_curv;
  curve.min_self_distance_ = min_self;
  curve.rho_ = options.rho_override > 0.0
                   ? options.rho_override
                   : std::min(0.9 / std::max(max_curv, 1e-12), 0.45 * min_self);
  curve.seed_grid_ = std::max(256, static_cast<int>(std::ceil(16.0 * length / curve.rho_)));

  if (n == 3) {
    const Eigen::MatrixXd frame_table = build_rmf_table(resampled, table);
    Eigen::VectorXd frame_knots(table);
    for (int i = 0; i < table; ++i) frame_knots[i] = length * i / table;
    curve.frame1_ = PeriodicSpline::fit(frame_knots, frame_table, length);
    // sanity: transported frame must not rotate faster than the table resolves
    for (int i = 0; i < table; ++i) {
      const int j = (i + 1) % table;
      if (frame_table.col(i).dot(frame_table.col(j)) < 0.0)
        throw std::invalid_argument("frame closure failure: table too coarse for curve torsion");
    }
  }
  return curve;
}

std::vector<Eigen::VectorXd> load_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open curve file: " + path);
  std::vector<Eigen::VectorXd> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::invalid_argument("curve file has a non-numeric cell: " + cell);
      }
    }
    if (row.empty()) continue;
    Eigen::VectorXd p(static_cast<int>(row.size()));
    for (int i = 0; i < p.size(); ++i) p[i] = row[i];
    if (!pts.empty() && pts.front().size() != p.size())
      throw std::invalid_argument("curve file has inconsistent column counts");
    pts.push_back(std::move(p));
  }
  if (pts.size() < 4) throw std::invalid_argument("curve file needs at least 4 points");
  return pts;
}

std::vector<Eigen::VectorXd> ellipse_points(double semi_a, double semi_b, int n_points) {
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double t = 2.0 * std::numbers::pi * i / n_points;
    Eigen::VectorXd p(2);
    p << semi_a * std::cos(t), semi_b * std::sin(t);
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace plateau::targets
