#include "plateau/periodic_spline.hpp"

#include <cmath>
#include <stdexcept>

namespace plateau::targets {

namespace {

// Thomas algorithm; diagonally dominant systems only (spline matrices are).
Eigen::MatrixXd tridiagonal_solve(Eigen::VectorXd sub, Eigen::VectorXd diag, Eigen::VectorXd sup,
                                  Eigen::MatrixXd rhs) {
  const int n = static_cast<int>(diag.size());
  for (int i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs.row(i) -= w * rhs.row(i - 1);
  }
  Eigen::MatrixXd x(rhs.rows(), rhs.cols());
  x.row(n - 1) = rhs.row(n - 1) / diag[n - 1];
  for (int i = n - 2; i >= 0; --i) x.row(i) = (rhs.row(i) - sup[i] * x.row(i + 1)) / diag[i];
  return x;
}

}  // namespace

Eigen::MatrixXd cyclic_tridiagonal_solve(const Eigen::VectorXd& sub, const Eigen::VectorXd& diag,
                                         const Eigen::VectorXd& sup, const Eigen::MatrixXd& rhs) {
  const int n = static_cast<int>(diag.size());
  if (n < 3) throw std::invalid_argument("cyclic tridiagonal system needs n >= 3");
  // Sherman-Morrison: strip the corner entries into a rank-one update.
  const double gamma = -diag[0];
  Eigen::VectorXd d2 = diag;
  d2[0] -= gamma;
  d2[n - 1] -= sup[n - 1] * sub[0] / gamma;
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, 1);
  u(0, 0) = gamma;
  u(n - 1, 0) = sup[n - 1];
  const Eigen::MatrixXd y = tridiagonal_solve(sub, d2, sup, rhs);
  const Eigen::MatrixXd z = tridiagonal_solve(sub, d2, sup, u);
  Eigen::MatrixXd x = y;
  for (int c = 0; c < rhs.cols(); ++c) {
    const double vy = y(0, c) + (sub[0] / gamma) * y(n - 1, c);
    const double vz = z(0, 0) + (sub[0] / gamma) * z(n - 1, 0);
    x.col(c) -= z.col(0) * (vy / (1.0 + vz));
  }
  return x;
}

PeriodicSpline PeriodicSpline::fit(const Eigen::VectorXd& knots, const Eigen::MatrixXd& values,
                                   double period) {
  const int n = static_cast<int>(knots.size());
  if (n < 3) throw std::invalid_argument("periodic spline needs at least 3 knots");
  if (values.cols() != n) throw std::invalid_argument("knot/value count mismatch");
  if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
  for (int i = 0; i + 1 < n; ++i)
    if (!(knots[i] < knots[i + 1])) throw std::invalid_argument("knots must be strictly increasing");
  if (!(knots[n - 1] < knots[0] + period)) throw std::invalid_argument("knots exceed one period");

  auto h = [&](int i) {
    return (i + 1 < n) ? knots[i + 1] - knots[i] : knots[0] + period - knots[n - 1];
  };
  Eigen::VectorXd sub(n), diag(n), sup(n);
  Eigen::MatrixXd rhs(n, values.rows());
  for (int i = 0; i < n; ++i) {
    const int prev = (i + n - 1) % n;
    const double hp = h(prev), hi = h(i);
    sub[i] = hp / 6.0;
    diag[i] = (hp + hi) / 3.0;
    sup[i] = hi / 6.0;
    const Eigen::VectorXd slope_next = (values.col((i + 1) % n) - values.col(i)) / hi;
    const Eigen::VectorXd slope_prev = (values.col(i) - values.col(prev)) / hp;
    rhs.row(i) = (slope_next - slope_prev).transpose();
  }
  PeriodicSpline spline;
  spline.knots_ = knots;
  spline.values_ = values;
  spline.second_ = cyclic_tridiagonal_solve(sub, diag, sup, rhs).transpose();
  spline.period_ = period;
  return spline;
}

int PeriodicSpline::locate(double& t) const {
  const int n = size();
  t -= period_ * std::floor((t - knots_[0]) / period_);
  // binary search for the last knot <= t
  int lo = 0, hi = n;  // segment index in [0, n)
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (knots_[mid] <= t)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

Eigen::VectorXd PeriodicSpline::eval(double t) const {
  const int n = size();
  const int i = locate(t);
  const int j = (i + 1) % n;
  const double t1 = (i + 1 < n) ? knots_[i + 1] : knots_[0] + period_;
  const double hseg = t1 - knots_[i];
  const double a = (t1 - t) / hseg, b = (t - knots_[i]) / hseg;
  return a * values_.col(i) + b * values_.col(j) +
         ((a * a * a - a) * second_.col(i) + (b * b * b - b) * second_.col(j)) * (hseg * hseg) / 6.0;
}

Eigen::VectorXd PeriodicSpline::derivative(double t) const {
  const int n = size();
  const int i = locate(t);
  const int j = (i + 1) % n;
  const double t1 = (i + 1 < n) ? knots_[i + 1] : knots_[0] + period_;
  const double hseg = t1 - knots_[i];
  const double a = (t1 - t) / hseg, b = (t - knots_[i]) / hseg;
  return (values_.col(j) - values_.col(i)) / hseg +
         ((3.0 * b * b - 1.0) * second_.col(j) - (3.0 * a * a - 1.0) * second_.col(i)) * hseg / 6.0;
}

Eigen::VectorXd PeriodicSpline::second_derivative(double t) const {
  const int n = size();
  const int i = locate(t);
  const int j = (i + 1) % n;
  const double t1 = (i + 1 < n) ? knots_[i + 1] : knots_[0] + period_;
  const double hseg = t1 - knots_[i];
  const double a = (t1 - t) / hseg, b = (t - knots_[i]) / hseg;
  return a * second_.col(i) + b * second_.col(j);
}

}  // namespace plateau::targets
