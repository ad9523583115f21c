#include "plateau/targets.hpp"

#include <doctest.h>

#include <numbers>

#include "plateau/curve_target.hpp"
#include "plateau/oracles.hpp"
#include "test_support.hpp"

using namespace plateau;
using namespace plateau::testing;
using plateau::targets::build_curve;
using plateau::targets::CurveTarget;
using plateau::targets::SphereTarget;

namespace {

Eigen::VectorXd vec2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

Eigen::VectorXd vec3(double x, double y, double z) {
  Eigen::VectorXd v(3);
  v << x, y, z;
  return v;
}

std::vector<Eigen::VectorXd> circle_points(int n) {
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < n; ++i) {
    const double t = kTwoPi * i / n;
    pts.push_back(vec2(std::cos(t), std::sin(t)));
  }
  return pts;
}

// closed space curve with nontrivial torsion
std::vector<Eigen::VectorXd> trefoil_points(int n) {
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < n; ++i) {
    const double t = kTwoPi * i / n;
    pts.push_back(vec3(std::sin(t) + 2.0 * std::sin(2.0 * t),
                       std::cos(t) - 2.0 * std::cos(2.0 * t), -std::sin(3.0 * t)));
  }
  return pts;
}

}  // namespace

TEST_CASE("sphere projection and its domain") {
  const SphereTarget sphere(3);
  CHECK_THROWS_AS(sphere.project(vec3(2.0, 0.0, 0.0)), targets::OutsideTubularNeighborhood);

  const SphereTarget circle(2);
  const Eigen::VectorXd p = circle.project(vec2(1.2, 0.0));
  CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.0).epsilon(1e-15));
  // idempotent
  CHECK((circle.project(p) - p).norm() == 0.0);
}

TEST_CASE("sphere tangential projection removes the radial part") {
  const SphereTarget circle(2);
  const Eigen::VectorXd t = circle.tangent_project(vec2(1.0, 0.0), vec2(1.0, 1.0));
  CHECK(t[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(t[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(circle.tangent_project(vec2(0.0, 1.0), vec2(0.0, 0.0)).norm() == 0.0);

  // exact formula X - <p, X> p
  cli::DeterministicRng rng(3);
  const SphereTarget sphere(4);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd q(4), x(4);
    for (int i = 0; i < 4; ++i) {
      q[i] = rng.uniform(-1.0, 1.0);
      x[i] = rng.uniform(-2.0, 2.0);
    }
    const Eigen::VectorXd p = q / q.norm();
    const Eigen::VectorXd expected = x - p.dot(x) * p;
    CHECK((sphere.tangent_project(p, x) - expected).lpNorm<Eigen::Infinity>() < 1e-15);
  }
}

TEST_CASE("sphere normal frame and signed distance") {
  const SphereTarget circle(2);
  const Eigen::MatrixXd frame = circle.normal_frame(vec2(0.6, 0.8));
  CHECK(frame.col(0)[0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(frame.col(0)[1] == doctest::Approx(0.8).epsilon(1e-14));

  // radial offset below rho/2 is reported exactly
  for (double d : {0.1, -0.2, 0.24}) {
    const Eigen::VectorXd h = circle.signed_distance(vec2(1.0 + d, 0.0));
    CHECK(h[0] == doctest::Approx(d).epsilon(1e-14));
  }
  // cutoff region
  CHECK(circle.signed_distance(vec2(1.4, 0.0)).norm() == 0.0);
  CHECK(circle.signed_distance(vec2(3.0, 0.0)).norm() == 0.0);
}

TEST_CASE("pythagorean split of arbitrary vectors at sphere points") {
  cli::DeterministicRng rng(5);
  const SphereTarget sphere(3);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd q(3), x(3);
    for (int i = 0; i < 3; ++i) {
      q[i] = rng.uniform(-1.0, 1.0);
      x[i] = rng.uniform(-3.0, 3.0);
    }
    if (q.norm() < 1e-3) continue;
    const Eigen::VectorXd p = q / q.norm();
    const double tan2 = sphere.tangent_project(p, x).squaredNorm();
    const double nor2 = sphere.normal_project(p, x).squaredNorm();
    CHECK(std::abs(x.squaredNorm() - tan2 - nor2) < 1e-12 * std::max(1.0, x.squaredNorm()));
    // frame reconstruction of the normal part
    const Eigen::MatrixXd frame = sphere.normal_frame(p);
    const Eigen::VectorXd rebuilt = frame * (frame.transpose() * x);
    CHECK((rebuilt - (x - sphere.tangent_project(p, x))).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("unit circle curve target reproduces the analytic geometry") {
  const CurveTarget curve = build_curve(circle_points(64));
  CHECK(curve.length() == doctest::Approx(kTwoPi).epsilon(1e-5));
  CHECK(curve.max_curvature() == doctest::Approx(1.0).epsilon(1e-3));
  // rho = min(0.9 / max curvature, 0.45 * min self-distance) with the
  // self-distance window at L/6, i.e. chord 2 sin(pi/6) = 1
  CHECK(curve.tubular_radius() == doctest::Approx(0.45).epsilon(2e-2));

  // the frame is the outward normal, to the spline fit's own accuracy (h^3)
  for (double s : {0.0, 1.0, 2.5, 4.0}) {
    const Eigen::VectorXd p = curve.point_at(s);
    const Eigen::MatrixXd frame = curve.frame_at(s);
    CHECK((frame.col(0) - p / p.norm()).lpNorm<Eigen::Infinity>() < 2e-5);
  }

  // unit tangent everywhere
  for (int i = 0; i < 200; ++i) {
    const double s = curve.length() * i / 200.0;
    CHECK(std::abs(curve.tangent_at(s).norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("densely sampled circle: frame matches the outward normal to 1e-8") {
  const CurveTarget curve = build_curve(circle_points(4096), {.table_size = 4096});
  for (double s : {0.0, 0.7, 2.5, 4.0, 6.1}) {
    const Eigen::VectorXd p = curve.point_at(s);
    const Eigen::MatrixXd frame = curve.frame_at(s);
    CHECK((frame.col(0) - p / p.norm()).lpNorm<Eigen::Infinity>() < 1e-8);
  }
}

TEST_CASE("arclength parametrization is unit speed to 1e-8") {
  const CurveTarget curve = build_curve(targets::ellipse_points(2.0, 1.0, 96));
  double worst = 0.0;
  for (int i = 0; i < 256; ++i) {
    const double s = curve.length() * (i + 0.37) / 256.0;
    const double h = 1e-5;
    const Eigen::VectorXd a = curve.point_at(s - h);
    const Eigen::VectorXd b = curve.point_at(s + h);
    worst = std::max(worst, std::abs((b - a).norm() / (2.0 * h) - 1.0));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("ellipse projection matches the dense oracle") {
  const CurveTarget ellipse = build_curve(targets::ellipse_points(2.0, 1.0, 96));

  const Eigen::VectorXd p = ellipse.project(vec2(2.1, 0.0));
  CHECK(p[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(p[1]) < 1e-6);

  cli::DeterministicRng rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const double t = rng.uniform(0.0, kTwoPi);
    const double off = rng.uniform(-0.8, 0.8) * ellipse.tubular_radius();
    const Eigen::VectorXd base = ellipse.project(vec2(2.0 * std::cos(t), std::sin(t)));
    const Eigen::MatrixXd frame = ellipse.normal_frame(base);
    const Eigen::VectorXd q = base + off * frame.col(0);
    const Eigen::VectorXd newton = ellipse.project(q);
    const Eigen::VectorXd oracle = oracles::dense_project(ellipse, q, 100000);
    CHECK((newton - oracle).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("ellipse tangential projection at the flat point") {
  const CurveTarget ellipse = build_curve(targets::ellipse_points(2.0, 1.0, 96));
  const Eigen::VectorXd p = ellipse.project(vec2(2.0, 0.0));
  const Eigen::VectorXd t = ellipse.tangent_project(p, vec2(0.3, 0.7));
  CHECK(std::abs(t[0]) < 1e-6);  // tangent at (2, 0) is vertical
  CHECK(t[1] == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("ellipse signed distance near the top") {
  const targets::CurveOptions opts{.table_size = 2048, .rho_override = 0.2};
  const CurveTarget ellipse = build_curve(targets::ellipse_points(2.0, 1.0, 96), opts);
  const Eigen::VectorXd h = ellipse.signed_distance(vec2(0.0, 1.05));
  // nearest point (0, 1); outward normal points up, offset +0.05
  CHECK(h[0] == doctest::Approx(0.05).epsilon(1e-4));
}

TEST_CASE("curve outside-tubular error and distance_to") {
  const CurveTarget ellipse = build_curve(targets::ellipse_points(2.0, 1.0, 96));
  CHECK_THROWS_AS(ellipse.project(vec2(8.0, 0.0)), targets::OutsideTubularNeighborhood);
  CHECK(ellipse.distance_to(vec2(3.0, 0.0)) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("degenerate control points are rejected") {
  std::vector<Eigen::VectorXd> line;
  for (int i = 0; i < 4; ++i) line.push_back(vec2(i, 2.0 * i));
  CHECK_THROWS_AS(build_curve(line), std::invalid_argument);

  std::vector<Eigen::VectorXd> few = {vec2(0, 0), vec2(1, 0), vec2(0, 1)};
  CHECK_THROWS_AS(build_curve(few), std::invalid_argument);
}

TEST_CASE("trefoil frame: orthonormal, closes, and spans the normal space") {
  const CurveTarget trefoil = build_curve(trefoil_points(160));
  const double L = trefoil.length();

  // periodic closure
  const Eigen::MatrixXd f0 = trefoil.frame_at(0.0);
  const Eigen::MatrixXd fL = trefoil.frame_at(L);
  CHECK((f0 - fL).lpNorm<Eigen::Infinity>() < 1e-8);

  cli::DeterministicRng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const double s = rng.uniform(0.0, L);
    const Eigen::MatrixXd frame = trefoil.frame_at(s);
    const Eigen::VectorXd tan = trefoil.tangent_at(s);
    const Eigen::MatrixXd gram = frame.transpose() * frame;
    CHECK((gram - Eigen::MatrixXd::Identity(2, 2)).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(std::abs(frame.col(0).dot(tan)) < 1e-8);
    CHECK(std::abs(frame.col(1).dot(tan)) < 1e-8);

    // tangential + normal parts rebuild the vector
    Eigen::VectorXd x(3);
    for (int i = 0; i < 3; ++i) x[i] = rng.uniform(-1.0, 1.0);
    const Eigen::VectorXd p = trefoil.point_at(s);
    const Eigen::VectorXd nor = trefoil.normal_project(p, x);
    const Eigen::VectorXd tanp = trefoil.tangent_project(p, x);
    CHECK((nor + tanp - x).lpNorm<Eigen::Infinity>() < 1e-9);
  }
}

TEST_CASE("curve dist_gradient matches finite differences of the components") {
  const CurveTarget ellipse = build_curve(targets::ellipse_points(2.0, 1.0, 96));
  cli::DeterministicRng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const double t = rng.uniform(0.0, kTwoPi);
    const Eigen::VectorXd base =
        oracles::dense_project(ellipse, vec2(2.0 * std::cos(t), std::sin(t)), 20000);
    const Eigen::MatrixXd frame = ellipse.normal_frame(base);
    const Eigen::VectorXd q = base + 0.3 * ellipse.tubular_radius() * frame.col(0);

    const Eigen::MatrixXd analytic = ellipse.dist_gradient(q);
    const double h = 1e-6;
    for (int d = 0; d < 2; ++d) {
      Eigen::VectorXd qp = q, qm = q;
      qp[d] += h;
      qm[d] -= h;
      const double fd = (ellipse.dist_components(qp)[0] - ellipse.dist_components(qm)[0]) / (2 * h);
      CHECK(analytic(d, 0) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("sphere normal jacobian is the analytic projector formula") {
  const SphereTarget circle(2);
  const Eigen::VectorXd q = vec2(0.9, 0.3);
  const auto jac = circle.normal_jacobian(q);
  const double r = q.norm();
  const Eigen::VectorXd nu = q / r;
  const Eigen::MatrixXd expected = (Eigen::MatrixXd::Identity(2, 2) - nu * nu.transpose()) / r;
  CHECK((jac[0] - expected).lpNorm<Eigen::Infinity>() < 1e-14);

  // the generic finite-difference fallback agrees
  const auto fd = circle.TargetManifold::normal_jacobian(q);
  CHECK((fd[0] - expected).lpNorm<Eigen::Infinity>() < 1e-7);
}

TEST_CASE("curve csv ingestion") {
  const std::string path = "curve_test_points.csv";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("# closed loop\n", f);
    for (int i = 0; i < 32; ++i) {
      const double t = kTwoPi * i / 32;
      std::fprintf(f, "%.17g,%.17g\n", 2.0 * std::cos(t), std::sin(t));
    }
    std::fclose(f);
  }
  const auto pts = targets::load_curve_csv(path);
  CHECK(pts.size() == 32);
  CHECK(pts[0].size() == 2);
  const CurveTarget curve = build_curve(pts);
  CHECK(curve.length() > 9.0);
  std::remove(path.c_str());

  CHECK_THROWS_AS(targets::load_curve_csv("missing_file.csv"), std::invalid_argument);
}
