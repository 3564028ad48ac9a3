#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "sphmc/geometry.hpp"

using namespace sphmc;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

SpherePoint random_sphere_point(Eigen::Index ball_dim, Rng& rng) {
  std::normal_distribution<double> gauss;
  Vector v(ball_dim + 1);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
  return SpherePoint::normalized(std::move(v));
}

BallPoint random_interior_ball_point(Eigen::Index dim, Rng& rng, double max_radius = 0.9) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.05, max_radius);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = gauss(rng);
  v *= unif(rng) / v.norm();
  return BallPoint(std::move(v));
}

}  // namespace

TEST_CASE("ball_to_sphere maps center to pole and boundary to equator") {
  auto pole = ball_to_sphere(BallPoint(vec({0.0, 0.0})));
  REQUIRE(pole.coords().isApprox(vec({0.0, 0.0, 1.0})));

  auto eq = ball_to_sphere(BallPoint(vec({1.0, 0.0})));
  REQUIRE(eq.coords().isApprox(vec({1.0, 0.0, 0.0})));

  auto neg = ball_to_sphere(BallPoint(vec({0.0, 0.5})), -1);
  REQUIRE(neg.last() < 0.0);
}

TEST_CASE("ball_to_sphere satisfies the sphere identity") {
  BallPoint p(vec({0.6, 0.4}));
  auto s = ball_to_sphere(p);
  const double last2 = s.last() * s.last();
  REQUIRE_THAT(last2 + p.theta().squaredNorm(), Catch::Matchers::WithinAbs(1.0, 1e-14));
}

TEST_CASE("BallPoint rejects points outside the unit ball") {
  REQUIRE_THROWS_AS(BallPoint(vec({1.1, 0.0})), ConstraintViolation);
}

TEST_CASE("sphere_to_ball inverts ball_to_sphere on the open ball") {
  REQUIRE(sphere_to_ball(SpherePoint(vec({0.0, 0.0, 1.0}))).theta().isApprox(vec({0.0, 0.0})));
  REQUIRE(sphere_to_ball(SpherePoint(vec({1.0, 0.0, 0.0}))).theta().isApprox(vec({1.0, 0.0})));

  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    auto p = random_interior_ball_point(4, rng);
    auto back = sphere_to_ball(ball_to_sphere(p));
    REQUIRE((back.theta() - p.theta()).norm() < 1e-14);
  }
}

TEST_CASE("tangent_project removes the normal component") {
  SpherePoint s(vec({0.0, 0.0, 1.0}));
  auto t = tangent_project(s, vec({1.0, 2.0, 3.0}));
  REQUIRE(t.v_tilde.isApprox(vec({1.0, 2.0, 0.0})));

  auto z = tangent_project(s, s.coords());
  REQUIRE(z.norm() < 1e-15);
}

TEST_CASE("tangent_project is idempotent and self-adjoint") {
  Rng rng(11);
  std::normal_distribution<double> gauss;
  for (int i = 0; i < 50; ++i) {
    auto s = random_sphere_point(5, rng);
    Vector w(6), u(6);
    for (int k = 0; k < 6; ++k) {
      w[k] = gauss(rng);
      u[k] = gauss(rng);
    }
    auto pw = tangent_project(s, w);
    auto ppw = tangent_project(s, pw.v_tilde);
    REQUIRE((ppw.v_tilde - pw.v_tilde).norm() < 1e-13 * std::max(1.0, w.norm()));
    // already-tangent vectors pass through unchanged
    REQUIRE(std::abs(s.coords().dot(pw.v_tilde)) < 1e-12 * std::max(1.0, w.norm()));
    // <Pu, w> == <u, Pw>
    auto pu = tangent_project(s, u);
    REQUIRE_THAT(pu.v_tilde.dot(w), Catch::Matchers::WithinAbs(u.dot(pw.v_tilde), 1e-12));
  }
}

TEST_CASE("sample_tangent_velocity is tangent and seed-deterministic") {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    auto s = random_sphere_point(6, rng);
    auto v = sample_tangent_velocity(s, rng);
    REQUIRE(std::abs(s.coords().dot(v.v_tilde)) < 1e-10 * std::max(1.0, v.norm()));
  }

  SpherePoint s(vec({0.0, 0.0, 1.0}));
  Rng a(123), b(123);
  auto va = sample_tangent_velocity(s, a);
  auto vb = sample_tangent_velocity(s, b);
  REQUIRE(va.v_tilde == vb.v_tilde);
}

TEST_CASE("sample_tangent_velocity has covariance I - tt^T at the pole") {
  // Monte Carlo check of the marginal N(0, diag(1,1,0)) at (0,0,1).
  SpherePoint s(vec({0.0, 0.0, 1.0}));
  Rng rng(99);
  const int n = 100000;
  Matrix sum = Matrix::Zero(3, 3);
  for (int i = 0; i < n; ++i) {
    auto v = sample_tangent_velocity(s, rng);
    sum += v.v_tilde * v.v_tilde.transpose();
  }
  Matrix cov = sum / n;
  Matrix expect = Matrix::Zero(3, 3);
  expect(0, 0) = expect(1, 1) = 1.0;
  REQUIRE((cov - expect).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("geodesic_flow traces a quarter great circle") {
  SpherePoint s(vec({1.0, 0.0, 0.0}));
  TangentVector v{vec({0.0, 1.0, 0.0})};
  auto [s2, v2] = geodesic_flow(s, v, std::numbers::pi / 2.0);
  REQUIRE((s2.coords() - vec({0.0, 1.0, 0.0})).norm() < 1e-14);
  REQUIRE((v2.v_tilde - vec({-1.0, 0.0, 0.0})).norm() < 1e-14);
}

TEST_CASE("geodesic_flow recovers the state after a full rotation") {
  Rng rng(17);
  for (int i = 0; i < 20; ++i) {
    auto s = random_sphere_point(3, rng);
    auto v = sample_tangent_velocity(s, rng);
    if (v.norm() < 1e-8) continue;
    auto [s2, v2] = geodesic_flow(s, v, 2.0 * std::numbers::pi / v.norm());
    REQUIRE((s2.coords() - s.coords()).norm() < 1e-10);
    REQUIRE((v2.v_tilde - v.v_tilde).norm() < 1e-10 * std::max(1.0, v.norm()));
  }
}

TEST_CASE("geodesic_flow composes additively in time") {
  Rng rng(23);
  std::uniform_real_distribution<double> unif(0.1, 1.5);
  for (int i = 0; i < 30; ++i) {
    auto s = random_sphere_point(4, rng);
    auto v = sample_tangent_velocity(s, rng);
    const double t1 = unif(rng), t2 = unif(rng);
    auto [sa, va] = geodesic_flow(s, v, t1);
    auto [sb, vb] = geodesic_flow(sa, va, t2);
    auto [sc, vc] = geodesic_flow(s, v, t1 + t2);
    REQUIRE((sb.coords() - sc.coords()).norm() < 1e-10);
    REQUIRE((vb.v_tilde - vc.v_tilde).norm() < 1e-10 * std::max(1.0, v.norm()));
  }
}

TEST_CASE("geodesic_flow is reversible and handles zero velocity") {
  Rng rng(29);
  auto s = random_sphere_point(5, rng);
  auto v = sample_tangent_velocity(s, rng);
  auto [s2, v2] = geodesic_flow(s, v, 0.7);
  auto [s3, v3] = geodesic_flow(s2, v2, -0.7);
  REQUIRE((s3.coords() - s.coords()).norm() < 1e-10);
  REQUIRE((v3.v_tilde - v.v_tilde).norm() < 1e-10);

  TangentVector zero{Vector::Zero(6)};
  auto [s4, v4] = geodesic_flow(s, zero, 1.0);
  REQUIRE(s4.coords() == s.coords());
  REQUIRE(v4.v_tilde == zero.v_tilde);
}

TEST_CASE("geodesic_flow preserves norms and tangency over long trajectories") {
  Rng rng(31);
  auto s = random_sphere_point(9, rng);
  auto v = sample_tangent_velocity(s, rng);
  const double nv0 = v.norm();
  for (int i = 0; i < 10000; ++i) {
    auto [s2, v2] = geodesic_flow(s, v, 0.05);
    s = s2;
    v = v2;
  }
  REQUIRE(std::abs(s.coords().norm() - 1.0) < 1e-10);
  REQUIRE(std::abs(v.norm() - nv0) < 1e-10 * nv0);
  REQUIRE(std::abs(s.coords().dot(v.v_tilde)) < 1e-10 * nv0);
}
