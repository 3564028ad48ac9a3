#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace sphmc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Thrown when a point violates the domain it is required to live in.
struct ConstraintViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Construction tolerances. Points are logically on/inside their domain;
// the slack only absorbs round-off from upstream arithmetic.
inline constexpr double kBallSlack = 1e-12;
inline constexpr double kUnitNormTol = 1e-10;
inline constexpr double kZeroVelocity = 1e-14;

/// A point of the closed unit ball, ||theta||_2 <= 1.
class BallPoint {
 public:
  explicit BallPoint(Vector theta) : theta_(std::move(theta)) {
    if (theta_.norm() > 1.0 + kBallSlack) {
      throw ConstraintViolation("BallPoint: ||theta||_2 = " +
                                std::to_string(theta_.norm()) + " exceeds 1");
    }
  }

  const Vector& theta() const { return theta_; }
  Eigen::Index dim() const { return theta_.size(); }

 private:
  Vector theta_;
};

/// A point of the unit sphere S^D embedded in R^{D+1}.
class SpherePoint {
 public:
  explicit SpherePoint(Vector theta_tilde) : v_(std::move(theta_tilde)) {
    const double n = v_.norm();
    if (std::abs(n - 1.0) > kUnitNormTol) {
      throw ConstraintViolation("SpherePoint: ||theta_tilde||_2 = " +
                                std::to_string(n) + " is not 1");
    }
  }

  /// Builds a sphere point from an almost-unit vector, renormalizing it.
  static SpherePoint normalized(Vector v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw ConstraintViolation("SpherePoint: cannot normalize zero/non-finite vector");
    }
    v /= n;
    return SpherePoint(std::move(v));
  }

  /// Pole (0,...,0,1): the image of the ball center.
  static SpherePoint pole(Eigen::Index ball_dim) {
    Vector v = Vector::Zero(ball_dim + 1);
    v[ball_dim] = 1.0;
    return SpherePoint(std::move(v));
  }

  const Vector& coords() const { return v_; }
  /// First D coordinates, i.e. the ball chart of this point.
  auto head() const { return v_.head(v_.size() - 1); }
  double last() const { return v_[v_.size() - 1]; }
  Eigen::Index ball_dim() const { return v_.size() - 1; }

 private:
  Vector v_;
};

/// A velocity in the tangent space of a paired SpherePoint.
struct TangentVector {
  Vector v_tilde;

  double norm() const { return v_tilde.norm(); }
};

/// Lifts a ball point to the sphere: theta -> (theta, sign*sqrt(1-||theta||^2)).
inline SpherePoint ball_to_sphere(const BallPoint& p, int sign = +1) {
  const Vector& th = p.theta();
  const double rest = std::max(0.0, 1.0 - th.squaredNorm());
  Vector v(th.size() + 1);
  v.head(th.size()) = th;
  v[th.size()] = (sign < 0 ? -1.0 : 1.0) * std::sqrt(rest);
  return SpherePoint::normalized(std::move(v));
}

/// Drops the auxiliary coordinate; inverse of ball_to_sphere up to sign.
inline BallPoint sphere_to_ball(const SpherePoint& s) {
  Vector th = s.head();
  // ||theta|| <= ||theta_tilde|| = 1, up to round-off the ctor absorbs.
  return BallPoint(std::move(th));
}

/// Projects w onto the tangent space at s: (I - tt^T) w.
inline TangentVector tangent_project(const SpherePoint& s, const Vector& w) {
  const Vector& t = s.coords();
  return TangentVector{w - t * t.dot(w)};
}

/// Draws v ~ N(0, I - tt^T), the tangent-space Gaussian at s.
inline TangentVector sample_tangent_velocity(const SpherePoint& s, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector w(s.coords().size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = gauss(rng);
  return tangent_project(s, w);
}

/// Exact great-circle flow for time t. Preserves ||theta_tilde||, ||v_tilde||
/// and tangency; the zero-velocity limit returns the state unchanged.
inline std::pair<SpherePoint, TangentVector> geodesic_flow(const SpherePoint& s,
                                                           const TangentVector& v,
                                                           double t) {
  const double nv = v.norm();
  if (nv < kZeroVelocity) return {s, v};
  const double c = std::cos(nv * t);
  const double sn = std::sin(nv * t);
  Vector th = s.coords() * c + (v.v_tilde / nv) * sn;
  Vector vt = -s.coords() * (nv * sn) + v.v_tilde * c;
  return {SpherePoint(std::move(th)), TangentVector{std::move(vt)}};
}

}  // namespace sphmc
