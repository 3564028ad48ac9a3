#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "sphmc/geometry.hpp"

namespace sphmc {

enum class DomainKind { UnitBall, HyperRectangle, QNormBall };

/// A constrained parameter domain together with its bijection onto the unit
/// ball, the chain-rule gradient transport, and the Jacobian-determinant
/// importance weight of the composed sphere-to-domain map.
///
/// Supported domains:
///   UnitBall        ||beta||_2 <= 1
///   HyperRectangle  l_i <= beta_i <= u_i
///   QNormBall       ||beta||_q <= t, q in (0, inf)
class ConstraintDomain {
 public:
  static ConstraintDomain unit_ball(Eigen::Index dim) {
    if (dim < 1) throw std::invalid_argument("unit_ball: dim must be >= 1");
    ConstraintDomain d;
    d.kind_ = DomainKind::UnitBall;
    d.dim_ = dim;
    return d;
  }

  static ConstraintDomain rectangle(Vector lower, Vector upper) {
    if (lower.size() != upper.size() || lower.size() < 1) {
      throw std::invalid_argument("rectangle: lower/upper lengths differ or empty");
    }
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      if (!(lower[i] < upper[i])) {
        throw std::invalid_argument("rectangle: lower[" + std::to_string(i) +
                                    "] must be < upper[" + std::to_string(i) + "]");
      }
    }
    ConstraintDomain d;
    d.kind_ = DomainKind::HyperRectangle;
    d.dim_ = lower.size();
    d.lower_ = std::move(lower);
    d.upper_ = std::move(upper);
    return d;
  }

  static ConstraintDomain qnorm_ball(Eigen::Index dim, double q, double radius) {
    if (dim < 1) throw std::invalid_argument("qnorm_ball: dim must be >= 1");
    if (!(q > 0.0)) throw std::invalid_argument("qnorm_ball: q must be > 0");
    if (!(radius > 0.0)) throw std::invalid_argument("qnorm_ball: radius must be > 0");
    ConstraintDomain d;
    d.kind_ = DomainKind::QNormBall;
    d.dim_ = dim;
    d.q_ = q;
    d.radius_ = radius;
    return d;
  }

  DomainKind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  double q() const { return q_; }
  double radius() const { return radius_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  /// Interior reference point used to initialize chains.
  Vector center() const {
    if (kind_ == DomainKind::HyperRectangle) return 0.5 * (lower_ + upper_);
    return Vector::Zero(dim_);
  }

  bool contains(const Vector& beta, double tol = 1e-10) const {
    if (beta.size() != dim_) return false;
    switch (kind_) {
      case DomainKind::UnitBall:
        return beta.norm() <= 1.0 + tol;
      case DomainKind::HyperRectangle:
        for (Eigen::Index i = 0; i < dim_; ++i) {
          if (beta[i] < lower_[i] - tol || beta[i] > upper_[i] + tol) return false;
        }
        return true;
      case DomainKind::QNormBall: {
        // Power-sum form: sum |beta_i|^q <= t^q, shared with the acceptance
        // check so draws are validated the same way they are produced.
        double s = 0.0;
        for (Eigen::Index i = 0; i < dim_; ++i) s += std::pow(std::abs(beta[i]), q_);
        const double tq = std::pow(radius_, q_);
        return s <= tq + tol * std::max(1.0, tq);
      }
    }
    return false;
  }

  /// Maps an in-domain point to the unit ball.
  BallPoint to_ball(const Vector& beta) const {
    if (!contains(beta)) {
      throw ConstraintViolation("to_ball: point is outside the domain");
    }
    switch (kind_) {
      case DomainKind::UnitBall:
        return BallPoint(beta);
      case DomainKind::HyperRectangle: {
        Vector bp = (2.0 * beta - (upper_ + lower_)).cwiseQuotient(upper_ - lower_);
        return BallPoint(cube_to_ball(bp));
      }
      case DomainKind::QNormBall: {
        Vector th(dim_);
        for (Eigen::Index i = 0; i < dim_; ++i) {
          const double bp = beta[i] / radius_;
          th[i] = sign_of(bp) * std::pow(std::abs(bp), q_ / 2.0);
        }
        // sum |beta_i / t|^q = ||theta||_2^2, so th lands in the ball; round-off
        // at the boundary is absorbed by renormalizing just past 1.
        const double n = th.norm();
        if (n > 1.0) th /= n;
        return BallPoint(std::move(th));
      }
    }
    throw std::logic_error("to_ball: unreachable");
  }

  /// Exact inverse of to_ball on the closed ball.
  Vector from_ball(const BallPoint& p) const {
    const Vector& th = p.theta();
    switch (kind_) {
      case DomainKind::UnitBall:
        return th;
      case DomainKind::HyperRectangle: {
        Vector bp = ball_to_cube(th);
        return 0.5 * (upper_ - lower_).cwiseProduct(bp) + 0.5 * (upper_ + lower_);
      }
      case DomainKind::QNormBall: {
        Vector beta(dim_);
        for (Eigen::Index i = 0; i < dim_; ++i) {
          beta[i] = radius_ * sign_of(th[i]) * std::pow(std::abs(th[i]), 2.0 / q_);
        }
        return beta;
      }
    }
    throw std::logic_error("from_ball: unreachable");
  }

  /// |dT| of the composed sphere-to-domain map, used as importance weight:
  ///   UnitBall        |th_{D+1}|
  ///   HyperRectangle  |th_{D+1}| (||th||_2/||th||_inf)^D prod (u_i-l_i)/2
  ///   QNormBall       |th_{D+1}| t^D (2/q)^D (prod |th_i|)^{2/q-1}
  /// Computed in log space: the rectangle ratio term grows like D^{D/2}.
  double jacobian_weight(const SpherePoint& s) const {
    if (s.ball_dim() != dim_) {
      throw std::invalid_argument("jacobian_weight: dimension mismatch");
    }
    const double aux = std::abs(s.last());
    if (aux == 0.0) return 0.0;
    double log_w = std::log(aux);
    switch (kind_) {
      case DomainKind::UnitBall:
        break;
      case DomainKind::HyperRectangle: {
        const auto th = s.head();
        const double ninf = th.cwiseAbs().maxCoeff();
        if (ninf > 0.0) log_w += dim_ * std::log(th.norm() / ninf);
        // ninf == 0: ratio -> 1 along the first axis, contributing nothing.
        for (Eigen::Index i = 0; i < dim_; ++i) {
          log_w += std::log(0.5 * (upper_[i] - lower_[i]));
        }
        break;
      }
      case DomainKind::QNormBall: {
        const double expo = 2.0 / q_ - 1.0;
        const auto th = s.head();
        double log_prod = 0.0;
        for (Eigen::Index i = 0; i < dim_; ++i) {
          double a = std::abs(th[i]);
          if (expo < 0.0) a = std::max(a, 1e-12);  // q > 2: keep the weight finite
          if (a == 0.0) return 0.0;                // q < 2: exact zero weight
          log_prod += std::log(a);
        }
        log_w += dim_ * (std::log(radius_) + std::log(2.0 / q_)) + expo * log_prod;
        break;
      }
    }
    return std::exp(log_w);
  }

  /// Transports a gradient from original coordinates to ball coordinates:
  /// returns (d beta / d theta^T)^T grad_beta, i.e. grad_theta of U(beta(theta)).
  Vector chain_gradient(const BallPoint& p, const Vector& grad_beta) const {
    const Vector& th = p.theta();
    if (grad_beta.size() != dim_) {
      throw std::invalid_argument("chain_gradient: gradient dimension mismatch");
    }
    switch (kind_) {
      case DomainKind::UnitBall:
        return grad_beta;
      case DomainKind::HyperRectangle: {
        Vector g = 0.5 * (upper_ - lower_).cwiseProduct(grad_beta);
        const Eigen::Index m = argmax_abs(th);
        const double ninf = std::abs(th[m]);
        if (ninf == 0.0) return g;  // limiting Jacobian at the center is r*I, r=1
        const double n2sq = th.squaredNorm();
        const double r = std::sqrt(n2sq) / ninf;
        // J^T g = r (g + c (th . g)), c = th/||th||^2 - e_m/th_m
        Vector c = th / n2sq;
        c[m] -= 1.0 / th[m];
        return r * (g + c * th.dot(g));
      }
      case DomainKind::QNormBall: {
        const double expo = 2.0 / q_ - 1.0;
        Vector g(dim_);
        for (Eigen::Index i = 0; i < dim_; ++i) {
          g[i] = radius_ * (2.0 / q_) * std::pow(std::abs(th[i]), expo) * grad_beta[i];
        }
        return g;
      }
    }
    throw std::logic_error("chain_gradient: unreachable");
  }

 private:
  ConstraintDomain() = default;

  static double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

  // Lowest index attaining max |th_i|; the fixed tie-break keeps the
  // inf-norm Jacobian deterministic on the measure-zero tie set.
  static Eigen::Index argmax_abs(const Vector& th) {
    Eigen::Index m = 0;
    double best = std::abs(th[0]);
    for (Eigen::Index i = 1; i < th.size(); ++i) {
      if (std::abs(th[i]) > best) {
        best = std::abs(th[i]);
        m = i;
      }
    }
    return m;
  }

  // beta' in [-1,1]^D  ->  theta = beta' ||beta'||_inf / ||beta'||_2
  static Vector cube_to_ball(const Vector& bp) {
    const double n2 = bp.norm();
    if (n2 == 0.0) return Vector::Zero(bp.size());
    return bp * (bp.cwiseAbs().maxCoeff() / n2);
  }

  // theta in ball  ->  beta' = theta ||theta||_2 / ||theta||_inf
  static Vector ball_to_cube(const Vector& th) {
    const double ninf = th.cwiseAbs().maxCoeff();
    if (ninf == 0.0) return Vector::Zero(th.size());
    return th * (th.norm() / ninf);
  }

  DomainKind kind_ = DomainKind::UnitBall;
  Eigen::Index dim_ = 0;
  double q_ = 2.0;
  double radius_ = 1.0;
  Vector lower_, upper_;
};

}  // namespace sphmc
