#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sphmc/constraints.hpp"
#include "sphmc/geometry.hpp"
#include "sphmc/models.hpp"

namespace sphmc {

enum class SamplerKind { SphericalHmc, WallHmc, Rwm };

inline std::string to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::SphericalHmc: return "sph";
    case SamplerKind::WallHmc: return "wall";
    case SamplerKind::Rwm: return "rwm";
  }
  return "?";
}

inline SamplerKind sampler_from_string(const std::string& s) {
  if (s == "sph") return SamplerKind::SphericalHmc;
  if (s == "wall") return SamplerKind::WallHmc;
  if (s == "rwm") return SamplerKind::Rwm;
  throw std::invalid_argument("unknown sampler '" + s + "' (expected sph|wall|rwm)");
}

struct SamplerConfig {
  double epsilon = 0.1;
  int num_leapfrog = 10;
  // When positive, overrides epsilon: the arc per step is
  // trajectory_length / num_leapfrog (so randomized step counts jitter the
  // total trajectory, not the step size).
  double trajectory_length = 0.0;
  bool randomize_steps = false;
  double proposal_scale = 0.1;  // RWM only
  std::uint64_t seed = 1;

  double effective_epsilon() const {
    return trajectory_length > 0.0 ? trajectory_length / num_leapfrog : epsilon;
  }

  void validate() const {
    if (!(effective_epsilon() > 0.0)) throw std::invalid_argument("sampler config: epsilon must be > 0");
    if (num_leapfrog < 1) throw std::invalid_argument("sampler config: num_leapfrog must be >= 1");
    if (!(proposal_scale > 0.0)) throw std::invalid_argument("sampler config: proposal_scale must be > 0");
  }
};

/// Current point of a chain. Spherical HMC keeps the sphere coordinates as the
/// source of truth and carries beta = from_ball(sphere_to_ball(theta_tilde));
/// the Euclidean samplers leave theta_tilde empty and carry weight 1.
struct ChainState {
  std::optional<SpherePoint> theta_tilde;
  Vector beta;
  double potential = 0.0;
  double weight = 1.0;
};

struct StepResult {
  ChainState state;
  bool accepted = false;
  double delta_h = std::numeric_limits<double>::infinity();
  long bounces = 0;
};

namespace detail {

// Tangent-space gradient of U(beta(theta_tilde)):
// ([I_D; 0] - theta_tilde theta^T) grad_theta U.
inline Vector sphere_gradient(const SpherePoint& s, const TargetModel& model,
                              const ConstraintDomain& domain) {
  BallPoint th = sphere_to_ball(s);
  Vector beta = domain.from_ball(th);
  Vector g_theta = domain.chain_gradient(th, model.gradient(beta));
  Vector full = Vector::Zero(s.coords().size());
  full.head(g_theta.size()) = g_theta;
  full -= s.coords() * s.head().dot(g_theta);
  return full;
}

constexpr long kMaxReflections = 1000000;

// Fold beta back into [l,u] coordinate-wise, negating the matching velocity
// component per crossing. Returns false once the reflection budget is spent.
inline bool reflect_rectangle(Vector& beta, Vector& vel, const Vector& lower,
                              const Vector& upper, long& bounces) {
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    while (beta[i] < lower[i] || beta[i] > upper[i]) {
      if (beta[i] > upper[i]) {
        beta[i] = 2.0 * upper[i] - beta[i];
      } else {
        beta[i] = 2.0 * lower[i] - beta[i];
      }
      vel[i] = -vel[i];
      if (++bounces > kMaxReflections) return false;
    }
  }
  return true;
}

// Advance beta by time eps inside the l1 ball ||beta||_1 <= t, reflecting the
// velocity about the active face normal sign(beta) at each wall hit. The hit
// time is found by bisection: ||beta + s v||_1 is convex in s, so from an
// interior point there is a single exit crossing.
inline bool advance_l1_ball(Vector& beta, Vector& vel, double t_radius, double eps,
                            long& bounces) {
  double remaining = eps;
  while (remaining > 0.0) {
    Vector target = beta + remaining * vel;
    if (target.lpNorm<1>() <= t_radius) {
      beta = std::move(target);
      return true;
    }
    double lo = 0.0, hi = remaining;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((beta + mid * vel).lpNorm<1>() <= t_radius) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    beta += lo * vel;  // lands inside, at the wall up to bisection resolution
    Vector normal(beta.size());
    for (Eigen::Index i = 0; i < beta.size(); ++i) {
      normal[i] = beta[i] > 0.0 ? 1.0 : (beta[i] < 0.0 ? -1.0 : 0.0);
    }
    const double nn = normal.norm();
    if (nn == 0.0) return false;  // cannot orient the face
    normal /= nn;
    vel -= 2.0 * vel.dot(normal) * normal;
    remaining -= lo;
    if (++bounces > kMaxReflections) return false;
  }
  return true;
}

inline int draw_num_steps(const SamplerConfig& cfg, Rng& rng) {
  if (cfg.randomize_steps && cfg.num_leapfrog > 1) {
    std::uniform_int_distribution<int> pick(1, cfg.num_leapfrog);
    return pick(rng);
  }
  return cfg.num_leapfrog;
}

inline bool metropolis_accept(double h_current, double h_proposed, Rng& rng) {
  if (!std::isfinite(h_proposed)) return false;
  if (h_proposed <= h_current) return true;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return unif(rng) < std::exp(h_current - h_proposed);
}

}  // namespace detail

/// Leapfrog-with-geodesic trajectory: L symmetric steps of
///   half velocity kick / exact great-circle rotation by arc eps /
///   half velocity kick,
/// renormalizing theta_tilde after each full step. Returns nullopt when a
/// non-finite gradient is met along the way.
inline std::optional<std::pair<SpherePoint, TangentVector>> integrate_spherical(
    SpherePoint s, TangentVector v, double eps, int steps, const TargetModel& model,
    const ConstraintDomain& domain) {
  Vector g = detail::sphere_gradient(s, model, domain);
  for (int l = 0; l < steps; ++l) {
    if (!g.allFinite()) return std::nullopt;
    v.v_tilde -= 0.5 * eps * g;
    auto moved = geodesic_flow(s, v, eps);
    s = SpherePoint::normalized(moved.first.coords());
    v = std::move(moved.second);
    g = detail::sphere_gradient(s, model, domain);
    if (!g.allFinite()) return std::nullopt;
    v.v_tilde -= 0.5 * eps * g;
  }
  return std::make_pair(std::move(s), std::move(v));
}

inline ChainState init_spherical_state(const TargetModel& model, const ConstraintDomain& domain) {
  ChainState st;
  st.theta_tilde = SpherePoint::pole(domain.dim());
  st.beta = domain.from_ball(sphere_to_ball(*st.theta_tilde));
  st.potential = model.potential(st.beta);
  st.weight = domain.jacobian_weight(*st.theta_tilde);
  return st;
}

inline ChainState init_euclidean_state(const TargetModel& model, const ConstraintDomain& domain) {
  ChainState st;
  st.beta = domain.center();
  st.potential = model.potential(st.beta);
  st.weight = 1.0;
  return st;
}

/// One transition of Spherical HMC. The Hamiltonian is
/// H = U(beta(theta)) + ||v_tilde||^2 / 2; any non-finite value along the
/// proposal path rejects. The Jacobian importance weight is recomputed for
/// whichever state the step returns.
inline StepResult spherical_hmc_step(const ChainState& state, const TargetModel& model,
                                     const ConstraintDomain& domain, const SamplerConfig& cfg,
                                     Rng& rng) {
  const SpherePoint& s = *state.theta_tilde;
  TangentVector v = sample_tangent_velocity(s, rng);
  const double h0 = state.potential + 0.5 * v.v_tilde.squaredNorm();
  const int steps = detail::draw_num_steps(cfg, rng);

  StepResult res;
  res.state = state;

  auto traj = integrate_spherical(s, v, cfg.effective_epsilon(), steps, model, domain);
  if (traj) {
    Vector beta = domain.from_ball(sphere_to_ball(traj->first));
    const double u_prop = model.potential(beta);
    const double h1 = u_prop + 0.5 * traj->second.v_tilde.squaredNorm();
    if (std::isfinite(h1)) res.delta_h = h1 - h0;
    if (detail::metropolis_accept(h0, h1, rng)) {
      res.state.theta_tilde = std::move(traj->first);
      res.state.beta = std::move(beta);
      res.state.potential = u_prop;
      res.accepted = true;
    }
  }
  res.state.weight = domain.jacobian_weight(*res.state.theta_tilde);
  return res;
}

/// One transition of Wall HMC: plain leapfrog in original coordinates with
/// elastic reflection off the domain boundary during position updates.
/// Supports hyper-rectangles and the l1 diamond (QNormBall with q = 1).
inline StepResult wall_hmc_step(const ChainState& state, const TargetModel& model,
                                const ConstraintDomain& domain, const SamplerConfig& cfg,
                                Rng& rng) {
  const bool rect = domain.kind() == DomainKind::HyperRectangle;
  const bool diamond = domain.kind() == DomainKind::QNormBall && domain.q() == 1.0;
  if (!rect && !diamond) {
    throw std::invalid_argument("wall_hmc_step: domain must be a rectangle or an l1 ball");
  }

  std::normal_distribution<double> gauss;
  Vector vel(state.beta.size());
  for (Eigen::Index i = 0; i < vel.size(); ++i) vel[i] = gauss(rng);
  const double h0 = state.potential + 0.5 * vel.squaredNorm();
  const int steps = detail::draw_num_steps(cfg, rng);
  const double eps = cfg.effective_epsilon();

  StepResult res;
  res.state = state;

  Vector beta = state.beta;
  Vector g = model.gradient(beta);
  bool ok = g.allFinite();
  for (int l = 0; l < steps && ok; ++l) {
    vel -= 0.5 * eps * g;
    if (rect) {
      beta += eps * vel;
      ok = detail::reflect_rectangle(beta, vel, domain.lower(), domain.upper(), res.bounces);
    } else {
      ok = detail::advance_l1_ball(beta, vel, domain.radius(), eps, res.bounces);
    }
    if (!ok) break;
    g = model.gradient(beta);
    ok = g.allFinite();
    if (!ok) break;
    vel -= 0.5 * eps * g;
  }

  if (ok) {
    const double u_prop = model.potential(beta);
    const double h1 = u_prop + 0.5 * vel.squaredNorm();
    if (std::isfinite(h1)) res.delta_h = h1 - h0;
    if (detail::metropolis_accept(h0, h1, rng)) {
      res.state.beta = std::move(beta);
      res.state.potential = u_prop;
      res.accepted = true;
    }
  }
  return res;
}

/// One transition of random-walk Metropolis with an isotropic Gaussian
/// proposal; out-of-domain proposals are rejected outright.
inline StepResult rwm_step(const ChainState& state, const TargetModel& model,
                           const ConstraintDomain& domain, const SamplerConfig& cfg, Rng& rng) {
  std::normal_distribution<double> gauss;
  Vector prop = state.beta;
  for (Eigen::Index i = 0; i < prop.size(); ++i) prop[i] += cfg.proposal_scale * gauss(rng);

  StepResult res;
  res.state = state;
  if (!domain.contains(prop)) return res;

  const double u_prop = model.potential(prop);
  if (std::isfinite(u_prop)) res.delta_h = u_prop - state.potential;
  if (detail::metropolis_accept(state.potential, u_prop, rng)) {
    res.state.beta = std::move(prop);
    res.state.potential = u_prop;
    res.accepted = true;
  }
  return res;
}

/// Retained draws of one MCMC run, in original coordinates, with the per-draw
/// importance weights and acceptance flags aligned row-by-row.
struct Chain {
  Matrix draws;
  Vector weights;
  std::vector<std::uint8_t> accepts;
  long total_bounces = 0;
  long total_iterations = 0;
  double elapsed_seconds = 0.0;

  Eigen::Index size() const { return draws.rows(); }
  Eigen::Index dim() const { return draws.cols(); }

  double acceptance_rate() const {
    if (accepts.empty()) return 0.0;
    long n = 0;
    for (auto a : accepts) n += a;
    return double(n) / double(accepts.size());
  }

  double bounces_per_iteration() const {
    return total_iterations > 0 ? double(total_bounces) / double(total_iterations) : 0.0;
  }
};

/// Runs burn_in + retained iterations of the chosen sampler. Deterministic
/// given cfg.seed; wall-clock time covers the sampling loop only.
inline Chain run_chain(SamplerKind kind, const TargetModel& model,
                       const ConstraintDomain& domain, const SamplerConfig& cfg,
                       long num_iter, long burn_in) {
  if (burn_in < 0 || num_iter <= burn_in) {
    throw std::invalid_argument("run_chain: need num_iter > burn_in >= 0");
  }
  cfg.validate();
  if (model.dim != domain.dim()) {
    throw std::invalid_argument("run_chain: model/domain dimension mismatch");
  }

  Rng rng(cfg.seed);
  ChainState state = kind == SamplerKind::SphericalHmc ? init_spherical_state(model, domain)
                                                       : init_euclidean_state(model, domain);
  if (!std::isfinite(state.potential)) {
    throw std::runtime_error("run_chain: potential is not finite at the initial state");
  }

  const long retained = num_iter - burn_in;
  Chain chain;
  chain.draws.resize(retained, model.dim);
  chain.weights.resize(retained);
  chain.accepts.assign(std::size_t(retained), 0);
  chain.total_iterations = num_iter;

  const auto t_start = std::chrono::steady_clock::now();
  for (long it = 0; it < num_iter; ++it) {
    StepResult r;
    try {
      switch (kind) {
        case SamplerKind::SphericalHmc:
          r = spherical_hmc_step(state, model, domain, cfg, rng);
          break;
        case SamplerKind::WallHmc:
          r = wall_hmc_step(state, model, domain, cfg, rng);
          break;
        case SamplerKind::Rwm:
          r = rwm_step(state, model, domain, cfg, rng);
          break;
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("run_chain: iteration " + std::to_string(it) + ": " + e.what());
    }
    state = std::move(r.state);
    chain.total_bounces += r.bounces;
    if (it >= burn_in) {
      const long row = it - burn_in;
      chain.draws.row(row) = state.beta;
      chain.weights[row] = state.weight;
      chain.accepts[std::size_t(row)] = r.accepted ? 1 : 0;
    }
  }
  chain.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return chain;
}

}  // namespace sphmc
