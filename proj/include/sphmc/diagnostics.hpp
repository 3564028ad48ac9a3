#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "sphmc/geometry.hpp"
#include "sphmc/samplers.hpp"

namespace sphmc {

struct EssValue {
  double value = 1.0;
  bool degenerate = false;
};

/// Effective sample size B / (1 + 2 sum_k rho(k)) with the autocorrelation sum
/// truncated by Geyer's initial monotone sequence: consecutive lag pairs are
/// added while positive and clamped to be non-increasing, up to lag B/2.
/// Result is clamped to [1, B]; a constant series reports 1 with the
/// degenerate flag set.
inline EssValue ess(const Eigen::Ref<const Vector>& series) {
  const Eigen::Index b = series.size();
  if (b < 10) throw std::invalid_argument("ess: need at least 10 samples");
  Vector c = series.array() - series.mean();
  const double gamma0 = c.squaredNorm() / double(b);
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) return {1.0, true};

  auto rho = [&](Eigen::Index k) {
    double s = 0.0;
    for (Eigen::Index t = 0; t + k < b; ++t) s += c[t] * c[t + k];
    return s / double(b) / gamma0;
  };

  const Eigen::Index max_lag = b / 2;
  double pair_sum = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0;; ++m) {
    const Eigen::Index k0 = 2 * m, k1 = 2 * m + 1;
    if (k1 > max_lag) break;
    const double gamma_pair = (k0 == 0 ? 1.0 : rho(k0)) + rho(k1);
    if (gamma_pair <= 0.0) break;
    pair_sum += std::min(gamma_pair, prev_pair);
    prev_pair = std::min(gamma_pair, prev_pair);
  }
  const double tau = -1.0 + 2.0 * pair_sum;
  double value = tau > 0.0 ? double(b) / tau : double(b);
  return {std::clamp(value, 1.0, double(b)), false};
}

struct Moments {
  Vector mean;
  Matrix cov;
};

/// Self-normalized importance estimates: mean = sum w_i x_i / sum w_i and the
/// matching weighted covariance.
inline Moments weighted_moments(const Matrix& draws, const Vector& weights) {
  if (draws.rows() != weights.size() || draws.rows() == 0) {
    throw std::invalid_argument("weighted_moments: draws/weights size mismatch");
  }
  if ((weights.array() < 0.0).any()) {
    throw std::invalid_argument("weighted_moments: negative weight");
  }
  const double total = weights.sum();
  if (!(total > 0.0)) {
    throw std::invalid_argument("weighted_moments: all weights are zero");
  }
  Moments m;
  m.mean = draws.transpose() * weights / total;
  Matrix centered = draws.rowwise() - m.mean.transpose();
  m.cov = centered.transpose() * weights.asDiagonal() * centered / total;
  return m;
}

/// Multinomial resampling proportional to the weights; output length equals
/// input length.
inline Matrix resample(const Matrix& draws, const Vector& weights, Rng& rng) {
  if (draws.rows() != weights.size() || draws.rows() == 0) {
    throw std::invalid_argument("resample: draws/weights size mismatch");
  }
  if ((weights.array() < 0.0).any()) throw std::invalid_argument("resample: negative weight");
  const Eigen::Index b = draws.rows();
  std::vector<double> cdf(static_cast<std::size_t>(b));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    acc += weights[i];
    cdf[std::size_t(i)] = acc;
  }
  if (!(acc > 0.0)) throw std::invalid_argument("resample: all weights are zero");

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix out(b, draws.cols());
  for (Eigen::Index i = 0; i < b; ++i) {
    const double u = unif(rng) * acc;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const Eigen::Index pick = Eigen::Index(it - cdf.begin());
    out.row(i) = draws.row(std::min(pick, b - 1));
  }
  return out;
}

/// Per-parameter ESS summary plus the time-normalized efficiency measure
/// min(ESS)/s.
struct EssReport {
  Vector ess_per_param;
  double ess_min = 0.0;
  double ess_med = 0.0;
  double ess_max = 0.0;
  double accept_rate = 0.0;
  double seconds = 0.0;
  double min_ess_per_sec = 0.0;

  nlohmann::json to_json() const {
    return {{"ess_min", ess_min},       {"ess_med", ess_med},
            {"ess_max", ess_max},       {"accept_rate", accept_rate},
            {"seconds", seconds},       {"min_ess_per_sec", min_ess_per_sec}};
  }
};

inline EssReport efficiency_report(const Chain& chain) {
  if (chain.size() == 0) throw std::invalid_argument("efficiency_report: empty chain");
  EssReport r;
  r.ess_per_param.resize(chain.dim());
  for (Eigen::Index j = 0; j < chain.dim(); ++j) {
    // short chains cannot support an autocorrelation estimate
    r.ess_per_param[j] = chain.size() < 10 ? 1.0 : ess(chain.draws.col(j)).value;
  }
  std::vector<double> sorted(r.ess_per_param.data(), r.ess_per_param.data() + chain.dim());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  r.ess_min = sorted.front();
  r.ess_max = sorted.back();
  r.ess_med = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  r.accept_rate = chain.acceptance_rate();
  r.seconds = chain.elapsed_seconds;
  r.min_ess_per_sec = r.seconds > 0.0 ? r.ess_min / r.seconds : 0.0;
  return r;
}

}  // namespace sphmc
