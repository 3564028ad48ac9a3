#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sphmc/csv.hpp"
#include "sphmc/geometry.hpp"
#include "sphmc/models.hpp"

namespace sphmc {

/// Binary spike trains: one row per neuron, one column per time bin, plus the
/// empirical per-neuron firing probabilities used as plug-in copula marginals.
struct SpikeData {
  Eigen::MatrixXi spikes;  // n_neurons x n_bins, entries in {0,1}
  Vector firing_rate;      // strictly inside (0,1)

  Eigen::Index n_neurons() const { return spikes.rows(); }
  Eigen::Index n_bins() const { return spikes.cols(); }
};

inline SpikeData make_spike_data(Eigen::MatrixXi spikes) {
  const Eigen::Index n = spikes.rows(), bins = spikes.cols();
  if (n < 2) throw std::invalid_argument("spike data: need at least 2 neurons");
  if (bins < 1) throw std::invalid_argument("spike data: need at least 1 time bin");
  SpikeData d;
  d.firing_rate.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    long count = 0;
    for (Eigen::Index t = 0; t < bins; ++t) {
      const int v = spikes(i, t);
      if (v != 0 && v != 1) {
        throw std::invalid_argument("spike data: entry (" + std::to_string(i) + "," +
                                    std::to_string(t) + ") is not 0/1");
      }
      count += v;
    }
    d.firing_rate[i] = double(count) / double(bins);
    if (d.firing_rate[i] <= 0.0 || d.firing_rate[i] >= 1.0) {
      throw std::invalid_argument("spike data: neuron " + std::to_string(i) +
                                  " never fires or always fires");
    }
  }
  d.spikes = std::move(spikes);
  return d;
}

/// Rows = neurons, columns = time bins, 0/1 entries, no header.
inline SpikeData load_spikes(const std::string& path) {
  CsvTable t = read_csv(path, /*has_header=*/false);
  if (t.rows.empty()) throw std::runtime_error(path + ": no data rows");
  Eigen::MatrixXi m(Eigen::Index(t.rows.size()), Eigen::Index(t.rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = t.rows[i][j];
      if (v != 0.0 && v != 1.0) {
        throw std::runtime_error(path + ": entry at row " + std::to_string(i + 1) +
                                 " is not 0/1");
      }
      m(i, j) = int(v);
    }
  }
  return make_spike_data(std::move(m));
}

/// Pair order (j1,j2), j1 < j2, lexicographic: (0,1), (0,2), ..., (1,2), ...
inline std::vector<std::pair<int, int>> neuron_pairs(int n) {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) out.emplace_back(a, b);
  }
  return out;
}

namespace detail {

// The FGM joint pmf of the binary vector y is affine in the pairwise
// interaction vector beta: pmf(y) = a(y) + b(y) . beta. The coefficients come
// from inclusion-exclusion of the copula cdf over the orthant corners of y;
// only corners lowering coordinates with y_i = 1 contribute (the cdf vanishes
// below the support).
struct FgmPmfTerm {
  double a = 0.0;
  Vector b;
};

inline FgmPmfTerm fgm_pmf_term(const Vector& marginals, std::uint32_t y_mask) {
  const int n = int(marginals.size());
  const auto pairs = neuron_pairs(n);
  FgmPmfTerm term;
  term.b = Vector::Zero(Eigen::Index(pairs.size()));

  const std::uint32_t ones = y_mask;
  std::uint32_t sub = ones;
  while (true) {
    // corner: coordinates in `sub` are lowered from 1 to 0
    double prod_f = 1.0;
    // one_minus_f[i] = 1 - F_i(corner_i): f_i where the corner sits at 0, else 0
    std::vector<double> one_minus_f(n);
    for (int i = 0; i < n; ++i) {
      const bool at_zero = ((y_mask >> i) & 1u) == 0 || ((sub >> i) & 1u) != 0;
      const double f_cdf = at_zero ? 1.0 - marginals[i] : 1.0;
      prod_f *= f_cdf;
      one_minus_f[i] = at_zero ? marginals[i] : 0.0;
    }
    const double sign = (std::popcount(sub) % 2 == 0) ? 1.0 : -1.0;
    term.a += sign * prod_f;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      term.b[Eigen::Index(p)] +=
          sign * one_minus_f[pairs[p].first] * one_minus_f[pairs[p].second] * prod_f;
    }
    if (sub == 0) break;
    sub = (sub - 1) & ones;
  }
  return term;
}

}  // namespace detail

/// Joint pmf over all 2^n binary outcomes for given marginals and pairwise
/// couplings; outcome index is the bitmask of firing neurons.
inline std::vector<double> fgm_pmf_table(const Vector& marginals, const Vector& coupling) {
  const int n = int(marginals.size());
  if (n < 2 || n > 15) throw std::invalid_argument("fgm_pmf_table: need 2 <= n <= 15");
  if (coupling.size() != Eigen::Index(n * (n - 1) / 2)) {
    throw std::invalid_argument("fgm_pmf_table: coupling must have n(n-1)/2 entries");
  }
  std::vector<double> pmf(std::size_t(1) << n);
  for (std::uint32_t y = 0; y < pmf.size(); ++y) {
    auto term = detail::fgm_pmf_term(marginals, y);
    pmf[y] = term.a + term.b.dot(coupling);
  }
  return pmf;
}

/// Negative log-likelihood of the spike trains under the FGM copula with
/// second-order interactions and plug-in empirical marginals. Parameters are
/// the n(n-1)/2 pairwise couplings, constrained to the unit l1 diamond
/// (QNormBall q=1, t=1). A non-positive pmf (possible only outside the
/// constraint) yields U = +inf.
inline TargetModel fgm_copula_model(const SpikeData& data) {
  const int n = int(data.n_neurons());
  if (n > 15) throw std::invalid_argument("fgm_copula_model: at most 15 neurons");
  const Eigen::Index n_pairs = Eigen::Index(n * (n - 1) / 2);

  // group bins by firing pattern; the likelihood only sees pattern counts
  std::map<std::uint32_t, long> counts;
  for (Eigen::Index t = 0; t < data.n_bins(); ++t) {
    std::uint32_t mask = 0;
    for (int i = 0; i < n; ++i) {
      if (data.spikes(i, t) != 0) mask |= (1u << i);
    }
    ++counts[mask];
  }

  struct Pattern {
    double count;
    double a;
    Vector b;
  };
  auto patterns = std::make_shared<std::vector<Pattern>>();
  patterns->reserve(counts.size());
  for (const auto& [mask, count] : counts) {
    auto term = detail::fgm_pmf_term(data.firing_rate, mask);
    patterns->push_back({double(count), term.a, std::move(term.b)});
  }

  TargetModel m;
  m.dim = n_pairs;
  m.potential = [patterns](const Vector& beta) {
    double u = 0.0;
    for (const auto& p : *patterns) {
      const double pmf = p.a + p.b.dot(beta);
      if (!(pmf > 0.0)) return std::numeric_limits<double>::infinity();
      u -= p.count * std::log(pmf);
    }
    return u;
  };
  m.gradient = [patterns, n_pairs](const Vector& beta) {
    Vector g = Vector::Zero(n_pairs);
    for (const auto& p : *patterns) {
      const double pmf = p.a + p.b.dot(beta);
      if (!(pmf > 0.0)) {
        return Vector(Vector::Constant(n_pairs, std::numeric_limits<double>::quiet_NaN()));
      }
      g -= (p.count / pmf) * p.b;
    }
    return g;
  };
  m.description = "fgm copula, " + std::to_string(n) + " neurons";
  return m;
}

/// Samples spike trains from the FGM joint pmf with the given marginals and
/// couplings. Deterministic per seed.
inline SpikeData synth_spikes(const Vector& marginals, const Vector& coupling,
                              Eigen::Index n_bins, std::uint64_t seed) {
  const int n = int(marginals.size());
  if (coupling.cwiseAbs().sum() > 1.0 + 1e-12) {
    throw std::invalid_argument("synth_spikes: couplings violate sum |beta| <= 1");
  }
  for (int i = 0; i < n; ++i) {
    if (marginals[i] <= 0.0 || marginals[i] >= 1.0) {
      throw std::invalid_argument("synth_spikes: marginals must lie in (0,1)");
    }
  }
  const auto pmf = fgm_pmf_table(marginals, coupling);
  std::vector<double> cdf(pmf.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    acc += std::max(0.0, pmf[i]);
    cdf[i] = acc;
  }

  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXi spikes(n, n_bins);
  for (Eigen::Index t = 0; t < n_bins; ++t) {
    const double u = unif(rng) * acc;
    std::uint32_t y = 0;
    while (y + 1 < cdf.size() && cdf[y] < u) ++y;
    for (int i = 0; i < n; ++i) spikes(i, t) = int((y >> i) & 1u);
  }
  return make_spike_data(std::move(spikes));
}

}  // namespace sphmc
