#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sphmc/config.hpp"
#include "sphmc/copula.hpp"
#include "sphmc/csv.hpp"
#include "sphmc/diagnostics.hpp"
#include "sphmc/models.hpp"
#include "sphmc/samplers.hpp"

namespace sphmc {

struct BuiltProblem {
  TargetModel model;
  ConstraintDomain domain = ConstraintDomain::unit_ball(1);
  std::optional<RegressionData> regression;
  double t_radius = 0.0;  // resolved q-ball radius (regression experiments)
};

inline RegressionData load_or_synthesize_regression(const ExperimentSpec& spec) {
  if (!spec.data_path.empty()) return load_regression_csv(spec.data_path);
  const auto& s = *spec.synth_regression;
  SynthRegression raw = synth_regression(s.n, s.predictors, s.noise_sd, s.seed);
  return make_regression_data(std::move(raw.x_raw), std::move(raw.y_raw));
}

/// Materializes the target model and constraint domain described by the spec,
/// resolving the data-dependent pieces (dimension, sigma^2, q-ball radius,
/// default trajectory lengths) in place.
inline BuiltProblem build_problem(ExperimentSpec& spec) {
  BuiltProblem prob;
  switch (spec.kind) {
    case ExperimentKind::TruncatedGaussian: {
      const Matrix sigma = spec.covariance_kind == "explicit"
                               ? spec.covariance
                               : inverse_distance_covariance(spec.dimension);
      prob.model = truncated_gaussian_model(spec.mean, sigma);
      prob.domain = ConstraintDomain::rectangle(spec.lower, spec.upper);
      break;
    }
    case ExperimentKind::Lasso:
    case ExperimentKind::Bridge: {
      prob.regression = load_or_synthesize_regression(spec);
      const auto& data = *prob.regression;
      spec.dimension = data.dim();
      const double sigma2 = spec.sigma2_mode == "fixed" ? spec.sigma2_value : data.sigma2_ols;
      prob.model = bridge_model(data, sigma2, spec.q);
      prob.t_radius =
          spec.t_radius > 0.0 ? spec.t_radius : spec.shrinkage * data.ols_norm(spec.q);
      prob.domain = ConstraintDomain::qnorm_ball(data.dim(), spec.q, prob.t_radius);
      break;
    }
    case ExperimentKind::Copula: {
      SpikeData data = spec.spikes_path.empty()
                           ? synth_spikes(spec.synth_spikes->marginals,
                                          spec.synth_spikes->coupling,
                                          spec.synth_spikes->bins, spec.synth_spikes->seed)
                           : load_spikes(spec.spikes_path);
      prob.model = fgm_copula_model(data);
      spec.dimension = prob.model.dim;
      prob.domain = ConstraintDomain::qnorm_ball(prob.model.dim, 1.0, 1.0);
      break;
    }
  }
  resolve_sampler_defaults(spec, spec.dimension);
  return prob;
}

/// Writes retained draws as CSV (dim_0,...,dim_{D-1},weight,accepted),
/// re-checking the domain constraint on every row.
inline void write_draws_csv(const std::string& path, const Chain& chain,
                            const ConstraintDomain& domain) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (Eigen::Index j = 0; j < chain.dim(); ++j) out << "dim_" << j << ",";
  out << "weight,accepted\n";
  for (Eigen::Index i = 0; i < chain.size(); ++i) {
    if (!domain.contains(chain.draws.row(i).transpose())) {
      throw std::runtime_error("draw " + std::to_string(i) + " violates the domain constraint");
    }
    for (Eigen::Index j = 0; j < chain.dim(); ++j) {
      out << format_double(chain.draws(i, j)) << ",";
    }
    out << format_double(chain.weights[i]) << "," << int(chain.accepts[std::size_t(i)]) << "\n";
  }
}

/// Reads a draws CSV back into a Chain (elapsed time is not stored in the
/// file and is left at zero).
inline Chain read_draws_csv(const std::string& path) {
  CsvTable t = read_csv(path, /*has_header=*/true);
  if (t.header.size() < 3) {
    throw std::runtime_error(path + ": expected dim_*,weight,accepted columns");
  }
  const Eigen::Index d = Eigen::Index(t.header.size()) - 2;
  if (t.header[std::size_t(d)] != "weight" || t.header[std::size_t(d) + 1] != "accepted") {
    throw std::runtime_error(path + ": last two columns must be weight,accepted");
  }
  Chain chain;
  chain.draws.resize(Eigen::Index(t.rows.size()), d);
  chain.weights.resize(Eigen::Index(t.rows.size()));
  chain.accepts.assign(t.rows.size(), 0);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) chain.draws(Eigen::Index(i), j) = t.rows[i][std::size_t(j)];
    chain.weights[Eigen::Index(i)] = t.rows[i][std::size_t(d)];
    chain.accepts[i] = t.rows[i][std::size_t(d) + 1] != 0.0 ? 1 : 0;
  }
  chain.total_iterations = long(t.rows.size());
  return chain;
}

struct CellResult {
  SamplerKind sampler = SamplerKind::SphericalHmc;
  std::uint64_t seed = 0;
  EssReport report;
  Moments moments;
  double bounces_per_iteration = 0.0;
  std::string draws_file, report_file;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  std::string summary_file, manifest_file;
  bool complete = true;
  std::vector<std::string> errors;
};

namespace exp_detail {

inline Moments estimate_moments(const Chain& chain, const std::string& estimator,
                                std::uint64_t seed) {
  if (estimator == "resampled") {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    Matrix res = resample(chain.draws, chain.weights, rng);
    return weighted_moments(res, Vector::Ones(res.rows()));
  }
  return weighted_moments(chain.draws, chain.weights);
}

inline json cell_report_json(const ExperimentSpec& spec, const CellResult& cell) {
  json j = cell.report.to_json();
  j["experiment"] = to_string(spec.kind);
  j["sampler"] = to_string(cell.sampler);
  j["seed"] = cell.seed;
  j["dim"] = spec.dimension;
  j["estimator"] = spec.estimator;
  j["bounces_per_iteration"] = cell.bounces_per_iteration;
  j["mean"] = cfg_detail::vector_to_json(cell.moments.mean);
  j["cov"] = cfg_detail::matrix_to_json(cell.moments.cov);
  return j;
}

inline void write_summary_csv(const std::string& path, const ExperimentSpec& spec,
                              const std::vector<CellResult>& cells) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "experiment,dim,sampler,seed,accept_rate,seconds,ess_min,ess_med,ess_max,"
         "min_ess_per_sec\n";
  for (const auto& c : cells) {
    out << to_string(spec.kind) << "," << spec.dimension << "," << to_string(c.sampler) << ","
        << c.seed << "," << format_double(c.report.accept_rate) << ","
        << format_double(c.report.seconds) << "," << format_double(c.report.ess_min) << ","
        << format_double(c.report.ess_med) << "," << format_double(c.report.ess_max) << ","
        << format_double(c.report.min_ess_per_sec) << "\n";
  }
}

}  // namespace exp_detail

/// Runs every (sampler, seed) cell of the experiment, writing per-cell draws
/// CSVs and report JSONs, a Table-style summary CSV, and a manifest echoing
/// the fully resolved configuration. Cell failures are recorded in the
/// manifest and do not discard completed cells.
inline ExperimentResult run_experiment(ExperimentSpec spec) {
  namespace fs = std::filesystem;
  BuiltProblem prob = build_problem(spec);
  fs::create_directories(spec.out_dir);

  ExperimentResult result;
  std::vector<std::string> outputs;
  for (const auto& cell_cfg : spec.samplers) {
    for (const auto seed : spec.seeds) {
      const std::string base = to_string(spec.kind) + "_" + to_string(cell_cfg.kind) +
                               "_seed" + std::to_string(seed);
      try {
        SamplerConfig cfg = cell_cfg.config;
        cfg.seed = seed;
        Chain chain =
            run_chain(cell_cfg.kind, prob.model, prob.domain, cfg, spec.num_iter, spec.burn_in);

        CellResult cell;
        cell.sampler = cell_cfg.kind;
        cell.seed = seed;
        cell.report = efficiency_report(chain);
        cell.moments = exp_detail::estimate_moments(chain, spec.estimator, seed);
        cell.bounces_per_iteration = chain.bounces_per_iteration();
        cell.draws_file = (fs::path(spec.out_dir) / (base + "_draws.csv")).string();
        cell.report_file = (fs::path(spec.out_dir) / (base + "_report.json")).string();

        write_draws_csv(cell.draws_file, chain, prob.domain);
        std::ofstream rep(cell.report_file);
        rep << exp_detail::cell_report_json(spec, cell).dump(2) << "\n";

        outputs.push_back(cell.draws_file);
        outputs.push_back(cell.report_file);
        result.cells.push_back(std::move(cell));
      } catch (const std::exception& e) {
        result.complete = false;
        result.errors.push_back(base + ": " + e.what());
      }
    }
  }

  result.summary_file = (fs::path(spec.out_dir) / "summary.csv").string();
  exp_detail::write_summary_csv(result.summary_file, spec, result.cells);
  outputs.push_back(result.summary_file);

  json manifest;
  manifest["config"] = spec.to_json();
  manifest["outputs"] = outputs;
  manifest["complete"] = result.complete;
  if (!result.errors.empty()) manifest["errors"] = result.errors;
  result.manifest_file = (fs::path(spec.out_dir) / "manifest.json").string();
  std::ofstream mf(result.manifest_file);
  mf << manifest.dump(2) << "\n";

  return result;
}

struct PathRow {
  double s = 0.0;
  SamplerKind sampler = SamplerKind::SphericalHmc;
  int coef = 0;
  double estimate = 0.0;
};

struct PathResult {
  std::vector<PathRow> rows;
  std::string file;
};

/// Sweeps the constraint radius t = s * ||beta_ols||_q over the configured
/// s grid and records the posterior mean of every coefficient at each s,
/// one chain per (s, sampler) with the first configured seed.
inline PathResult shrinkage_path(ExperimentSpec spec) {
  namespace fs = std::filesystem;
  if (spec.kind != ExperimentKind::Lasso && spec.kind != ExperimentKind::Bridge) {
    throw ConfigError("config: shrinkage path requires a lasso or bridge experiment");
  }
  if (spec.s_grid.empty()) {
    throw ConfigError("config: 's_grid' is required for the shrinkage path");
  }

  RegressionData data = load_or_synthesize_regression(spec);
  spec.dimension = data.dim();
  resolve_sampler_defaults(spec, spec.dimension);
  const double sigma2 = spec.sigma2_mode == "fixed" ? spec.sigma2_value : data.sigma2_ols;
  TargetModel model = bridge_model(data, sigma2, spec.q);
  const double ols_norm = data.ols_norm(spec.q);

  PathResult result;
  for (const double s : spec.s_grid) {
    auto domain = ConstraintDomain::qnorm_ball(data.dim(), spec.q, s * ols_norm);
    for (const auto& cell_cfg : spec.samplers) {
      SamplerConfig cfg = cell_cfg.config;
      cfg.seed = spec.seeds.front();
      Chain chain =
          run_chain(cell_cfg.kind, model, domain, cfg, spec.num_iter, spec.burn_in);
      Moments m = exp_detail::estimate_moments(chain, spec.estimator, cfg.seed);
      for (Eigen::Index j = 0; j < m.mean.size(); ++j) {
        result.rows.push_back({s, cell_cfg.kind, int(j), m.mean[j]});
      }
    }
  }

  fs::create_directories(spec.out_dir);
  result.file = (fs::path(spec.out_dir) / "shrinkage_path.csv").string();
  std::ofstream out(result.file);
  if (!out) throw std::runtime_error("cannot write file: " + result.file);
  out << "s,sampler,coef,estimate\n";
  for (const auto& r : result.rows) {
    out << format_double(r.s) << "," << to_string(r.sampler) << "," << r.coef << ","
        << format_double(r.estimate) << "\n";
  }
  return result;
}

}  // namespace sphmc
