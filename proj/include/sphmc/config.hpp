#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sphmc/constraints.hpp"
#include "sphmc/samplers.hpp"

namespace sphmc {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { TruncatedGaussian, Lasso, Bridge, Copula };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::TruncatedGaussian: return "truncated_gaussian";
    case ExperimentKind::Lasso: return "lasso";
    case ExperimentKind::Bridge: return "bridge";
    case ExperimentKind::Copula: return "copula";
  }
  return "?";
}

inline ExperimentKind experiment_from_string(const std::string& s) {
  if (s == "truncated_gaussian") return ExperimentKind::TruncatedGaussian;
  if (s == "lasso") return ExperimentKind::Lasso;
  if (s == "bridge") return ExperimentKind::Bridge;
  if (s == "copula") return ExperimentKind::Copula;
  throw ConfigError("config: unknown experiment '" + s +
                    "' (expected truncated_gaussian|lasso|bridge|copula)");
}

struct SamplerSettings {
  SamplerKind kind = SamplerKind::SphericalHmc;
  SamplerConfig config;
  bool pending_default_trajectory = false;  // 2*pi/D once the dimension is known
};

struct SynthRegressionSpec {
  long n = 200;
  long predictors = 8;
  double noise_sd = 1.0;
  std::uint64_t seed = 1;
};

struct SynthSpikesSpec {
  long bins = 2000;
  Vector marginals;
  Vector coupling;
  std::uint64_t seed = 1;
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::TruncatedGaussian;

  // truncated gaussian
  long dimension = 0;
  Vector mean;
  std::string covariance_kind = "inverse_distance";  // or "explicit"
  Matrix covariance;
  Vector lower, upper;

  // lasso / bridge
  std::string data_path;
  std::optional<SynthRegressionSpec> synth_regression;
  double q = 1.0;
  std::string sigma2_mode = "ols";  // or "fixed"
  double sigma2_value = 0.0;
  double shrinkage = -1.0;  // s, with t = s * ||beta_ols||_q
  double t_radius = -1.0;   // explicit radius, overrides shrinkage
  std::vector<double> s_grid;

  // copula
  std::string spikes_path;
  std::optional<SynthSpikesSpec> synth_spikes;

  // common
  std::vector<SamplerSettings> samplers;
  long num_iter = 0;
  long burn_in = 0;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "results";
  std::string estimator = "weighted";  // or "resampled"

  json to_json() const;
};

namespace cfg_detail {

inline void check_keys(const json& obj, const std::string& ctx,
                       const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("config: unknown key '" + item.key() + "' in " + ctx);
    }
  }
}

inline const json& require(const json& obj, const std::string& key, const std::string& ctx) {
  if (!obj.contains(key)) throw ConfigError("config: missing key '" + key + "' in " + ctx);
  return obj.at(key);
}

inline long get_long(const json& v, const std::string& name) {
  if (!v.is_number_integer()) throw ConfigError("config: '" + name + "' must be an integer");
  return v.get<long>();
}

inline double get_double(const json& v, const std::string& name) {
  if (!v.is_number()) throw ConfigError("config: '" + name + "' must be a number");
  return v.get<double>();
}

inline bool get_bool(const json& v, const std::string& name) {
  if (!v.is_boolean()) throw ConfigError("config: '" + name + "' must be a boolean");
  return v.get<bool>();
}

inline std::string get_string(const json& v, const std::string& name) {
  if (!v.is_string()) throw ConfigError("config: '" + name + "' must be a string");
  return v.get<std::string>();
}

inline Vector get_vector(const json& v, const std::string& name) {
  if (!v.is_array()) throw ConfigError("config: '" + name + "' must be an array of numbers");
  Vector out(Eigen::Index(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[Eigen::Index(i)] = get_double(v[i], name);
  return out;
}

inline Matrix get_matrix(const json& v, const std::string& name) {
  if (!v.is_array() || v.empty()) {
    throw ConfigError("config: '" + name + "' must be an array of arrays");
  }
  const Eigen::Index rows = Eigen::Index(v.size());
  Vector first = get_vector(v[0], name);
  Matrix out(rows, first.size());
  out.row(0) = first;
  for (Eigen::Index i = 1; i < rows; ++i) {
    Vector row = get_vector(v[std::size_t(i)], name);
    if (row.size() != first.size()) {
      throw ConfigError("config: '" + name + "' rows have unequal lengths");
    }
    out.row(i) = row;
  }
  return out;
}

inline json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json matrix_to_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vector_to_json(m.row(i)));
  return a;
}

inline SamplerSettings parse_sampler(const std::string& name, const json& obj) {
  check_keys(obj, "samplers." + name,
             {"epsilon", "num_leapfrog", "trajectory_length", "randomize_steps",
              "proposal_scale"});
  SamplerSettings s;
  s.kind = sampler_from_string(name);
  const bool has_eps = obj.contains("epsilon");
  const bool has_traj = obj.contains("trajectory_length");
  if (has_eps) {
    s.config.epsilon = get_double(obj.at("epsilon"), name + ".epsilon");
    if (!(s.config.epsilon > 0.0)) {
      throw ConfigError("config: '" + name + ".epsilon' must be > 0");
    }
  }
  if (has_traj) {
    s.config.trajectory_length =
        get_double(obj.at("trajectory_length"), name + ".trajectory_length");
    if (!(s.config.trajectory_length > 0.0)) {
      throw ConfigError("config: '" + name + ".trajectory_length' must be > 0");
    }
  }
  if (obj.contains("num_leapfrog")) {
    const long l = get_long(obj.at("num_leapfrog"), name + ".num_leapfrog");
    if (l < 1) throw ConfigError("config: '" + name + ".num_leapfrog' must be >= 1");
    s.config.num_leapfrog = int(l);
  }
  if (obj.contains("randomize_steps")) {
    s.config.randomize_steps = get_bool(obj.at("randomize_steps"), name + ".randomize_steps");
  } else {
    s.config.randomize_steps = s.kind == SamplerKind::SphericalHmc;
  }
  if (obj.contains("proposal_scale")) {
    s.config.proposal_scale = get_double(obj.at("proposal_scale"), name + ".proposal_scale");
    if (!(s.config.proposal_scale > 0.0)) {
      throw ConfigError("config: '" + name + ".proposal_scale' must be > 0");
    }
  }
  // Spherical HMC defaults its trajectory to 2*pi/D; the dimension may only
  // be known after the data source is opened.
  if (s.kind == SamplerKind::SphericalHmc && !has_eps && !has_traj) {
    s.pending_default_trajectory = true;
  }
  return s;
}

inline json sampler_to_json(const SamplerSettings& s) {
  json o;
  if (s.config.trajectory_length > 0.0) {
    o["trajectory_length"] = s.config.trajectory_length;
  } else if (!s.pending_default_trajectory) {
    o["epsilon"] = s.config.epsilon;
  }
  o["num_leapfrog"] = s.config.num_leapfrog;
  o["randomize_steps"] = s.config.randomize_steps;
  if (s.kind == SamplerKind::Rwm) o["proposal_scale"] = s.config.proposal_scale;
  return o;
}

}  // namespace cfg_detail

/// Applies the 2*pi/D spherical-HMC trajectory default once the parameter
/// dimension is known.
inline void resolve_sampler_defaults(ExperimentSpec& spec, Eigen::Index dim) {
  for (auto& s : spec.samplers) {
    if (s.pending_default_trajectory) {
      s.config.trajectory_length = 2.0 * std::numbers::pi / double(dim);
      s.pending_default_trajectory = false;
    }
  }
}

inline ExperimentSpec parse_config_json(const json& root) {
  using namespace cfg_detail;
  if (!root.is_object()) throw ConfigError("config: top level must be an object");

  ExperimentSpec spec;
  spec.kind = experiment_from_string(
      get_string(require(root, "experiment", "top level"), "experiment"));

  std::set<std::string> allowed = {"experiment", "samplers", "num_iter",
                                   "burn_in",    "seeds",    "out_dir",
                                   "estimator"};
  switch (spec.kind) {
    case ExperimentKind::TruncatedGaussian:
      allowed.insert({"dimension", "mean", "covariance", "constraint"});
      break;
    case ExperimentKind::Lasso:
    case ExperimentKind::Bridge:
      allowed.insert({"data", "q", "sigma2", "shrinkage", "t", "s_grid"});
      break;
    case ExperimentKind::Copula:
      allowed.insert({"spikes"});
      break;
  }
  check_keys(root, "top level", allowed);

  // common scalars
  spec.num_iter = get_long(require(root, "num_iter", "top level"), "num_iter");
  if (spec.num_iter < 1) throw ConfigError("config: 'num_iter' must be >= 1");
  if (root.contains("burn_in")) {
    spec.burn_in = get_long(root.at("burn_in"), "burn_in");
  }
  if (spec.burn_in < 0 || spec.burn_in >= spec.num_iter) {
    throw ConfigError("config: need 0 <= burn_in < num_iter");
  }
  const json& seeds = require(root, "seeds", "top level");
  if (!seeds.is_array() || seeds.empty()) {
    throw ConfigError("config: 'seeds' must be a non-empty array of integers");
  }
  for (const auto& s : seeds) {
    spec.seeds.push_back(std::uint64_t(get_long(s, "seeds")));
  }
  if (root.contains("out_dir")) spec.out_dir = get_string(root.at("out_dir"), "out_dir");
  if (root.contains("estimator")) {
    spec.estimator = get_string(root.at("estimator"), "estimator");
    if (spec.estimator != "weighted" && spec.estimator != "resampled") {
      throw ConfigError("config: 'estimator' must be 'weighted' or 'resampled'");
    }
  }

  // samplers, in canonical order
  const json& samplers = require(root, "samplers", "top level");
  if (!samplers.is_object() || samplers.empty()) {
    throw ConfigError("config: 'samplers' must be a non-empty object");
  }
  check_keys(samplers, "samplers", {"sph", "wall", "rwm"});
  for (const char* name : {"sph", "wall", "rwm"}) {
    if (samplers.contains(name)) {
      spec.samplers.push_back(parse_sampler(name, samplers.at(name)));
    }
  }

  switch (spec.kind) {
    case ExperimentKind::TruncatedGaussian: {
      spec.dimension = get_long(require(root, "dimension", "top level"), "dimension");
      if (spec.dimension < 1) throw ConfigError("config: 'dimension' must be >= 1");
      const Eigen::Index d = spec.dimension;
      spec.mean = root.contains("mean") ? get_vector(root.at("mean"), "mean")
                                        : Vector(Vector::Zero(d));
      if (spec.mean.size() != d) throw ConfigError("config: 'mean' length must equal dimension");
      if (root.contains("covariance") && root.at("covariance").is_array()) {
        spec.covariance_kind = "explicit";
        spec.covariance = get_matrix(root.at("covariance"), "covariance");
        if (spec.covariance.rows() != d || spec.covariance.cols() != d) {
          throw ConfigError("config: 'covariance' must be dimension x dimension");
        }
      } else if (root.contains("covariance")) {
        const std::string kind = get_string(root.at("covariance"), "covariance");
        if (kind != "inverse_distance") {
          throw ConfigError("config: 'covariance' must be a matrix or 'inverse_distance'");
        }
      }
      // default box of the higher-dimensional experiments: [0,5] x [0,0.5]^{D-1}
      spec.lower = Vector::Zero(d);
      spec.upper = Vector::Constant(d, 0.5);
      spec.upper[0] = 5.0;
      if (root.contains("constraint")) {
        const json& c = root.at("constraint");
        check_keys(c, "constraint", {"type", "lower", "upper"});
        const std::string type = get_string(require(c, "type", "constraint"), "constraint.type");
        if (type != "rectangle") {
          throw ConfigError("config: truncated_gaussian 'constraint.type' must be 'rectangle'");
        }
        spec.lower = get_vector(require(c, "lower", "constraint"), "constraint.lower");
        spec.upper = get_vector(require(c, "upper", "constraint"), "constraint.upper");
        if (spec.lower.size() != d || spec.upper.size() != d) {
          throw ConfigError("config: constraint bounds must have length 'dimension'");
        }
        for (Eigen::Index i = 0; i < d; ++i) {
          if (!(spec.lower[i] < spec.upper[i])) {
            throw ConfigError("config: constraint.lower[" + std::to_string(i) +
                              "] must be < constraint.upper[" + std::to_string(i) + "]");
          }
        }
      }
      resolve_sampler_defaults(spec, d);
      break;
    }

    case ExperimentKind::Lasso:
    case ExperimentKind::Bridge: {
      const json& data = require(root, "data", "top level");
      check_keys(data, "data", {"path", "synthetic"});
      if (data.contains("path") == data.contains("synthetic")) {
        throw ConfigError("config: 'data' needs exactly one of 'path' or 'synthetic'");
      }
      if (data.contains("path")) {
        spec.data_path = get_string(data.at("path"), "data.path");
      } else {
        const json& syn = data.at("synthetic");
        check_keys(syn, "data.synthetic", {"n", "predictors", "noise_sd", "seed"});
        SynthRegressionSpec s;
        s.n = get_long(require(syn, "n", "data.synthetic"), "data.synthetic.n");
        s.predictors =
            get_long(require(syn, "predictors", "data.synthetic"), "data.synthetic.predictors");
        if (s.n < s.predictors + 2) {
          throw ConfigError("config: 'data.synthetic.n' must be >= predictors + 2");
        }
        if (syn.contains("noise_sd")) {
          s.noise_sd = get_double(syn.at("noise_sd"), "data.synthetic.noise_sd");
          if (!(s.noise_sd >= 0.0)) {
            throw ConfigError("config: 'data.synthetic.noise_sd' must be >= 0");
          }
        }
        if (syn.contains("seed")) {
          s.seed = std::uint64_t(get_long(syn.at("seed"), "data.synthetic.seed"));
        }
        spec.synth_regression = s;
        spec.dimension = s.predictors;
      }
      if (spec.kind == ExperimentKind::Bridge) {
        spec.q = get_double(require(root, "q", "top level"), "q");
        if (!(spec.q > 0.0)) throw ConfigError("config: 'q' must be > 0");
      } else {
        if (root.contains("q") && get_double(root.at("q"), "q") != 1.0) {
          throw ConfigError("config: lasso fixes q = 1; use experiment 'bridge' otherwise");
        }
        spec.q = 1.0;
      }
      if (root.contains("sigma2")) {
        const json& s2 = root.at("sigma2");
        if (s2.is_string()) {
          if (s2.get<std::string>() != "ols") {
            throw ConfigError("config: 'sigma2' must be 'ols' or a positive number");
          }
        } else {
          spec.sigma2_mode = "fixed";
          spec.sigma2_value = get_double(s2, "sigma2");
          if (!(spec.sigma2_value > 0.0)) throw ConfigError("config: 'sigma2' must be > 0");
        }
      }
      if (root.contains("shrinkage") && root.contains("t")) {
        throw ConfigError("config: give either 'shrinkage' or 't', not both");
      }
      if (root.contains("t")) {
        spec.t_radius = get_double(root.at("t"), "t");
        if (!(spec.t_radius > 0.0)) throw ConfigError("config: 't' must be > 0");
      } else {
        spec.shrinkage = root.contains("shrinkage")
                             ? get_double(root.at("shrinkage"), "shrinkage")
                             : 0.5;
        if (!(spec.shrinkage > 0.0 && spec.shrinkage <= 1.0)) {
          throw ConfigError("config: 'shrinkage' must lie in (0, 1]");
        }
      }
      if (root.contains("s_grid")) {
        const json& grid = root.at("s_grid");
        if (!grid.is_array() || grid.empty()) {
          throw ConfigError("config: 's_grid' must be a non-empty array");
        }
        for (const auto& v : grid) {
          const double s = get_double(v, "s_grid");
          if (!(s > 0.0 && s <= 1.0)) throw ConfigError("config: 's_grid' values must lie in (0, 1]");
          spec.s_grid.push_back(s);
        }
      }
      if (spec.dimension > 0) resolve_sampler_defaults(spec, spec.dimension);
      break;
    }

    case ExperimentKind::Copula: {
      const json& spikes = require(root, "spikes", "top level");
      check_keys(spikes, "spikes", {"path", "synthetic"});
      if (spikes.contains("path") == spikes.contains("synthetic")) {
        throw ConfigError("config: 'spikes' needs exactly one of 'path' or 'synthetic'");
      }
      if (spikes.contains("path")) {
        spec.spikes_path = get_string(spikes.at("path"), "spikes.path");
      } else {
        const json& syn = spikes.at("synthetic");
        check_keys(syn, "spikes.synthetic", {"bins", "marginals", "coupling", "seed"});
        SynthSpikesSpec s;
        s.bins = get_long(require(syn, "bins", "spikes.synthetic"), "spikes.synthetic.bins");
        if (s.bins < 1) throw ConfigError("config: 'spikes.synthetic.bins' must be >= 1");
        s.marginals = get_vector(require(syn, "marginals", "spikes.synthetic"),
                                 "spikes.synthetic.marginals");
        if (s.marginals.size() < 2 || s.marginals.size() > 15) {
          throw ConfigError("config: 'spikes.synthetic.marginals' needs 2..15 entries");
        }
        for (Eigen::Index i = 0; i < s.marginals.size(); ++i) {
          if (!(s.marginals[i] > 0.0 && s.marginals[i] < 1.0)) {
            throw ConfigError("config: 'spikes.synthetic.marginals' must lie in (0, 1)");
          }
        }
        const Eigen::Index n_pairs = s.marginals.size() * (s.marginals.size() - 1) / 2;
        s.coupling = syn.contains("coupling")
                         ? get_vector(syn.at("coupling"), "spikes.synthetic.coupling")
                         : Vector(Vector::Zero(n_pairs));
        if (s.coupling.size() != n_pairs) {
          throw ConfigError("config: 'spikes.synthetic.coupling' needs n(n-1)/2 entries");
        }
        if (s.coupling.cwiseAbs().sum() > 1.0) {
          throw ConfigError("config: 'spikes.synthetic.coupling' violates sum |beta| <= 1");
        }
        if (syn.contains("seed")) {
          s.seed = std::uint64_t(get_long(syn.at("seed"), "spikes.synthetic.seed"));
        }
        spec.synth_spikes = s;
        spec.dimension = n_pairs;
        resolve_sampler_defaults(spec, n_pairs);
      }
      break;
    }
  }

  return spec;
}

inline ExperimentSpec validate_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file: " + path);
  json root;
  try {
    in >> root;
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
  }
  return parse_config_json(root);
}

inline json ExperimentSpec::to_json() const {
  using namespace cfg_detail;
  json root;
  root["experiment"] = sphmc::to_string(kind);
  root["num_iter"] = num_iter;
  root["burn_in"] = burn_in;
  root["seeds"] = seeds;
  root["out_dir"] = out_dir;
  root["estimator"] = estimator;
  json samplers_json;
  for (const auto& s : samplers) {
    samplers_json[sphmc::to_string(s.kind)] = sampler_to_json(s);
  }
  root["samplers"] = samplers_json;

  switch (kind) {
    case ExperimentKind::TruncatedGaussian:
      root["dimension"] = dimension;
      root["mean"] = vector_to_json(mean);
      root["covariance"] =
          covariance_kind == "explicit" ? matrix_to_json(covariance) : json("inverse_distance");
      root["constraint"] = {{"type", "rectangle"},
                            {"lower", vector_to_json(lower)},
                            {"upper", vector_to_json(upper)}};
      break;
    case ExperimentKind::Lasso:
    case ExperimentKind::Bridge: {
      json data;
      if (!data_path.empty()) {
        data["path"] = data_path;
      } else {
        data["synthetic"] = {{"n", synth_regression->n},
                             {"predictors", synth_regression->predictors},
                             {"noise_sd", synth_regression->noise_sd},
                             {"seed", synth_regression->seed}};
      }
      root["data"] = data;
      if (kind == ExperimentKind::Bridge) root["q"] = q;
      root["sigma2"] = sigma2_mode == "fixed" ? json(sigma2_value) : json("ols");
      if (t_radius > 0.0) {
        root["t"] = t_radius;
      } else {
        root["shrinkage"] = shrinkage;
      }
      if (!s_grid.empty()) root["s_grid"] = s_grid;
      break;
    }
    case ExperimentKind::Copula: {
      json spikes;
      if (!spikes_path.empty()) {
        spikes["path"] = spikes_path;
      } else {
        spikes["synthetic"] = {{"bins", synth_spikes->bins},
                               {"marginals", vector_to_json(synth_spikes->marginals)},
                               {"coupling", vector_to_json(synth_spikes->coupling)},
                               {"seed", synth_spikes->seed}};
      }
      root["spikes"] = spikes;
      break;
    }
  }
  return root;
}

}  // namespace sphmc
