#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "sphmc/csv.hpp"
#include "sphmc/geometry.hpp"

namespace sphmc {

/// A target distribution expressed through its potential U(beta) = -log f(beta)
/// (up to a constant) and the gradient of U, both in original coordinates.
struct TargetModel {
  Eigen::Index dim = 0;
  std::function<double(const Vector&)> potential;
  std::function<Vector(const Vector&)> gradient;
  std::string description;
};

/// Gaussian potential U = (beta-mu)' Sigma^{-1} (beta-mu) / 2. The truncation
/// lives entirely in the ConstraintDomain paired with the model.
inline TargetModel truncated_gaussian_model(const Vector& mu, const Matrix& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != mu.size()) {
    throw std::invalid_argument("truncated_gaussian_model: shape mismatch");
  }
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) {
    throw std::invalid_argument("truncated_gaussian_model: covariance not symmetric");
  }
  auto llt = std::make_shared<Eigen::LLT<Matrix>>(sigma);
  if (llt->info() != Eigen::Success) {
    throw std::invalid_argument("truncated_gaussian_model: covariance not positive-definite");
  }
  TargetModel m;
  m.dim = mu.size();
  m.potential = [mu, llt](const Vector& beta) {
    Vector r = beta - mu;
    return 0.5 * r.dot(llt->solve(r));
  };
  m.gradient = [mu, llt](const Vector& beta) { return Vector(llt->solve(beta - mu)); };
  m.description = "truncated gaussian D=" + std::to_string(mu.size());
  return m;
}

/// Covariance family used for the higher-dimensional truncated-Gaussian runs:
/// Sigma_ij = 1 / (1 + |i-j|).
inline Matrix inverse_distance_covariance(Eigen::Index dim) {
  Matrix s(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) s(i, j) = 1.0 / (1.0 + std::abs(double(i - j)));
  }
  return s;
}

/// Regression data after the standard preprocessing: predictor columns
/// centered and scaled to norm sqrt(n), response centered.
struct RegressionData {
  Matrix x;       // n x d, standardized
  Vector y;       // length n, centered
  Vector ols;     // least-squares solution on the standardized data
  double sigma2_ols = 0.0;  // residual variance ||y - X ols||^2 / (n - d)

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index dim() const { return x.cols(); }

  double ols_norm(double q) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < ols.size(); ++i) s += std::pow(std::abs(ols[i]), q);
    return std::pow(s, 1.0 / q);
  }
};

inline RegressionData make_regression_data(Matrix x_raw, Vector y_raw) {
  const Eigen::Index n = x_raw.rows(), d = x_raw.cols();
  if (n < d + 2) throw std::invalid_argument("regression data: need n >= d + 2 rows");
  if (y_raw.size() != n) throw std::invalid_argument("regression data: y length mismatch");
  for (Eigen::Index j = 0; j < d; ++j) {
    const double mean = x_raw.col(j).mean();
    x_raw.col(j).array() -= mean;
    const double norm = x_raw.col(j).norm();
    if (norm < 1e-12) {
      throw std::invalid_argument("regression data: column " + std::to_string(j) +
                                  " has zero variance");
    }
    x_raw.col(j) *= std::sqrt(double(n)) / norm;
  }
  y_raw.array() -= y_raw.mean();

  RegressionData data;
  data.ols = x_raw.colPivHouseholderQr().solve(y_raw);
  data.sigma2_ols = (y_raw - x_raw * data.ols).squaredNorm() / double(n - d);
  data.x = std::move(x_raw);
  data.y = std::move(y_raw);
  return data;
}

/// Gaussian-likelihood, Gaussian-prior regression potential
///   U(beta) = [ ||y - X beta||^2 + ||beta||^2 ] / (2 sigma^2)
/// The lasso/bridge constraint ||beta||_q <= t is carried by the
/// ConstraintDomain, not the potential.
inline TargetModel lasso_model(const RegressionData& data, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("lasso_model: sigma2 must be > 0");
  auto xtx = std::make_shared<Matrix>(data.x.transpose() * data.x);
  auto xty = std::make_shared<Vector>(data.x.transpose() * data.y);
  const double yty = data.y.squaredNorm();
  TargetModel m;
  m.dim = data.dim();
  m.potential = [xtx, xty, yty, sigma2](const Vector& b) {
    return (yty - 2.0 * xty->dot(b) + b.dot(*xtx * b) + b.squaredNorm()) / (2.0 * sigma2);
  };
  m.gradient = [xtx, xty, sigma2](const Vector& b) {
    return Vector((*xtx * b - *xty + b) / sigma2);
  };
  m.description = "lasso regression d=" + std::to_string(data.dim());
  return m;
}

/// Identical potential to lasso_model; q only selects the QNormBall domain.
inline TargetModel bridge_model(const RegressionData& data, double sigma2, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("bridge_model: q must be > 0");
  TargetModel m = lasso_model(data, sigma2);
  m.description = "bridge regression q=" + std::to_string(q);
  return m;
}

/// Unconstrained posterior mean of the lasso/bridge potential, used as an
/// oracle when the constraint is loose: (X'X + I)^{-1} X'y.
inline Vector ridge_closed_form(const RegressionData& data) {
  Matrix a = data.x.transpose() * data.x;
  a.diagonal().array() += 1.0;
  return a.llt().solve(data.x.transpose() * data.y);
}

/// Loads a regression CSV: header row, predictors in all but the last column,
/// response in the last.
inline RegressionData load_regression_csv(const std::string& path) {
  CsvTable t = read_csv(path, /*has_header=*/true);
  if (t.header.size() < 2) {
    throw std::runtime_error(path + ": expected at least 2 columns (predictors + response)");
  }
  if (t.rows.empty()) throw std::runtime_error(path + ": no data rows");
  const Eigen::Index n = Eigen::Index(t.rows.size());
  const Eigen::Index d = Eigen::Index(t.header.size()) - 1;
  Matrix x(n, d);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = t.rows[i][j];
    y[i] = t.rows[i][d];
  }
  return make_regression_data(std::move(x), std::move(y));
}

/// The diabetes benchmark layout: columns
/// age,sex,bmi,map,tc,ldl,hdl,tch,ltg,glu,y (442 rows).
inline RegressionData load_diabetes(const std::string& path) {
  CsvTable t = read_csv(path, /*has_header=*/true);
  if (t.header.size() != 11) {
    throw std::runtime_error(path + ": expected 11 columns (10 predictors + response), got " +
                             std::to_string(t.header.size()));
  }
  return load_regression_csv(path);
}

inline void write_regression_csv(const std::string& path, const Matrix& x_raw,
                                 const Vector& y_raw) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (Eigen::Index j = 0; j < x_raw.cols(); ++j) out << "x" << j << ",";
  out << "y\n";
  for (Eigen::Index i = 0; i < x_raw.rows(); ++i) {
    for (Eigen::Index j = 0; j < x_raw.cols(); ++j) out << format_double(x_raw(i, j)) << ",";
    out << format_double(y_raw[i]) << "\n";
  }
}

struct SynthRegression {
  Matrix x_raw;
  Vector y_raw;
  Vector beta_true;
};

/// Seeded synthetic stand-in for the diabetes data: Gaussian design, sparse
/// coefficients, Gaussian noise. Raw values; standardize via
/// make_regression_data (or write + reload).
inline SynthRegression synth_regression(Eigen::Index n, Eigen::Index d, double noise_sd,
                                        std::uint64_t seed) {
  if (n < d + 2) throw std::invalid_argument("synth_regression: need n >= d + 2");
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  SynthRegression s;
  s.x_raw.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) s.x_raw(i, j) = gauss(rng);
  }
  // alternating-sign magnitudes on the first half, exact zeros after
  s.beta_true = Vector::Zero(d);
  for (Eigen::Index j = 0; j < (d + 1) / 2; ++j) {
    s.beta_true[j] = (j % 2 == 0 ? 1.0 : -0.6) / double(j + 1);
  }
  s.y_raw = s.x_raw * s.beta_true;
  for (Eigen::Index i = 0; i < n; ++i) s.y_raw[i] += noise_sd * gauss(rng);
  return s;
}

}  // namespace sphmc
