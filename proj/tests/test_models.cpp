#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sphmc/models.hpp"

using namespace sphmc;

namespace {

Vector fd_gradient(const TargetModel& m, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vector lo = x, hi = x;
    hi[j] += h;
    lo[j] -= h;
    g[j] = (m.potential(hi) - m.potential(lo)) / (2.0 * h);
  }
  return g;
}

void check_gradient(const TargetModel& m, Rng& rng, double scale, int points = 50) {
  std::normal_distribution<double> gauss;
  for (int i = 0; i < points; ++i) {
    Vector x(m.dim);
    for (Eigen::Index j = 0; j < m.dim; ++j) x[j] = scale * gauss(rng);
    Vector want = fd_gradient(m, x);
    Vector got = m.gradient(x);
    REQUIRE((got - want).norm() < 1e-4 * std::max(1.0, want.norm()));
  }
}

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("standard normal potential and gradient") {
  auto m = truncated_gaussian_model(Vector::Zero(3), Matrix::Identity(3, 3));
  Vector b(3);
  b << 1.0, -2.0, 0.5;
  REQUIRE_THAT(m.potential(b), Catch::Matchers::WithinAbs(0.5 * b.squaredNorm(), 1e-14));
  REQUIRE((m.gradient(b) - b).norm() < 1e-14);
}

TEST_CASE("gaussian model rejects non-SPD covariance") {
  Matrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // symmetric, indefinite
  REQUIRE_THROWS_AS(truncated_gaussian_model(Vector::Zero(2), bad), std::invalid_argument);
  Matrix asym(2, 2);
  asym << 1.0, 0.2, 0.0, 1.0;
  REQUIRE_THROWS_AS(truncated_gaussian_model(Vector::Zero(2), asym), std::invalid_argument);
}

TEST_CASE("inverse_distance_covariance matches 1/(1+|i-j|)") {
  Matrix s = inverse_distance_covariance(3);
  REQUIRE(s(0, 0) == 1.0);
  REQUIRE(s(0, 1) == 0.5);
  REQUIRE_THAT(s(0, 2), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));
  REQUIRE(s == s.transpose().eval());
  // the Table-1 bivariate case is this family at D=2
  Matrix s2 = inverse_distance_covariance(2);
  REQUIRE(s2(0, 1) == 0.5);
}

TEST_CASE("gaussian gradient matches finite differences on correlated targets") {
  Rng rng(31);
  auto m = truncated_gaussian_model(0.3 * Vector::Ones(5), inverse_distance_covariance(5));
  check_gradient(m, rng, 1.0);
}

TEST_CASE("regression standardization invariants") {
  auto raw = synth_regression(80, 6, 0.5, 3);
  auto data = make_regression_data(raw.x_raw, raw.y_raw);
  REQUIRE(data.n() == 80);
  REQUIRE(data.dim() == 6);
  for (Eigen::Index j = 0; j < 6; ++j) {
    REQUIRE(std::abs(data.x.col(j).mean()) < 1e-8);
    REQUIRE_THAT(data.x.col(j).norm(), Catch::Matchers::WithinAbs(std::sqrt(80.0), 1e-8));
  }
  REQUIRE(std::abs(data.y.mean()) < 1e-8);
  REQUIRE(data.sigma2_ols > 0.0);
}

TEST_CASE("constant predictor column is rejected") {
  Matrix x = Matrix::Random(20, 3);
  x.col(1).setConstant(4.2);
  REQUIRE_THROWS_WITH(make_regression_data(x, Vector::Random(20)),
                      Catch::Matchers::ContainsSubstring("zero variance"));
}

TEST_CASE("lasso potential at zero is the response norm") {
  auto raw = synth_regression(60, 4, 0.7, 5);
  auto data = make_regression_data(raw.x_raw, raw.y_raw);
  const double sigma2 = 1.7;
  auto m = lasso_model(data, sigma2);
  REQUIRE_THAT(m.potential(Vector::Zero(4)),
               Catch::Matchers::WithinRel(data.y.squaredNorm() / (2.0 * sigma2), 1e-12));
}

TEST_CASE("lasso gradient matches finite differences") {
  auto raw = synth_regression(60, 4, 0.7, 7);
  auto data = make_regression_data(raw.x_raw, raw.y_raw);
  auto m = lasso_model(data, data.sigma2_ols);
  Rng rng(8);
  std::normal_distribution<double> gauss;
  for (int i = 0; i < 30; ++i) {
    Vector b(4);
    for (int j = 0; j < 4; ++j) b[j] = 0.5 * gauss(rng);
    Vector want = fd_gradient(m, b);
    Vector got = m.gradient(b);
    REQUIRE((got - want).norm() < 1e-6 * std::max(1.0, want.norm()));
  }
}

TEST_CASE("lasso potential is invariant to row order") {
  auto raw = synth_regression(50, 3, 0.4, 11);
  auto data = make_regression_data(raw.x_raw, raw.y_raw);

  Matrix x2 = raw.x_raw.colwise().reverse().eval();
  Vector y2 = raw.y_raw.reverse().eval();
  auto data2 = make_regression_data(x2, y2);

  auto m1 = lasso_model(data, 1.0);
  auto m2 = lasso_model(data2, 1.0);
  Vector b(3);
  b << 0.2, -0.4, 0.9;
  REQUIRE_THAT(m1.potential(b), Catch::Matchers::WithinRel(m2.potential(b), 1e-10));
}

TEST_CASE("bridge potential equals the lasso potential") {
  auto raw = synth_regression(50, 3, 0.4, 13);
  auto data = make_regression_data(raw.x_raw, raw.y_raw);
  auto l = lasso_model(data, 2.0);
  auto b08 = bridge_model(data, 2.0, 0.8);
  Vector b(3);
  b << 0.1, 0.3, -0.2;
  REQUIRE(l.potential(b) == b08.potential(b));
  REQUIRE_THROWS_AS(bridge_model(data, 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("ridge_closed_form solves (X'X + I) b = X'y") {
  auto raw = synth_regression(70, 5, 0.6, 17);
  auto data = make_regression_data(raw.x_raw, raw.y_raw);
  Vector r = ridge_closed_form(data);
  Matrix a = data.x.transpose() * data.x + Matrix::Identity(5, 5);
  REQUIRE((a * r - data.x.transpose() * data.y).norm() < 1e-8);
}

TEST_CASE("regression CSV round-trips through the loader") {
  auto raw = synth_regression(40, 3, 0.5, 19);
  const std::string path = temp_file("sphmc_test_reg.csv");
  write_regression_csv(path, raw.x_raw, raw.y_raw);
  auto loaded = load_regression_csv(path);
  auto direct = make_regression_data(raw.x_raw, raw.y_raw);
  REQUIRE((loaded.x - direct.x).cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE((loaded.y - direct.y).cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE((loaded.ols - direct.ols).cwiseAbs().maxCoeff() < 1e-10);
  std::filesystem::remove(path);
}

TEST_CASE("loader errors are specific") {
  REQUIRE_THROWS_WITH(load_regression_csv("/nonexistent/definitely_missing.csv"),
                      Catch::Matchers::ContainsSubstring("cannot open"));

  const std::string ragged = temp_file("sphmc_test_ragged.csv");
  {
    std::ofstream out(ragged);
    out << "a,b,y\n1,2,3\n4,5\n";
  }
  REQUIRE_THROWS_WITH(load_regression_csv(ragged),
                      Catch::Matchers::ContainsSubstring("columns"));
  std::filesystem::remove(ragged);

  const std::string garbled = temp_file("sphmc_test_garbled.csv");
  {
    std::ofstream out(garbled);
    out << "a,b,y\n1,zap,3\n";
  }
  REQUIRE_THROWS_WITH(load_regression_csv(garbled),
                      Catch::Matchers::ContainsSubstring("malformed"));
  std::filesystem::remove(garbled);

  const std::string narrow = temp_file("sphmc_test_narrow.csv");
  {
    std::ofstream out(narrow);
    out << "a,b,y\n1,2,3\n4,5,6\n";
  }
  REQUIRE_THROWS_WITH(load_diabetes(narrow), Catch::Matchers::ContainsSubstring("11 columns"));
  std::filesystem::remove(narrow);
}

TEST_CASE("synth_regression is deterministic per seed") {
  auto a = synth_regression(30, 4, 1.0, 23);
  auto b = synth_regression(30, 4, 1.0, 23);
  REQUIRE(a.x_raw == b.x_raw);
  REQUIRE(a.y_raw == b.y_raw);
  auto c = synth_regression(30, 4, 1.0, 24);
  REQUIRE(a.y_raw != c.y_raw);
}
