#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sphmc/copula.hpp"

using namespace sphmc;

namespace {

// uniform draw from the l1 diamond sum |x_i| <= radius
Vector random_diamond_point(Eigen::Index dim, double radius, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector x(dim);
  double total = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    x[i] = expo(rng);
    total += x[i];
  }
  const double scale = radius * std::pow(unif(rng), 1.0 / double(dim)) / total;
  for (Eigen::Index i = 0; i < dim; ++i) {
    x[i] *= scale * (unif(rng) < 0.5 ? -1.0 : 1.0);
  }
  return x;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("two-neuron pmf matches the hand inclusion-exclusion") {
  const double f1 = 0.3, f2 = 0.6, beta = 0.4;
  auto pmf = fgm_pmf_table(vec({f1, f2}), vec({beta}));
  const double corr = beta * f1 * f2 * (1.0 - f1) * (1.0 - f2);
  REQUIRE_THAT(pmf[0], Catch::Matchers::WithinAbs((1 - f1) * (1 - f2) + corr, 1e-14));
  REQUIRE_THAT(pmf[1], Catch::Matchers::WithinAbs(f1 * (1 - f2) - corr, 1e-14));
  REQUIRE_THAT(pmf[2], Catch::Matchers::WithinAbs((1 - f1) * f2 - corr, 1e-14));
  REQUIRE_THAT(pmf[3], Catch::Matchers::WithinAbs(f1 * f2 + corr, 1e-14));
}

TEST_CASE("pmf sums to one and stays nonnegative inside the diamond") {
  Rng rng(5);
  Vector marginals = vec({0.2, 0.35, 0.25, 0.4, 0.3});
  for (int rep = 0; rep < 1000; ++rep) {
    Vector beta = random_diamond_point(10, 1.0, rng);
    auto pmf = fgm_pmf_table(marginals, beta);
    double total = 0.0;
    for (double p : pmf) {
      REQUIRE(p >= -1e-14);
      total += p;
    }
    REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-10));
  }
}

TEST_CASE("zero coupling factorizes into independent Bernoullis") {
  auto data = synth_spikes(vec({0.25, 0.4, 0.3}), Vector::Zero(3), 600, 42);
  auto model = fgm_copula_model(data);

  double nll = 0.0;
  for (Eigen::Index i = 0; i < data.n_neurons(); ++i) {
    for (Eigen::Index t = 0; t < data.n_bins(); ++t) {
      const double f = data.firing_rate[i];
      nll -= std::log(data.spikes(i, t) ? f : 1.0 - f);
    }
  }
  REQUIRE_THAT(model.potential(Vector::Zero(3)), Catch::Matchers::WithinRel(nll, 1e-10));
}

TEST_CASE("copula potential is infinite where the pmf turns negative") {
  auto data = synth_spikes(vec({0.3, 0.3}), vec({0.0}), 400, 9);
  auto model = fgm_copula_model(data);
  // far outside the diamond the (1,1) cell goes negative
  REQUIRE(std::isinf(model.potential(vec({-40.0}))));
  REQUIRE_FALSE(model.gradient(vec({-40.0})).allFinite());
}

TEST_CASE("copula gradient matches finite differences") {
  Rng rng(7);
  auto data = synth_spikes(vec({0.2, 0.35, 0.45}), vec({0.2, -0.1, 0.15}), 800, 11);
  auto model = fgm_copula_model(data);
  for (int rep = 0; rep < 20; ++rep) {
    Vector beta = random_diamond_point(3, 0.8, rng);
    Vector got = model.gradient(beta);
    Vector want(3);
    const double h = 1e-7;
    for (Eigen::Index j = 0; j < 3; ++j) {
      Vector lo = beta, hi = beta;
      hi[j] += h;
      lo[j] -= h;
      want[j] = (model.potential(hi) - model.potential(lo)) / (2.0 * h);
    }
    REQUIRE((got - want).norm() < 1e-4 * std::max(1.0, want.norm()));
  }
}

TEST_CASE("synth_spikes validates the diamond constraint and marginals") {
  REQUIRE_THROWS_AS(synth_spikes(vec({0.3, 0.4}), vec({1.5}), 100, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(synth_spikes(vec({0.0, 0.4}), vec({0.1}), 100, 1), std::invalid_argument);
}

TEST_CASE("synth_spikes is deterministic per seed") {
  auto a = synth_spikes(vec({0.3, 0.4}), vec({0.2}), 300, 77);
  auto b = synth_spikes(vec({0.3, 0.4}), vec({0.2}), 300, 77);
  REQUIRE(a.spikes == b.spikes);
  auto c = synth_spikes(vec({0.3, 0.4}), vec({0.2}), 300, 78);
  REQUIRE(a.spikes != c.spikes);
}

TEST_CASE("independent spikes pass a chi-square independence check") {
  auto data = synth_spikes(vec({0.3, 0.5}), vec({0.0}), 10000, 101);
  long n11 = 0, n10 = 0, n01 = 0, n00 = 0;
  for (Eigen::Index t = 0; t < data.n_bins(); ++t) {
    const int a = data.spikes(0, t), b = data.spikes(1, t);
    if (a && b) ++n11;
    else if (a) ++n10;
    else if (b) ++n01;
    else ++n00;
  }
  const double n = double(data.n_bins());
  const double ra = (n11 + n10) / n, rb = (n11 + n01) / n;
  const double e11 = n * ra * rb, e10 = n * ra * (1 - rb), e01 = n * (1 - ra) * rb,
               e00 = n * (1 - ra) * (1 - rb);
  const double chi2 = std::pow(n11 - e11, 2) / e11 + std::pow(n10 - e10, 2) / e10 +
                      std::pow(n01 - e01, 2) / e01 + std::pow(n00 - e00, 2) / e00;
  REQUIRE(chi2 < 6.635);  // df = 1, alpha = 0.01
}

TEST_CASE("positive coupling raises the co-firing rate above independence") {
  const double f1 = 0.3, f2 = 0.5;
  auto data = synth_spikes(vec({f1, f2}), vec({0.9}), 20000, 103);
  long both = 0;
  for (Eigen::Index t = 0; t < data.n_bins(); ++t) {
    both += data.spikes(0, t) * data.spikes(1, t);
  }
  REQUIRE(double(both) / double(data.n_bins()) >
          data.firing_rate[0] * data.firing_rate[1] + 0.01);
}

TEST_CASE("spike data validation") {
  Eigen::MatrixXi m(2, 4);
  m << 0, 1, 0, 2, 1, 0, 1, 0;
  REQUIRE_THROWS_WITH(make_spike_data(m), Catch::Matchers::ContainsSubstring("not 0/1"));
  Eigen::MatrixXi silent(2, 4);
  silent << 0, 0, 0, 0, 1, 0, 1, 0;
  REQUIRE_THROWS_WITH(make_spike_data(silent),
                      Catch::Matchers::ContainsSubstring("never fires"));
}

TEST_CASE("neuron_pairs enumerates lexicographically") {
  auto p = neuron_pairs(4);
  REQUIRE(p.size() == 6);
  REQUIRE(p[0] == std::make_pair(0, 1));
  REQUIRE(p[3] == std::make_pair(1, 2));
  REQUIRE(p[5] == std::make_pair(2, 3));
}
