#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "generators.hpp"
#include "noisylab/noise.hpp"
#include "oracles.hpp"

using namespace noisylab;

TEST_SUITE("noise") {

TEST_CASE("binary transition layout") {
  const TransitionMatrix id = binary_transition({0.0, 0.0});
  CHECK(id.matrix().max_abs_diff(SquareMatrix::identity(2)) == 0.0);

  const TransitionMatrix t = binary_transition({0.2, 0.2});
  CHECK(t(0, 0) == doctest::Approx(0.8));
  CHECK(t(0, 1) == doctest::Approx(0.2));
  CHECK(t(1, 0) == doctest::Approx(0.2));
  CHECK(t(1, 1) == doctest::Approx(0.8));

  const TransitionMatrix a = binary_transition({0.3, 0.1});
  CHECK(a(1, 0) == doctest::Approx(0.3));  // clean +1 read as -1
  CHECK(a(0, 1) == doctest::Approx(0.1));  // clean -1 read as +1

  CHECK_THROWS_AS(binary_transition({0.6, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(binary_transition({0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(binary_transition({-0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("rate validation message") {
  try {
    BinaryNoiseRates{0.7, 0.5}.validate();
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("e_plus + e_minus must be < 1") != std::string::npos);
  }
}

TEST_CASE("transition matrices must be row-stochastic") {
  CHECK_THROWS_AS(TransitionMatrix(SquareMatrix(2, {0.5, 0.4, 0.2, 0.8})), std::invalid_argument);
  CHECK_THROWS_AS(TransitionMatrix(SquareMatrix(2, {1.1, -0.1, 0.2, 0.8})), std::invalid_argument);
  CHECK_NOTHROW(TransitionMatrix(SquareMatrix(3, {0.5, 0.25, 0.25, 0.1, 0.8, 0.1, 0, 0, 1})));
}

TEST_CASE("binary inverse closed form") {
  const SquareMatrix inv = invert_transition(BinaryNoiseRates{0.2, 0.2});
  CHECK(inv(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(inv(0, 1) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  CHECK(inv(1, 0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  CHECK(inv(1, 1) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

  const SquareMatrix id = invert_transition(binary_transition({0.0, 0.0}));
  CHECK(id.max_abs_diff(SquareMatrix::identity(2)) == 0.0);
}

TEST_CASE("singular transitions are rejected") {
  const TransitionMatrix rank1(SquareMatrix(2, {0.5, 0.5, 0.5, 0.5}));
  CHECK_FALSE(rank1.invertible());
  CHECK_THROWS_AS(invert_transition(rank1), std::domain_error);
  const TransitionMatrix flip_all(SquareMatrix(2, {0.3, 0.7, 0.3, 0.7}));
  CHECK_THROWS_AS(invert_transition(flip_all), std::domain_error);
}

TEST_CASE("inverse recovers the identity on the rate grid") {
  const double grid[] = {0.0, 0.1, 0.2, 0.3, 0.4};
  for (double a : grid) {
    for (double b : grid) {
      if (!(a + b < 1.0)) continue;
      const TransitionMatrix t = binary_transition({a, b});
      const SquareMatrix inv = invert_transition(t);
      CHECK((t.matrix() * inv).max_abs_diff(SquareMatrix::identity(2)) <= 1e-10);
      CHECK((inv * t.matrix()).max_abs_diff(SquareMatrix::identity(2)) <= 1e-10);
    }
  }
}

TEST_CASE("general inverse on random diagonally dominant transitions") {
  for (std::uint64_t i = 0; i < 200; ++i) {
    gen::Gen g(41, i);
    const std::size_t m = g.integer(2, 5);
    SquareMatrix raw(m);
    for (std::size_t r = 0; r < m; ++r) {
      auto row = g.simplex(m);
      for (std::size_t c = 0; c < m; ++c) row[c] *= 0.4;
      row[r] += 0.6;
      for (std::size_t c = 0; c < m; ++c) raw(r, c) = row[c];
    }
    const TransitionMatrix t(raw);
    const SquareMatrix inv = invert_transition(t);
    CHECK((t.matrix() * inv).max_abs_diff(SquareMatrix::identity(m)) <= 1e-10);
  }
}

TEST_CASE("every constructed binary transition is row-stochastic") {
  for (std::uint64_t i = 0; i < 500; ++i) {
    gen::Gen g(42, i);
    const TransitionMatrix t = binary_transition(g.rates());
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(std::abs(t(k, 0) + t(k, 1) - 1.0) <= 1e-12);
      CHECK(t(k, 0) >= 0.0);
      CHECK(t(k, 1) >= 0.0);
    }
  }
}

TEST_CASE("zero noise reproduces the clean label") {
  CounterRng rng(1);
  const auto labels = sample_noisy_labels(Label::Positive, 5, BinaryNoiseRates{0.0, 0.0}, rng);
  REQUIRE(labels.size() == 5);
  for (Label y : labels) CHECK(y == Label::Positive);
}

TEST_CASE("sampling requires at least one label") {
  CounterRng rng(1);
  CHECK_THROWS_AS(sample_noisy_labels(Label::Positive, 0, BinaryNoiseRates{0.1, 0.1}, rng),
                  std::invalid_argument);
}

TEST_CASE("empirical flip fraction matches the rate") {
  CounterRng rng(2);
  const std::size_t n = 100000;
  const auto labels = sample_noisy_labels(Label::Positive, n, BinaryNoiseRates{0.2, 0.1}, rng);
  const double flips =
      static_cast<double>(std::count(labels.begin(), labels.end(), Label::Negative)) / n;
  CHECK(std::abs(flips - 0.2) <= 3.0 * std::sqrt(0.2 * 0.8 / n));
}

TEST_CASE("three-class sampling matches the row") {
  const TransitionMatrix t(SquareMatrix(3, {0.5, 0.25, 0.25, 0.1, 0.8, 0.1, 0.2, 0.2, 0.6}));
  CounterRng rng(3);
  const std::size_t n = 100000;
  const auto labels = sample_noisy_labels(0, n, t, rng);
  std::vector<double> freq(3, 0.0);
  for (std::size_t k : labels) freq[k] += 1.0 / n;
  for (std::size_t k = 0; k < 3; ++k) {
    const double p = t(0, k);
    CHECK(std::abs(freq[k] - p) <= 3.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST_CASE("sampling is bit-reproducible") {
  CounterRng a(99, 4), b(99, 4);
  CHECK(sample_noisy_labels(Label::Negative, 1000, BinaryNoiseRates{0.3, 0.2}, a) ==
        sample_noisy_labels(Label::Negative, 1000, BinaryNoiseRates{0.3, 0.2}, b));
}

TEST_CASE("normal_cdf reference points") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_cdf(-1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-12));
}

TEST_CASE("degenerate truncated normal collapses to its mean") {
  CounterRng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double q = sample_truncated_normal(0.3, 1e-9, 0.0, 1.0, rng);
    CHECK(std::abs(q - 0.3) <= 1e-6);
  }
}

TEST_CASE("truncated normal mean matches quadrature") {
  for (double eps : {0.2, 0.02, 0.97}) {
    CounterRng rng(6);
    const std::size_t n = 100000;
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double q = sample_truncated_normal(eps, 0.1, 0.0, 1.0, rng);
      REQUIRE(q >= 0.0);
      REQUIRE(q <= 1.0);
      s += q;
      s2 += q * q;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - oracle::truncated_normal_mean(eps, 0.1, 0.0, 1.0)) <= 3.0 * se);
  }
}

TEST_CASE("far-tail truncation still lands inside the window") {
  CounterRng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const double q = sample_truncated_normal(-2.0, 0.1, 0.0, 1.0, rng);
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
  }
}

TEST_CASE("instance noise rates stay in [0, 1)") {
  for (std::uint64_t i = 0; i < 200; ++i) {
    gen::Gen g(43, i);
    const double eps = g.real(0.0, 1.0);
    std::vector<double> x(6);
    for (auto& v : x) v = g.real(-3.0, 3.0);
    const double r = synth_instance_noise(x, eps, 0.1, g.rng());
    CHECK(r >= 0.0);
    CHECK(r < 1.0);
  }
}

TEST_CASE("instance noise rejects bad parameters") {
  CounterRng rng(8);
  const std::vector<double> x = {1.0, 2.0};
  CHECK_THROWS_AS(synth_instance_noise(x, 1.5, 0.1, rng), std::invalid_argument);
  CHECK_THROWS_AS(synth_instance_noise(x, -0.1, 0.1, rng), std::invalid_argument);
  CHECK_THROWS_AS(synth_instance_noise(x, 0.2, 0.0, rng), std::invalid_argument);
}

TEST_CASE("q with vanishing sigma equals epsilon") {
  CounterRng wrng(9);
  const InstanceNoiseSynth synth(0.25, 1e-9, 4, wrng, RateCombiner::QOnly);
  CounterRng rng(10);
  const std::vector<double> x = {0.5, -1.0, 2.0, 0.0};
  const InstanceNoiseDraw d = synth.draw(x, rng);
  CHECK(std::abs(d.q - 0.25) <= 1e-6);
  CHECK(d.rate == d.q);
}

TEST_CASE("average synthesized rate tracks epsilon") {
  CounterRng wrng(11);
  const std::size_t dim = 16;
  const InstanceNoiseSynth synth(0.2, 0.1, dim, wrng);
  const std::size_t n = 50000;
  double s = 0.0;
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(12, i);
    for (auto& v : x) v = rng.normal();
    s += synth.draw(x, rng).rate;
  }
  CHECK(std::abs(s / n - 0.2) < 0.01);
}

}
