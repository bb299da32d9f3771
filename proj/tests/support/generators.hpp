#pragma once

// Hand-rolled generators for property tests. Every case is a pure function
// of (seed, case index), so a failing case can be replayed directly.

#include <cmath>
#include <cstdint>
#include <vector>

#include "noisylab/labels.hpp"
#include "noisylab/memorize.hpp"
#include "noisylab/noise.hpp"
#include "noisylab/random.hpp"

namespace gen {

class Gen {
 public:
  Gen(std::uint64_t seed, std::uint64_t index) : rng_(seed, index) {}

  double real(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }
  std::uint64_t integer(std::uint64_t lo, std::uint64_t hi) {
    return lo + rng_.index(hi - lo + 1);
  }
  bool coin() { return rng_.bernoulli(0.5); }
  noisylab::Label label() {
    return coin() ? noisylab::Label::Positive : noisylab::Label::Negative;
  }

  /// e+ + e- < 1 with a margin, so corrections stay well conditioned.
  noisylab::BinaryNoiseRates rates(double max_sum = 0.95) {
    for (;;) {
      const double a = real(0.0, 0.9), b = real(0.0, 0.9);
      if (a + b < max_sum) return {a, b};
    }
  }
  noisylab::BinaryNoiseRates symmetric_rates(double max_e = 0.49) {
    const double e = real(0.0, max_e);
    return {e, e};
  }

  noisylab::LabelDist binary_dist() { return noisylab::LabelDist::binary(real(0.0, 1.0)); }

  std::vector<noisylab::Label> labels(std::size_t l) {
    std::vector<noisylab::Label> out(l);
    for (auto& y : out) y = label();
    return out;
  }

  std::vector<double> losses(std::size_t m, double lo = -3.0, double hi = 5.0) {
    std::vector<double> out(m);
    for (auto& v : out) v = real(lo, hi);
    return out;
  }

  /// Random probability vector of length k (normalized exponentials).
  std::vector<double> simplex(std::size_t k) {
    std::vector<double> out(k);
    double s = 0.0;
    for (auto& v : out) {
      v = -std::log(1.0 - rng_.uniform()) + 1e-9;
      s += v;
    }
    for (auto& v : out) v /= s;
    return out;
  }

  noisylab::CounterRng& rng() { return rng_; }

 private:
  noisylab::CounterRng rng_;
};

}  // namespace gen
