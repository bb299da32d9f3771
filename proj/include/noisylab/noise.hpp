#pragma once

// Noise transition matrices, noisy-label sampling and instance-dependent
// flip-rate synthesis.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "noisylab/labels.hpp"
#include "noisylab/random.hpp"

namespace noisylab {

/// Dense square matrix, row-major.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t m) : m_(m), data_(m * m, 0.0) {}
  SquareMatrix(std::size_t m, std::vector<double> row_major);

  static SquareMatrix identity(std::size_t m);

  std::size_t size() const noexcept { return m_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * m_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * m_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * m_, m_};
  }
  const std::vector<double>& data() const noexcept { return data_; }

  SquareMatrix operator*(const SquareMatrix& rhs) const;
  std::vector<double> apply(std::span<const double> v) const;            // M v
  std::vector<double> apply_transposed(std::span<const double> v) const; // M^T v
  double max_abs_diff(const SquareMatrix& other) const;

 private:
  std::size_t m_ = 0;
  std::vector<double> data_;
};

/// Row-stochastic m x m matrix; entry (k, k') = P[noisy = k' | clean = k, x].
class TransitionMatrix {
 public:
  /// Throws std::invalid_argument unless every row is nonnegative and sums
  /// to 1 within 1e-12.
  explicit TransitionMatrix(SquareMatrix entries);

  std::size_t classes() const noexcept { return entries_.size(); }
  double operator()(std::size_t k, std::size_t k2) const { return entries_(k, k2); }
  std::span<const double> row(std::size_t k) const { return entries_.row(k); }
  const SquareMatrix& matrix() const noexcept { return entries_; }
  double determinant() const;
  bool invertible() const { return std::abs(determinant()) > 1e-12; }

 private:
  SquareMatrix entries_;
};

/// Class-dependent binary flip rates.
struct BinaryNoiseRates {
  double e_plus = 0.0;   // P[noisy = -1 | clean = +1]
  double e_minus = 0.0;  // P[noisy = +1 | clean = -1]

  /// Throws unless both rates lie in [0, 1) and e_plus + e_minus < 1.
  void validate() const;
  /// Probability that a label of class y is flipped.
  double flip_rate(Label y) const noexcept {
    return y == Label::Positive ? e_plus : e_minus;
  }
  /// P[noisy = +1 | clean = y].
  double positive_rate(Label y) const noexcept {
    return y == Label::Positive ? 1.0 - e_plus : e_minus;
  }
  bool symmetric() const noexcept { return e_plus == e_minus; }
};

/// [[1-e-, e-], [e+, 1-e+]] in class order (-1, +1).
TransitionMatrix binary_transition(const BinaryNoiseRates& rates);

/// Binary matrices use the closed form 1/(1-e+-e-) [[1-e+, -e-], [-e+, 1-e-]];
/// larger ones Gauss-Jordan with partial pivoting. Throws std::domain_error
/// when |det| <= 1e-12.
SquareMatrix invert_transition(const TransitionMatrix& t);
SquareMatrix invert_transition(const BinaryNoiseRates& rates);

/// l independent draws from row y of t.
std::vector<std::size_t> sample_noisy_labels(std::size_t y, std::size_t l,
                                             const TransitionMatrix& t, CounterRng& rng);
std::vector<Label> sample_noisy_labels(Label y, std::size_t l, const BinaryNoiseRates& rates,
                                       CounterRng& rng);

/// Standard normal CDF.
double normal_cdf(double z);

/// Draw from N(mean, sigma^2) restricted to [lo, hi]. Rejection from the
/// untruncated normal when at least half the mass lies inside, inverse CDF
/// otherwise.
double sample_truncated_normal(double mean, double sigma, double lo, double hi,
                               CounterRng& rng);

/// How the truncated-normal draw q and the feature projection combine into a
/// flip rate.
enum class RateCombiner {
  /// rate = q * 2 * logistic(x.W / |x|). The projection is standard normal
  /// over W, so the multiplier has mean 1 and E[rate] ~= epsilon.
  ScaledLogisticV1,
  /// rate = q; ignores features.
  QOnly,
};

inline constexpr double kMaxFlipRate = 1.0 - 1e-6;

struct InstanceNoiseDraw {
  double q = 0.0;           // truncated-normal draw
  double projection = 0.0;  // x.W / |x|
  double rate = 0.0;        // in [0, 1 - 1e-6]
};

/// Instance-dependent flip rates: q ~ N(epsilon, sigma^2, [0, 1]) per
/// instance, W ~ N(0, I) shared by all instances.
class InstanceNoiseSynth {
 public:
  InstanceNoiseSynth(double epsilon, double sigma, std::size_t dim, CounterRng& rng,
                     RateCombiner combiner = RateCombiner::ScaledLogisticV1);

  InstanceNoiseDraw draw(std::span<const double> features, CounterRng& rng) const;

  double epsilon() const noexcept { return epsilon_; }
  double sigma() const noexcept { return sigma_; }
  const std::vector<double>& projection_weights() const noexcept { return w_; }

 private:
  double epsilon_;
  double sigma_;
  RateCombiner combiner_;
  std::vector<double> w_;
};

/// One-shot form: samples fresh W and q and returns the instance's rate.
double synth_instance_noise(std::span<const double> features, double epsilon, double sigma,
                            CounterRng& rng);

}  // namespace noisylab
