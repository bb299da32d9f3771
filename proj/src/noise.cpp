#include "noisylab/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace noisylab {

SquareMatrix::SquareMatrix(std::size_t m, std::vector<double> row_major)
    : m_(m), data_(std::move(row_major)) {
  if (data_.size() != m * m) {
    throw std::invalid_argument("SquareMatrix: expected m*m entries");
  }
}

SquareMatrix SquareMatrix::identity(std::size_t m) {
  SquareMatrix id(m);
  for (std::size_t i = 0; i < m; ++i) id(i, i) = 1.0;
  return id;
}

SquareMatrix SquareMatrix::operator*(const SquareMatrix& rhs) const {
  if (rhs.m_ != m_) throw std::invalid_argument("SquareMatrix: size mismatch");
  SquareMatrix out(m_);
  for (std::size_t i = 0; i < m_; ++i) {
    for (std::size_t k = 0; k < m_; ++k) {
      const double a = (*this)(i, k);
      for (std::size_t j = 0; j < m_; ++j) out(i, j) += a * rhs(k, j);
    }
  }
  return out;
}

std::vector<double> SquareMatrix::apply(std::span<const double> v) const {
  if (v.size() != m_) throw std::invalid_argument("SquareMatrix: vector size mismatch");
  std::vector<double> out(m_, 0.0);
  for (std::size_t i = 0; i < m_; ++i) {
    for (std::size_t j = 0; j < m_; ++j) out[i] += (*this)(i, j) * v[j];
  }
  return out;
}

std::vector<double> SquareMatrix::apply_transposed(std::span<const double> v) const {
  if (v.size() != m_) throw std::invalid_argument("SquareMatrix: vector size mismatch");
  std::vector<double> out(m_, 0.0);
  for (std::size_t j = 0; j < m_; ++j) {
    for (std::size_t i = 0; i < m_; ++i) out[j] += (*this)(i, j) * v[i];
  }
  return out;
}

double SquareMatrix::max_abs_diff(const SquareMatrix& other) const {
  if (other.m_ != m_) throw std::invalid_argument("SquareMatrix: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    d = std::max(d, std::abs(data_[i] - other.data_[i]));
  }
  return d;
}

TransitionMatrix::TransitionMatrix(SquareMatrix entries) : entries_(std::move(entries)) {
  if (entries_.size() == 0) throw std::invalid_argument("TransitionMatrix: no classes");
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    double sum = 0.0;
    for (double v : entries_.row(k)) {
      if (!(v >= 0.0)) throw std::invalid_argument("TransitionMatrix: negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("TransitionMatrix: row does not sum to 1");
    }
  }
}

namespace {

// Gauss-Jordan with partial pivoting. Returns the determinant; fills `inv`
// only when the matrix is numerically invertible.
double gauss_jordan(const SquareMatrix& a, SquareMatrix* inv) {
  const std::size_t m = a.size();
  SquareMatrix work = a;
  SquareMatrix out = SquareMatrix::identity(m);
  double det = 1.0;
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::abs(work(r, col)) > std::abs(work(pivot, col))) pivot = r;
    }
    if (work(pivot, col) == 0.0) return 0.0;
    if (pivot != col) {
      for (std::size_t j = 0; j < m; ++j) {
        std::swap(work(pivot, j), work(col, j));
        std::swap(out(pivot, j), out(col, j));
      }
      det = -det;
    }
    const double p = work(col, col);
    det *= p;
    for (std::size_t j = 0; j < m; ++j) {
      work(col, j) /= p;
      out(col, j) /= p;
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = work(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) {
        work(r, j) -= f * work(col, j);
        out(r, j) -= f * out(col, j);
      }
    }
  }
  if (inv != nullptr) *inv = std::move(out);
  return det;
}

}  // namespace

double TransitionMatrix::determinant() const {
  if (classes() == 2) {
    return entries_(0, 0) * entries_(1, 1) - entries_(0, 1) * entries_(1, 0);
  }
  return gauss_jordan(entries_, nullptr);
}

void BinaryNoiseRates::validate() const {
  if (!(e_plus >= 0.0 && e_plus < 1.0)) {
    throw std::invalid_argument("e_plus must lie in [0, 1)");
  }
  if (!(e_minus >= 0.0 && e_minus < 1.0)) {
    throw std::invalid_argument("e_minus must lie in [0, 1)");
  }
  if (!(e_plus + e_minus < 1.0)) {
    throw std::invalid_argument("e_plus + e_minus must be < 1");
  }
}

TransitionMatrix binary_transition(const BinaryNoiseRates& rates) {
  rates.validate();
  return TransitionMatrix(SquareMatrix(
      2, {1.0 - rates.e_minus, rates.e_minus, rates.e_plus, 1.0 - rates.e_plus}));
}

SquareMatrix invert_transition(const TransitionMatrix& t) {
  const double det = t.determinant();
  if (!(std::abs(det) > 1e-12)) {
    throw std::domain_error("invert_transition: singular transition matrix");
  }
  if (t.classes() == 2) {
    // Row 1 of T is (e+, 1-e+) and row 0 is (1-e-, e-).
    const double e_plus = t(1, 0);
    const double e_minus = t(0, 1);
    const double s = 1.0 / (1.0 - e_plus - e_minus);
    return SquareMatrix(2, {(1.0 - e_plus) * s, -e_minus * s, -e_plus * s,
                            (1.0 - e_minus) * s});
  }
  SquareMatrix inv;
  gauss_jordan(t.matrix(), &inv);
  return inv;
}

SquareMatrix invert_transition(const BinaryNoiseRates& rates) {
  return invert_transition(binary_transition(rates));
}

std::vector<std::size_t> sample_noisy_labels(std::size_t y, std::size_t l,
                                             const TransitionMatrix& t, CounterRng& rng) {
  if (l == 0) throw std::invalid_argument("sample_noisy_labels: l must be >= 1");
  if (y >= t.classes()) throw std::invalid_argument("sample_noisy_labels: label out of range");
  const auto row = t.row(y);
  std::vector<std::size_t> out(l);
  for (auto& label : out) {
    const double u = rng.uniform();
    double cum = 0.0;
    std::size_t k = 0;
    // Falls through to the last class with positive mass on rounding.
    std::size_t last_positive = 0;
    for (; k < row.size(); ++k) {
      if (row[k] > 0.0) last_positive = k;
      cum += row[k];
      if (u < cum) break;
    }
    label = k < row.size() ? k : last_positive;
  }
  return out;
}

std::vector<Label> sample_noisy_labels(Label y, std::size_t l, const BinaryNoiseRates& rates,
                                       CounterRng& rng) {
  if (l == 0) throw std::invalid_argument("sample_noisy_labels: l must be >= 1");
  rates.validate();
  const double flip = rates.flip_rate(y);
  std::vector<Label> out(l);
  for (auto& label : out) label = rng.bernoulli(flip) ? opposite(y) : y;
  return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// Inverse CDF sampling of a standard normal restricted to [a, b]. Works on the
// lower tail side so the CDF difference keeps its precision.
double truncated_standard_inverse(double a, double b, CounterRng& rng) {
  if (a > 0.0) return -truncated_standard_inverse(-b, -a, rng);
  const double fa = normal_cdf(a);
  const double fb = normal_cdf(b);
  const double u = fa + rng.uniform() * (fb - fa);
  double lo = a;
  double hi = b;
  if (!std::isfinite(lo)) lo = -40.0;
  if (!std::isfinite(hi)) hi = 40.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double sample_truncated_normal(double mean, double sigma, double lo, double hi,
                               CounterRng& rng) {
  if (!(sigma > 0.0)) throw std::invalid_argument("truncated normal: sigma must be > 0");
  if (!(lo < hi)) throw std::invalid_argument("truncated normal: empty support");
  const double a = (lo - mean) / sigma;
  const double b = (hi - mean) / sigma;
  const double acceptance = normal_cdf(b) - normal_cdf(a);
  if (acceptance >= 0.5) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const double x = mean + sigma * rng.normal();
      if (x >= lo && x <= hi) return x;
    }
  }
  const double z = truncated_standard_inverse(a, b, rng);
  return std::clamp(mean + sigma * z, lo, hi);
}

InstanceNoiseSynth::InstanceNoiseSynth(double epsilon, double sigma, std::size_t dim,
                                       CounterRng& rng, RateCombiner combiner)
    : epsilon_(epsilon), sigma_(sigma), combiner_(combiner), w_(dim) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("instance noise: epsilon must lie in [0, 1]");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("instance noise: sigma must be > 0");
  if (dim == 0) throw std::invalid_argument("instance noise: feature dimension must be >= 1");
  for (auto& w : w_) w = rng.normal();
}

InstanceNoiseDraw InstanceNoiseSynth::draw(std::span<const double> features,
                                           CounterRng& rng) const {
  if (features.size() != w_.size()) {
    throw std::invalid_argument("instance noise: feature dimension mismatch");
  }
  InstanceNoiseDraw d;
  d.q = sample_truncated_normal(epsilon_, sigma_, 0.0, 1.0, rng);
  double dot = 0.0;
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    dot += features[i] * w_[i];
    norm_sq += features[i] * features[i];
  }
  d.projection = norm_sq > 0.0 ? dot / std::sqrt(norm_sq) : 0.0;
  double rate = d.q;
  if (combiner_ == RateCombiner::ScaledLogisticV1) {
    rate = d.q * 2.0 / (1.0 + std::exp(-d.projection));
  }
  d.rate = std::clamp(rate, 0.0, kMaxFlipRate);
  return d;
}

double synth_instance_noise(std::span<const double> features, double epsilon, double sigma,
                            CounterRng& rng) {
  InstanceNoiseSynth synth(epsilon, sigma, features.size(), rng);
  return synth.draw(features, rng).rate;
}

}  // namespace noisylab
