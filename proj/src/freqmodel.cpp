#include "noisylab/freqmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace noisylab {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> zipf_weights(std::size_t slots, double exponent, double offset) {
  std::vector<double> w(slots);
  for (std::size_t k = 0; k < slots; ++k) {
    w[k] = std::pow(static_cast<double>(k + 1) + offset, -exponent);
  }
  return w;
}

double normalized_max(const std::vector<double>& w) {
  // Summed smallest-first for a stable total.
  double total = 0.0;
  for (auto it = w.rbegin(); it != w.rend(); ++it) total += *it;
  return *std::max_element(w.begin(), w.end()) / total;
}

// log(sum exp(x_i)); -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// log of a^l (1-a)^(n-l), with 0 * log(0) taken as 0.
double log_moment_kernel(double a, std::uint64_t n, std::uint64_t l) {
  const double head = static_cast<double>(l) * std::log(a);
  if (n == l) return head;
  if (a >= 1.0) return kNegInf;
  return head + static_cast<double>(n - l) * std::log1p(-a);
}

void check_appearance(std::uint64_t n, std::uint64_t l) {
  if (l < 1) throw std::invalid_argument("appearance count l must be >= 1");
  if (l > n) throw std::invalid_argument("appearance count l must be <= n");
}

}  // namespace

PriorSpec build_prior(const PriorInput& input) {
  std::vector<double> raw;
  switch (input.generator) {
    case PriorGenerator::Explicit:
      if (input.values.empty()) throw std::invalid_argument("prior: N must be >= 1");
      for (double v : input.values) {
        if (!(v > 0.0) || !std::isfinite(v)) {
          throw std::invalid_argument("prior: values must be strictly positive");
        }
      }
      raw = input.values;
      break;
    case PriorGenerator::Uniform:
      if (input.slots == 0) throw std::invalid_argument("prior: N must be >= 1");
      raw.assign(input.slots, 1.0);
      break;
    case PriorGenerator::Zipf:
      if (input.slots == 0) throw std::invalid_argument("prior: N must be >= 1");
      if (!(input.exponent > 0.0)) {
        throw std::invalid_argument("prior: zipf exponent must be > 0");
      }
      if (!(input.offset >= 0.0)) {
        throw std::invalid_argument("prior: zipf offset must be >= 0");
      }
      raw = zipf_weights(input.slots, input.exponent, input.offset);
      break;
  }

  PriorSpec spec;
  spec.generator_ = input.generator;
  if (input.generator == PriorGenerator::Uniform) {
    spec.values_.assign(raw.size(), 1.0 / static_cast<double>(raw.size()));
  } else {
    double total = 0.0;
    for (auto it = raw.rbegin(); it != raw.rend(); ++it) total += *it;
    spec.values_.reserve(raw.size());
    for (double v : raw) spec.values_.push_back(v / total);
  }
  spec.pi_max_ = *std::max_element(spec.values_.begin(), spec.values_.end());
  return spec;
}

double zipf_offset_for_pi_max(std::size_t slots, double exponent, double target) {
  if (slots == 0) throw std::invalid_argument("zipf offset: N must be >= 1");
  if (!(exponent > 0.0)) throw std::invalid_argument("zipf offset: exponent must be > 0");
  if (!(target * static_cast<double>(slots) > 1.0)) {
    throw std::invalid_argument("zipf offset: target pi_max must exceed 1/N");
  }
  auto max_at = [&](double q) { return normalized_max(zipf_weights(slots, exponent, q)); };
  if (max_at(0.0) <= target) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (max_at(hi) > target) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-9 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (max_at(mid) > target ? lo : hi) = mid;
  }
  return hi;
}

FrequencySample normalize_draws(std::span<const double> draws) {
  if (draws.empty()) throw std::invalid_argument("normalize_draws: no draws");
  double total = 0.0;
  for (double p : draws) {
    if (!(p > 0.0)) throw std::invalid_argument("normalize_draws: draws must be > 0");
    total += p;
  }
  FrequencySample out;
  out.d.reserve(draws.size());
  for (double p : draws) out.d.push_back(p / total);
  return out;
}

FrequencySample sample_frequencies(const PriorSpec& prior, CounterRng& rng) {
  const auto& vals = prior.values();
  std::vector<double> draws(vals.size());
  for (auto& p : draws) p = vals[rng.index(vals.size())];
  return normalize_draws(draws);
}

McEstimate weight_estimate(const PriorSpec& prior, Interval interval,
                           std::size_t replicates, CounterRng& rng) {
  if (interval.lo > interval.hi) {
    throw std::invalid_argument("weight_estimate: interval lower end exceeds upper end");
  }
  if (interval.lo < 0.0 || interval.hi > 1.0) {
    throw std::invalid_argument("weight_estimate: interval must lie in [0, 1]");
  }
  if (replicates < 1) throw std::invalid_argument("weight_estimate: replicates must be >= 1");

  const auto& vals = prior.values();
  std::vector<double> draws(vals.size());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t r = 0; r < replicates; ++r) {
    double total = 0.0;
    for (auto& p : draws) {
      p = vals[rng.index(vals.size())];
      total += p;
    }
    // Accumulated in the same order as `total`, so full coverage gives exactly 1.
    double inside = 0.0;
    for (double p : draws) {
      if (interval.contains(p / total)) inside += p;
    }
    const double frac = inside / total;
    sum += frac;
    sum_sq += frac * frac;
  }
  const double n = static_cast<double>(replicates);
  const double mean = sum / n;
  double se = 0.0;
  if (replicates > 1) {
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    se = std::sqrt(var / n);
  }
  return {mean, se, replicates};
}

double tau_exact(std::span<const double> values, std::uint64_t n, std::uint64_t l) {
  check_appearance(n, l);
  if (values.empty()) throw std::invalid_argument("tau_exact: empty prior");
  for (double v : values) {
    if (!(v > 0.0) || v > 1.0) {
      throw std::invalid_argument("tau_exact: prior values must lie in (0, 1]");
    }
  }
  // tau is a weighted mean of the values with weights a^l (1-a)^(n-l); written
  // relative to the heaviest value so a point mass returns that value exactly.
  std::vector<double> logw(values.size());
  std::size_t ref = 0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    logw[j] = log_moment_kernel(values[j], n, l);
    if (logw[j] > logw[ref]) ref = j;
  }
  if (logw[ref] == kNegInf) {
    throw std::domain_error("tau_exact: every moment weight vanishes");
  }
  const double vref = values[ref];
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double w = std::exp(logw[j] - logw[ref]);
    num += (values[j] - vref) * w;
    den += w;
  }
  return vref + num / den;
}

double tau_exact(const PriorSpec& prior, std::uint64_t n, std::uint64_t l) {
  return tau_exact(std::span<const double>(prior.values()), n, l);
}

McEstimate tau_monte_carlo(const PriorSpec& prior, std::uint64_t n, std::uint64_t l,
                           std::size_t replicates, CounterRng& rng) {
  check_appearance(n, l);
  if (replicates < 1) throw std::invalid_argument("tau_monte_carlo: replicates must be >= 1");

  std::vector<double> log_num(replicates);
  std::vector<double> log_den(replicates);
  std::vector<double> kernel(prior.size());
  std::vector<double> kernel_up(prior.size());
  for (std::size_t r = 0; r < replicates; ++r) {
    const FrequencySample sample = sample_frequencies(prior, rng);
    for (std::size_t x = 0; x < sample.d.size(); ++x) {
      const double a = sample.d[x];
      kernel[x] = log_moment_kernel(a, n, l);
      kernel_up[x] = kernel[x] + std::log(a);
    }
    log_den[r] = log_sum_exp(kernel);
    log_num[r] = log_sum_exp(kernel_up);
  }

  const double shift = *std::max_element(log_den.begin(), log_den.end());
  if (shift == kNegInf) throw std::domain_error("tau_monte_carlo: every moment weight vanishes");
  std::vector<double> num(replicates);
  std::vector<double> den(replicates);
  double sum_num = 0.0;
  double sum_den = 0.0;
  for (std::size_t r = 0; r < replicates; ++r) {
    num[r] = std::exp(log_num[r] - shift);
    den[r] = std::exp(log_den[r] - shift);
    sum_num += num[r];
    sum_den += den[r];
  }
  const double ratio = sum_num / sum_den;
  double se = 0.0;
  if (replicates > 1) {
    const double reps = static_cast<double>(replicates);
    double ss = 0.0;
    for (std::size_t r = 0; r < replicates; ++r) {
      const double z = num[r] - ratio * den[r];
      ss += z * z;
    }
    const double mean_den = sum_den / reps;
    se = std::sqrt(ss / (reps - 1.0) / reps) / mean_den;
  }
  return {ratio, se, replicates};
}

Interval large_bound_interval(std::uint64_t n, std::uint64_t l) {
  check_appearance(n, l);
  const double nd = static_cast<double>(n);
  const double ld = static_cast<double>(l);
  const double lo = n > 1 ? (2.0 / 3.0) * (ld - 1.0) / (nd - 1.0) : 0.0;
  return {lo, std::min(1.0, (4.0 / 3.0) * ld / nd)};
}

Interval small_bound_interval(std::uint64_t n, std::uint64_t l) {
  check_appearance(n, l);
  if (n < 2) return {0.0, 0.0};
  const double frac = (static_cast<double>(l) - 1.0) / (static_cast<double>(n) - 1.0);
  return {0.7 * frac, std::min(1.0, (4.0 / 3.0) * frac)};
}

TauLowerBound tau_lower_large(std::uint64_t n, std::uint64_t l, double weight) {
  check_appearance(n, l);
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw std::invalid_argument("tau_lower_large: weight must lie in [0, 1]");
  }
  TauLowerBound b;
  b.weight_interval = large_bound_interval(n, l);
  if (n > 1) {
    const double nd = static_cast<double>(n);
    const double ld = static_cast<double>(l);
    b.value = 0.4 * (ld * (ld - 1.0)) / (nd * (nd - 1.0)) * weight;
  }
  b.vacuous = b.value == 0.0;
  return b;
}

TauLowerBound tau_lower_small(std::uint64_t n, std::uint64_t l, double weight) {
  check_appearance(n, l);
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw std::invalid_argument("tau_lower_small: weight must lie in [0, 1]");
  }
  TauLowerBound b;
  b.weight_interval = small_bound_interval(n, l);
  if (n > 1) {
    const double frac = (static_cast<double>(l) - 1.0) / (static_cast<double>(n) - 1.0);
    b.value = 0.4 * frac / std::pow(1.1, static_cast<double>(l)) * weight;
  }
  b.vacuous = b.value == 0.0;
  return b;
}

bool large_bound_regime(const PriorSpec& prior, std::uint64_t n, std::uint64_t l) {
  return n >= 1000 && prior.size() >= 100 && l >= 1 && 10 * l <= n &&
         prior.bound_precondition_met();
}

TauEstimate estimate_tau(const PriorSpec& prior, std::uint64_t n, std::uint64_t l,
                         std::size_t tau_replicates, std::size_t weight_replicates,
                         CounterRng& rng) {
  TauEstimate est;
  est.l = l;
  est.n = n;
  // A normalized point mass puts frequency 1 on its only instance, so no
  // instance can appear exactly l < n times and tau is undefined.
  try {
    est.exact = tau_exact(prior, n, l);
    if (tau_replicates > 0) est.mc = tau_monte_carlo(prior, n, l, tau_replicates, rng);
  } catch (const std::domain_error&) {
  }
  est.weight_large = weight_estimate(prior, large_bound_interval(n, l), weight_replicates, rng);
  est.weight_small = weight_estimate(prior, small_bound_interval(n, l), weight_replicates, rng);
  est.lower_large = tau_lower_large(n, l, est.weight_large.value).value;
  est.lower_small = tau_lower_small(n, l, est.weight_small.value).value;
  est.regime_ok = large_bound_regime(prior, n, l);
  return est;
}

}  // namespace noisylab
