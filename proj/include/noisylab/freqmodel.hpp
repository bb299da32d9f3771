#pragma once

// Instance-frequency priors and the importance weight of l-appearance
// instances.
//
// Generative process: each of N instance slots draws p_x uniformly from the
// prior value set, and the instance distribution is D(x) = p_x / sum p_x.
// tau_l is the ratio E[a^(l+1) (1-a)^(n-l)] / E[a^l (1-a)^(n-l)].

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "noisylab/random.hpp"

namespace noisylab {

enum class PriorGenerator { Explicit, Uniform, Zipf };

/// Largest prior value the tau lower bounds are stated for.
inline constexpr double kPiMaxForBounds = 1.0 / 20.0;

struct PriorInput {
  PriorGenerator generator = PriorGenerator::Uniform;
  std::size_t slots = 0;      // N, for uniform and zipf
  std::vector<double> values; // explicit values
  double exponent = 1.0;      // zipf: weight of rank k is (k + offset)^-exponent
  double offset = 0.0;
};

/// Normalized prior set pi = {pi_1..pi_N}.
class PriorSpec {
 public:
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double pi_max() const noexcept { return pi_max_; }
  PriorGenerator generator() const noexcept { return generator_; }
  /// Whether pi_max <= 1/20, the precondition of both tau lower bounds.
  bool bound_precondition_met() const noexcept {
    return pi_max_ <= kPiMaxForBounds;
  }

 private:
  friend PriorSpec build_prior(const PriorInput& input);
  std::vector<double> values_;
  double pi_max_ = 0.0;
  PriorGenerator generator_ = PriorGenerator::Explicit;
};

/// Throws std::invalid_argument on N = 0, non-positive explicit values, or a
/// non-positive zipf exponent / negative offset.
PriorSpec build_prior(const PriorInput& input);

/// Smallest zipf rank offset (to ~1e-9 relative) whose normalized prior has
/// pi_max <= target.
double zipf_offset_for_pi_max(std::size_t slots, double exponent, double target);

struct FrequencySample {
  std::vector<double> d;
};

/// D(x) = p_x / sum p_x for already realized draws.
FrequencySample normalize_draws(std::span<const double> draws);

FrequencySample sample_frequencies(const PriorSpec& prior, CounterRng& rng);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t replicates = 0;
};

/// Monte-Carlo estimate of weight(pi, [lo, hi]) = E[sum_x D(x) 1(D(x) in [lo, hi])].
McEstimate weight_estimate(const PriorSpec& prior, Interval interval,
                           std::size_t replicates, CounterRng& rng);

/// Closed-form tau_l with the expectation taken uniformly over a raw prior
/// value set. Evaluated in log space; safe for n up to 1e7 and beyond.
double tau_exact(std::span<const double> values, std::uint64_t n, std::uint64_t l);
double tau_exact(const PriorSpec& prior, std::uint64_t n, std::uint64_t l);

/// tau_l over the normalized D(x): each replicate samples all p_x, normalizes,
/// and contributes every slot's D(x) to both moments. The standard error is
/// the delta-method error of the ratio of replicate means.
McEstimate tau_monte_carlo(const PriorSpec& prior, std::uint64_t n, std::uint64_t l,
                           std::size_t replicates, CounterRng& rng);

struct TauLowerBound {
  double value = 0.0;
  Interval weight_interval;  // frequencies the caller's weight query covers
  bool vacuous = false;      // l = 1 or weight = 0
};

/// Frequency window [2/3 (l-1)/(n-1), 4/3 l/n] used by the large-l bound.
Interval large_bound_interval(std::uint64_t n, std::uint64_t l);
/// Frequency window [0.7 (l-1)/(n-1), 4/3 (l-1)/(n-1)] used by the small-l bound.
Interval small_bound_interval(std::uint64_t n, std::uint64_t l);

/// 0.4 l(l-1)/(n(n-1)) * weight.
TauLowerBound tau_lower_large(std::uint64_t n, std::uint64_t l, double weight);
/// 0.4 (l-1)/(n-1) / 1.1^l * weight.
TauLowerBound tau_lower_small(std::uint64_t n, std::uint64_t l, double weight);

/// Regime in which the large-l bound is asserted rather than just reported:
/// n >= 1000, N >= 100, l <= n/10 and pi_max <= 1/20.
bool large_bound_regime(const PriorSpec& prior, std::uint64_t n, std::uint64_t l);

struct TauEstimate {
  std::uint64_t l = 0;
  std::uint64_t n = 0;
  std::optional<double> exact;  // empty when every moment weight vanishes
  std::optional<McEstimate> mc;
  McEstimate weight_large;
  McEstimate weight_small;
  double lower_large = 0.0;
  double lower_small = 0.0;
  bool regime_ok = false;
};

/// Everything known about tau_l for one (n, l): closed form, optional
/// normalized-mode MC (replicates > 0), and both lower bounds with their
/// weights estimated from `weight_replicates` samples.
TauEstimate estimate_tau(const PriorSpec& prior, std::uint64_t n, std::uint64_t l,
                         std::size_t tau_replicates, std::size_t weight_replicates,
                         CounterRng& rng);

}  // namespace noisylab
