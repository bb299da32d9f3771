#pragma once

// Empirical noisy-label distributions, the memorizing predictor, and the
// excessive generalization error it induces.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "noisylab/labels.hpp"

namespace noisylab {

/// Distribution over m classes. Proper distributions have entries in [0, 1];
/// signed ones (uncapped corrected labels) may leave that range. Both sum to
/// 1 within 1e-12.
class LabelDist {
 public:
  static LabelDist proper(std::vector<double> probs);
  static LabelDist signed_dist(std::vector<double> probs);
  static LabelDist one_hot(std::size_t classes, std::size_t k);
  static LabelDist uniform(std::size_t classes);
  /// Binary distribution [1 - p, p] with p = P[+1].
  static LabelDist binary(double p_positive);

  std::size_t classes() const noexcept { return probs_.size(); }
  double operator[](std::size_t k) const { return probs_[k]; }
  double at(Label y) const { return probs_.at(class_index(y)); }
  const std::vector<double>& probs() const noexcept { return probs_; }
  bool is_proper() const noexcept;

 private:
  explicit LabelDist(std::vector<double> probs) : probs_(std::move(probs)) {}
  std::vector<double> probs_;
};

/// probs[k] = count(k) / l. Throws on an empty list or an out-of-range label.
LabelDist empirical_distribution(std::span<const std::size_t> labels, std::size_t classes);
LabelDist empirical_distribution(std::span<const Label> labels);
/// Binary empirical distribution of l labels of which `positives` are +1.
LabelDist empirical_from_count(std::uint64_t positives, std::uint64_t l);

/// P[h(x) != y] for a predictor whose output distribution is `dist`,
/// computed as 1 - probs[y].
double memorization_error(const LabelDist& dist, std::size_t y);
double memorization_error(const LabelDist& dist, Label y);

enum class PredictorMode {
  /// Output equals the empirical noisy-label distribution.
  Memorize,
  /// Output preserves the order of the empirical probabilities but is
  /// sharpened (p^s / sum p^s). Exploratory only; nothing is asserted on it.
  OrderPreserving,
};

LabelDist memorizing_predictor(const LabelDist& dist, PredictorMode mode,
                               double sharpness = 2.0);

struct ExcessRecord {
  std::uint64_t l = 0;
  double tau = 0.0;
  double err = 0.0;
  double individual_excess = 0.0;  // tau * err
};

/// tau * err. Throws unless tau >= 0 and err in [0, 1].
double individual_excess(double tau, double err);
ExcessRecord make_excess_record(std::uint64_t l, double tau, double err);

/// Sum of tau_l * P[h(x) != y] over all records. Summed in a canonical order,
/// so the result does not depend on the order of `records`.
double total_excess(std::span<const ExcessRecord> records);

/// Large-l tau lower bound times the memorization error: the computable
/// instantiation of the disparate-impact lower bound.
double impact_lower_bound(std::uint64_t n, std::uint64_t l, double weight,
                          const LabelDist& dist, std::size_t y);

}  // namespace noisylab
