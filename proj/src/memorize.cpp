#include "noisylab/memorize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "noisylab/freqmodel.hpp"

namespace noisylab {
namespace {

double checked_sum(const std::vector<double>& probs) {
  if (probs.empty()) throw std::invalid_argument("LabelDist: no classes");
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p)) throw std::invalid_argument("LabelDist: non-finite entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("LabelDist: entries must sum to 1");
  }
  return sum;
}

}  // namespace

LabelDist LabelDist::proper(std::vector<double> probs) {
  checked_sum(probs);
  for (double p : probs) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("LabelDist: entry outside [0, 1]");
  }
  return LabelDist(std::move(probs));
}

LabelDist LabelDist::signed_dist(std::vector<double> probs) {
  checked_sum(probs);
  return LabelDist(std::move(probs));
}

LabelDist LabelDist::one_hot(std::size_t classes, std::size_t k) {
  if (k >= classes) throw std::invalid_argument("LabelDist: class out of range");
  std::vector<double> p(classes, 0.0);
  p[k] = 1.0;
  return LabelDist(std::move(p));
}

LabelDist LabelDist::uniform(std::size_t classes) {
  if (classes == 0) throw std::invalid_argument("LabelDist: no classes");
  return LabelDist(std::vector<double>(classes, 1.0 / static_cast<double>(classes)));
}

LabelDist LabelDist::binary(double p_positive) {
  if (!(p_positive >= 0.0 && p_positive <= 1.0)) {
    throw std::invalid_argument("LabelDist: P[+1] outside [0, 1]");
  }
  return LabelDist({1.0 - p_positive, p_positive});
}

bool LabelDist::is_proper() const noexcept {
  return std::all_of(probs_.begin(), probs_.end(),
                     [](double p) { return p >= 0.0 && p <= 1.0; });
}

LabelDist empirical_distribution(std::span<const std::size_t> labels, std::size_t classes) {
  if (labels.empty()) throw std::invalid_argument("empirical_distribution: empty label list");
  if (classes == 0) throw std::invalid_argument("empirical_distribution: no classes");
  std::vector<std::size_t> counts(classes, 0);
  for (std::size_t k : labels) {
    if (k >= classes) throw std::invalid_argument("empirical_distribution: label out of range");
    ++counts[k];
  }
  const double l = static_cast<double>(labels.size());
  std::vector<double> probs(classes);
  for (std::size_t k = 0; k < classes; ++k) probs[k] = static_cast<double>(counts[k]) / l;
  return LabelDist::proper(std::move(probs));
}

LabelDist empirical_distribution(std::span<const Label> labels) {
  if (labels.empty()) throw std::invalid_argument("empirical_distribution: empty label list");
  const auto positives = std::count(labels.begin(), labels.end(), Label::Positive);
  return empirical_from_count(static_cast<std::uint64_t>(positives), labels.size());
}

LabelDist empirical_from_count(std::uint64_t positives, std::uint64_t l) {
  if (l == 0) throw std::invalid_argument("empirical_from_count: l must be >= 1");
  if (positives > l) throw std::invalid_argument("empirical_from_count: positives exceed l");
  const double ld = static_cast<double>(l);
  return LabelDist::proper(
      {static_cast<double>(l - positives) / ld, static_cast<double>(positives) / ld});
}

double memorization_error(const LabelDist& dist, std::size_t y) {
  if (y >= dist.classes()) throw std::out_of_range("memorization_error: label out of range");
  if (!dist.is_proper()) {
    throw std::invalid_argument("memorization_error: distribution must be proper");
  }
  return 1.0 - dist[y];
}

double memorization_error(const LabelDist& dist, Label y) {
  return memorization_error(dist, class_index(y));
}

LabelDist memorizing_predictor(const LabelDist& dist, PredictorMode mode, double sharpness) {
  if (mode == PredictorMode::Memorize) return dist;
  if (!(sharpness >= 1.0)) throw std::invalid_argument("memorizing_predictor: sharpness < 1");
  if (!dist.is_proper()) {
    throw std::invalid_argument("memorizing_predictor: distribution must be proper");
  }
  std::vector<double> p(dist.classes());
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = std::pow(dist[k], sharpness);
    total += p[k];
  }
  for (auto& v : p) v /= total;
  // Renormalized entries can miss 1 by a few ulps; fold the residue into the
  // largest entry.
  double sum = 0.0;
  for (double v : p) sum += v;
  *std::max_element(p.begin(), p.end()) += 1.0 - sum;
  return LabelDist::proper(std::move(p));
}

double individual_excess(double tau, double err) {
  if (!(tau >= 0.0)) throw std::invalid_argument("individual_excess: tau must be >= 0");
  if (!(err >= 0.0 && err <= 1.0)) {
    throw std::invalid_argument("individual_excess: err must lie in [0, 1]");
  }
  return tau * err;
}

ExcessRecord make_excess_record(std::uint64_t l, double tau, double err) {
  return {l, tau, err, individual_excess(tau, err)};
}

double total_excess(std::span<const ExcessRecord> records) {
  std::vector<ExcessRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(), [](const ExcessRecord& a, const ExcessRecord& b) {
    return std::tie(a.l, a.tau, a.err) < std::tie(b.l, b.tau, b.err);
  });
  double total = 0.0;
  for (const auto& r : sorted) total += r.individual_excess;
  return total;
}

double impact_lower_bound(std::uint64_t n, std::uint64_t l, double weight,
                          const LabelDist& dist, std::size_t y) {
  return tau_lower_large(n, l, weight).value * memorization_error(dist, y);
}

}  // namespace noisylab
