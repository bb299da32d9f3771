#include "noisylab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace noisylab {
namespace {

void check_probability(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + " outside [0, 1]");
}

}  // namespace

std::string_view to_string(BoundKind kind) noexcept {
  switch (kind) {
    case BoundKind::HoeffdingSuccess: return "hoeffding_success";
    case BoundKind::BinomialFailureLower: return "binomial_failure_lower";
    case BoundKind::PeerSuccess: return "peer_success";
    case BoundKind::PeerFailureLower: return "peer_failure_lower";
    case BoundKind::Impact: return "impact";
    case BoundKind::Improvement: return "improvement";
  }
  return "unknown";
}

std::string_view to_string(PeerSuccessForm form) noexcept {
  switch (form) {
    case PeerSuccessForm::HoeffdingCorrected: return "hoeffding_corrected";
    case PeerSuccessForm::PaperLiteral: return "paper_literal";
  }
  return "unknown";
}

double bernoulli_kl(double a, double b) {
  check_probability(a, "bernoulli_kl: a");
  check_probability(b, "bernoulli_kl: b");
  if (b == 0.0 || b == 1.0) {
    if (a == b) return 0.0;
    throw std::domain_error("bernoulli_kl: b on the boundary with a different a");
  }
  double kl = 0.0;
  if (a > 0.0) kl += a * std::log(a / b);
  if (a < 1.0) kl += (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
  return std::max(0.0, kl);
}

double log_binomial_coefficient(std::uint64_t l, std::uint64_t k) {
  if (k > l) return -std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(l);
  const double kk = static_cast<double>(k);
  return std::lgamma(n + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(n - kk + 1.0);
}

double binom_pmf(std::uint64_t l, double p, std::uint64_t k) {
  check_probability(p, "binom_pmf: p");
  if (k > l) return 0.0;
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == l ? 1.0 : 0.0;
  const double kk = static_cast<double>(k);
  return std::exp(log_binomial_coefficient(l, k) + kk * std::log(p) +
                  (static_cast<double>(l) - kk) * std::log1p(-p));
}

double binom_tail(std::uint64_t l, double p, std::uint64_t k) {
  check_probability(p, "binom_tail: p");
  if (k > l) throw std::invalid_argument("binom_tail: threshold k exceeds l");
  if (k == 0) return 1.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;

  const double ratio = p / (1.0 - p);
  const double ld = static_cast<double>(l);
  const auto mode = static_cast<std::uint64_t>(std::min(std::floor((ld + 1.0) * p), ld));
  // Terms are unimodal in j. Walk outward from the largest tail term using
  // the exact ratio t(j+1)/t(j) = (l-j)/(j+1) * p/(1-p), stopping once terms
  // are negligible.
  auto upward = [&](std::uint64_t from) {
    double sum = 0.0, t = 1.0;
    for (std::uint64_t j = from; j <= l; ++j) {
      sum += t;
      if (t < 1e-18 * sum) break;
      t *= static_cast<double>(l - j) / static_cast<double>(j + 1) * ratio;
    }
    return sum;
  };

  // Mass is measured relative to the mode term and normalized by the total,
  // so the mode's absolute scale never enters.
  const double above = upward(mode);
  double below = 0.0, tail_below = 0.0, t = 1.0;
  for (std::uint64_t j = mode; j > 0; --j) {
    t *= static_cast<double>(j) / (static_cast<double>(l - j + 1) * ratio);
    below += t;
    if (j - 1 >= k) tail_below += t;
    if (t < 1e-18 * (above + below)) break;
  }
  const double total = above + below;
  if (k <= mode) return std::min(1.0, (above + tail_below) / total);

  t = 1.0;
  for (std::uint64_t j = mode; j < k && t >= 1e-280; ++j) {
    t *= static_cast<double>(l - j) / static_cast<double>(j + 1) * ratio;
  }
  if (t >= 1e-280) return std::min(1.0, t * upward(k) / total);

  // Far tail: relative accuracy is what matters, so work in logs.
  const double kk = static_cast<double>(k);
  const double log_peak =
      log_binomial_coefficient(l, k) + kk * std::log(p) + (ld - kk) * std::log1p(-p);
  return std::exp(log_peak) * upward(k);
}

double lc_success_lower(std::uint64_t l, double e) {
  if (!(e >= 0.0 && e <= 0.5)) throw std::invalid_argument("lc_success_lower: e must lie in [0, 1/2]");
  const double gap = 0.5 - e;
  return -std::expm1(-2.0 * static_cast<double>(l) * gap * gap);
}

std::uint64_t min_l_for_delta(double delta, double e) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("min_l_for_delta: delta must lie in (0, 1)");
  }
  if (!(e >= 0.0 && e < 0.5)) throw std::invalid_argument("min_l_for_delta: e must lie in [0, 1/2)");
  const double gap = 0.5 - e;
  const double need = std::log(1.0 / delta) / (2.0 * gap * gap);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(need)));
}

double lc_failure_lower(std::uint64_t l, double e) {
  if (l == 0) throw std::invalid_argument("lc_failure_lower: l must be >= 1");
  if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("lc_failure_lower: e must lie in (0, 1)");
  const double ld = static_cast<double>(l);
  return std::exp(-ld * bernoulli_kl(0.5, e)) / std::sqrt(2.0 * ld);
}

BoundValue lc_failure_bound(std::uint64_t l, double e) {
  BoundValue b;
  b.kind = BoundKind::BinomialFailureLower;
  b.value = lc_failure_lower(l, e);
  b.params.l = l;
  b.params.e_plus = e;
  b.params.e_minus = e;
  b.regime_ok = l % 2 == 0;
  return b;
}

std::optional<std::uint64_t> max_l_for_failure(double delta, double e) {
  if (!(delta > 0.0 && delta < 1.0 / std::sqrt(2.0))) {
    throw std::invalid_argument("max_l_for_failure: delta must lie in (0, 1/sqrt(2))");
  }
  if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("max_l_for_failure: e must lie in (0, 1)");
  const double kl = bernoulli_kl(0.5, e);
  if (kl == 0.0) return std::nullopt;
  const double limit = std::log(1.0 / (std::sqrt(2.0) * delta)) / kl;
  return static_cast<std::uint64_t>(std::floor(limit));
}

double peer_success_lower(std::uint64_t l, double p_opposite, double e_plus, double e_minus,
                          PeerSuccessForm form) {
  if (!(p_opposite > 0.0 && p_opposite < 1.0)) {
    throw std::invalid_argument("peer_success_lower: p_opposite must lie in (0, 1)");
  }
  if (!(e_plus >= 0.0 && e_minus >= 0.0 && e_plus + e_minus < 1.0)) {
    throw std::invalid_argument("peer_success_lower: need e_plus + e_minus < 1");
  }
  if (l == 0) return 0.0;
  const double ld = static_cast<double>(l);
  const double deviation = p_opposite * (1.0 - e_plus - e_minus);
  if (form == PeerSuccessForm::HoeffdingCorrected) {
    return -std::expm1(-2.0 * ld * deviation * deviation);
  }
  return -std::expm1(-2.0 * ld / (deviation * deviation));
}

double peer_failure_lower(std::uint64_t l, double e) { return lc_failure_lower(l, e); }

double improvement_bound(double tau_lower, double err_term) {
  if (!(tau_lower >= 0.0 && err_term >= 0.0)) {
    throw std::invalid_argument("improvement_bound: inputs must be nonnegative");
  }
  return tau_lower * err_term;
}

}  // namespace noisylab
