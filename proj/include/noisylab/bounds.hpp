#pragma once

// Closed-form probability bounds for the treatments and the exact binomial
// tails they are checked against. Natural logarithms throughout.

#include <cstdint>
#include <optional>
#include <string_view>

namespace noisylab {

enum class BoundKind {
  HoeffdingSuccess,
  BinomialFailureLower,
  PeerSuccess,
  PeerFailureLower,
  Impact,
  Improvement,
};

std::string_view to_string(BoundKind kind) noexcept;

/// Parameters a bound value was computed from.
struct BoundParams {
  std::uint64_t l = 0;
  double e_plus = 0.0;
  double e_minus = 0.0;
  double p_plus = 0.5;
  std::optional<double> delta;
};

struct BoundValue {
  BoundKind kind = BoundKind::HoeffdingSuccess;
  double value = 0.0;
  BoundParams params;
  bool regime_ok = false;  // preconditions for asserting the bound are met
};

/// KL(Bern(a) || Bern(b)) with 0 log 0 = 0. Throws when b is 0 or 1 and a
/// differs from it, or when a or b lie outside [0, 1].
double bernoulli_kl(double a, double b);

/// log C(l, k) via lgamma.
double log_binomial_coefficient(std::uint64_t l, std::uint64_t k);

/// P[Bin(l, p) = k].
double binom_pmf(std::uint64_t l, double p, std::uint64_t k);

/// Exact P[Bin(l, p) >= k], summed in log space; fine for l up to 1e6 and
/// beyond. Throws when k > l.
double binom_tail(std::uint64_t l, double p, std::uint64_t k);

/// 1 - exp(-2 l (1/2 - e)^2): probability that a strict majority of l labels
/// is correct, when each is flipped with rate e. Requires e in [0, 1/2].
double lc_success_lower(std::uint64_t l, double e);

/// Smallest l with l >= log(1/delta) / (2 (1/2 - e)^2), at least 1.
std::uint64_t min_l_for_delta(double delta, double e);

/// exp(-l KL(1/2 || e)) / sqrt(2 l). Lower-bounds P[Bin(l, e) >= l/2] for
/// even l; at odd l the threshold is not an integer and the bound can exceed
/// the exact tail, so only even l is asserted.
double lc_failure_lower(std::uint64_t l, double e);
BoundValue lc_failure_bound(std::uint64_t l, double e);

/// Largest l with l <= log(1 / (sqrt(2) delta)) / KL(1/2 || e). nullopt
/// means every l qualifies (e = 1/2). Requires delta in (0, 1/sqrt(2)).
std::optional<std::uint64_t> max_l_for_failure(double delta, double e);

enum class PeerSuccessForm {
  /// 1 - exp(-2 l (p (1 - e+ - e-))^2), the Hoeffding step with the
  /// deviation squared.
  HoeffdingCorrected,
  /// 1 - exp(-2 l / (p^2 (1 - e+ - e-)^2)), the exponent as printed in the
  /// theorem statement. Reported side by side; never asserted.
  PaperLiteral,
};

std::string_view to_string(PeerSuccessForm form) noexcept;

/// p_opposite is the clean prior of the class opposite to the true label.
double peer_success_lower(std::uint64_t l, double p_opposite, double e_plus, double e_minus,
                          PeerSuccessForm form = PeerSuccessForm::HoeffdingCorrected);

/// exp(-l KL(1/2 || e)) / sqrt(2 l). The failure threshold equals l/2 only
/// for p+ = p- = 1/2 and e+ = e-; outside that regime it is reported only.
double peer_failure_lower(std::uint64_t l, double e);

/// tau_lower * err_term; err_term = 1 for loss correction, the memorized
/// error for peer loss.
double improvement_bound(double tau_lower, double err_term);

}  // namespace noisylab
