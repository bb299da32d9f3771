#pragma once

// Seeded Monte-Carlo engine: per-treatment success / failure / tie rates for
// an l-appearance instance, the exact probabilities of the same events, and
// reports pairing both with the closed-form bounds.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "noisylab/bounds.hpp"
#include "noisylab/freqmodel.hpp"
#include "noisylab/labels.hpp"
#include "noisylab/memorize.hpp"
#include "noisylab/noise.hpp"
#include "noisylab/treatments.hpp"

namespace noisylab {

enum class Treatment { Memorize, LossCorrection, LabelSmoothing, PeerLoss };

inline constexpr std::array<Treatment, 4> kAllTreatments = {
    Treatment::Memorize, Treatment::LossCorrection, Treatment::LabelSmoothing,
    Treatment::PeerLoss};

std::string_view to_string(Treatment t) noexcept;
/// Accepts memorize, loss_correction, label_smoothing, peer_loss.
Treatment treatment_from_string(std::string_view name);

/// Where peer_predict's global noisy positive rate comes from.
enum class GlobalRateMode {
  PopulationLimit,  // p+ (1 - e+) + p- e-
  FiniteSample,     // re-estimated per trial from n labels; reported only
};

struct InstanceScenario {
  std::uint64_t l = 1;
  Label y = Label::Positive;
  double e_plus = 0.0;
  double e_minus = 0.0;
  double p_plus = 0.5;
  double p_minus = 0.5;
  double smoothing_a = 0.1;
  std::uint64_t n = 10000;
  std::optional<PriorSpec> prior;  // only for tau reporting
  TieRule tie_rule = TieRule::LargerPrior;
  GlobalRateMode global_rate_mode = GlobalRateMode::PopulationLimit;

  /// Throws std::invalid_argument on p+ + p- != 1, a non-positive prior,
  /// e+ + e- >= 1, l < 1 or a outside [0, 1].
  void validate() const;
  BinaryNoiseRates rates() const noexcept { return {e_plus, e_minus}; }
  /// Flip rate of the true class.
  double flip_rate() const noexcept { return rates().flip_rate(y); }
  double population_global_rate() const;
  bool symmetric_rates() const noexcept { return e_plus == e_minus; }
  bool symmetric_priors() const noexcept { return p_plus == 0.5 && p_minus == 0.5; }
  /// Zero noise on the true class: every bound is vacuous or trivial.
  bool degenerate() const noexcept { return flip_rate() == 0.0; }
};

enum class Outcome { Success, Failure, Tie };

struct ClassifiedTrial {
  Outcome outcome = Outcome::Tie;
  double error = 0.0;  // P[h(x) != y] of the treatment's memorized label
};

/// Outcome of one treatment given the instance's empirical noisy-label
/// distribution.
///  - memorize: success iff a strict majority of labels is correct.
///  - loss_correction: by the direction of the correction; success iff
///    raw y_LC[y] > P~[y]. Away from the one-hot extremes this is exactly
///    err(capped y_LC) < err(P~).
///  - label_smoothing: compare_ls_lc; success iff smoothing beats capped y_LC.
///  - peer_loss: success iff peer_predict picks y; a zero margin is a tie.
ClassifiedTrial classify_outcome(Treatment treatment, const LabelDist& noisy,
                                 const InstanceScenario& scenario, double global_rate);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// 95% Wilson score interval for `successes` out of `trials`.
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials);

struct TrialTally {
  std::uint64_t trials = 0;
  std::uint64_t success = 0;
  std::uint64_t failure = 0;
  std::uint64_t tie = 0;
  std::uint64_t wrong_labels = 0;  // noisy labels different from y, over all trials
  double estimate = 0.0;           // success rate; mean err(P~) for memorize
  WilsonInterval wilson_ci;        // memorize: over all trials * l labels

  double rate(Outcome o) const noexcept;
};

/// The l noisy labels of trial `trial`. Trial randomness is a pure function
/// of (seed, trial), so any trial can be replayed on its own.
std::vector<Label> trial_labels(const InstanceScenario& scenario, std::uint64_t seed,
                                std::uint64_t trial);

/// Runs `trials` seeded trials, sharded over `workers` threads. The tally is
/// identical for every worker count.
TrialTally run_trials(const InstanceScenario& scenario, Treatment treatment,
                      std::uint64_t trials, std::uint64_t seed, std::size_t workers = 1);

struct ExactOutcome {
  double success = 0.0;
  double failure = 0.0;
  double tie = 0.0;
  double mean_error = 0.0;  // E[err(P~)]
};

/// Exact event probabilities by enumerating the number of positive labels
/// (binomial weights) and classifying each count. Uses the population-limit
/// global rate.
ExactOutcome exact_outcome(const InstanceScenario& scenario, Treatment treatment);

struct EventCheck {
  std::string event;  // success, failure, tie, failure_tie_inclusive, success_tie_inclusive, mean_error
  double mc = 0.0;
  WilsonInterval ci;
  double exact = 0.0;
  double exact_std_error = 0.0;  // sqrt(exact (1 - exact) / trials)
  std::optional<BoundValue> bound;
  std::string bound_form;
  std::optional<bool> ordering_holds;  // set only when the bound's regime holds
};

struct TreatmentReport {
  Treatment treatment = Treatment::Memorize;
  TrialTally tally;
  std::vector<EventCheck> events;

  const EventCheck* find(std::string_view event, std::string_view form = {}) const;
};

struct BoundReport {
  InstanceScenario scenario;
  bool degenerate = false;
  std::optional<double> tau;  // tau_exact(prior, n, l) when a prior is attached
  std::vector<TreatmentReport> treatments;

  const TreatmentReport& at(Treatment t) const;
};

/// Slack allowed when checking bound <= exact.
inline constexpr double kOrderingSlack = 1e-12;

BoundReport bound_report(const InstanceScenario& scenario, std::uint64_t trials,
                         std::uint64_t seed, std::size_t workers = 1);

/// One report per scenario, in input order. Scenario i runs on its own seed
/// stream derived from (seed, i).
std::vector<BoundReport> sweep(std::span<const InstanceScenario> scenarios,
                               std::uint64_t trials, std::uint64_t seed,
                               std::size_t workers = 1);

/// Cartesian grid over l and symmetric flip rates e, other fields from base.
std::vector<InstanceScenario> scenario_grid(std::span<const std::uint64_t> ls,
                                            std::span<const double> es,
                                            const InstanceScenario& base);

/// Shortest round-trip decimal form ('.' separator, locale independent).
std::string format_double(double v);

/// Header of the report CSV; column order is stable.
std::string_view report_csv_header();
void write_report_csv(std::ostream& out, std::span<const BoundReport> reports);

}  // namespace noisylab
