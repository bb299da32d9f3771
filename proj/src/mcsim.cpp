#include "noisylab/mcsim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <exception>
#include <stdexcept>
#include <string>
#include <system_error>
#include <thread>

namespace noisylab {

namespace {

constexpr double kWilsonZ = 1.959963984540054;

std::size_t resolve_workers(std::size_t workers, std::uint64_t trials) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<std::size_t>(std::min<std::uint64_t>(workers, trials));
}

Outcome outcome_from_comparison(double treated, double baseline) {
  if (std::abs(treated - baseline) <= kTieTolerance) return Outcome::Tie;
  return treated > baseline ? Outcome::Success : Outcome::Failure;
}

double finite_sample_global_rate(const InstanceScenario& s, CounterRng& rng) {
  const double p = s.population_global_rate();
  std::uint64_t positives = 0;
  for (std::uint64_t i = 0; i < s.n; ++i) positives += rng.bernoulli(p) ? 1 : 0;
  return static_cast<double>(positives) / static_cast<double>(s.n);
}

std::uint64_t count_wrong(std::span<const Label> labels, Label y) {
  return static_cast<std::uint64_t>(
      std::count_if(labels.begin(), labels.end(), [y](Label v) { return v != y; }));
}

struct Partial {
  std::uint64_t success = 0;
  std::uint64_t failure = 0;
  std::uint64_t tie = 0;
  std::uint64_t wrong = 0;
};

Partial run_range(const InstanceScenario& s, Treatment treatment, std::uint64_t seed,
                  std::uint64_t begin, std::uint64_t end) {
  Partial part;
  const double population_rate = s.population_global_rate();
  for (std::uint64_t trial = begin; trial < end; ++trial) {
    CounterRng rng = CounterRng::substream(seed, trial);
    const auto labels = sample_noisy_labels(s.y, s.l, s.rates(), rng);
    const std::uint64_t wrong = count_wrong(labels, s.y);
    const std::uint64_t positives =
        s.y == Label::Positive ? s.l - wrong : wrong;
    const LabelDist dist = empirical_from_count(positives, s.l);
    const double global = s.global_rate_mode == GlobalRateMode::FiniteSample
                              ? finite_sample_global_rate(s, rng)
                              : population_rate;
    switch (classify_outcome(treatment, dist, s, global).outcome) {
      case Outcome::Success: ++part.success; break;
      case Outcome::Failure: ++part.failure; break;
      case Outcome::Tie: ++part.tie; break;
    }
    part.wrong += wrong;
  }
  return part;
}

EventCheck make_event(std::string name, std::uint64_t count, std::uint64_t trials,
                      double exact) {
  EventCheck ev;
  ev.event = std::move(name);
  ev.mc = static_cast<double>(count) / static_cast<double>(trials);
  ev.ci = wilson_interval(count, trials);
  ev.exact = exact;
  ev.exact_std_error =
      std::sqrt(std::max(0.0, exact * (1.0 - exact)) / static_cast<double>(trials));
  return ev;
}

void attach_bound(EventCheck& ev, BoundValue bound, std::string form) {
  if (bound.regime_ok) ev.ordering_holds = ev.exact + kOrderingSlack >= bound.value;
  ev.bound = bound;
  ev.bound_form = std::move(form);
}

BoundParams params_of(const InstanceScenario& s) {
  return {s.l, s.e_plus, s.e_minus, s.p_plus, std::nullopt};
}

TreatmentReport treatment_report(const InstanceScenario& s, Treatment t,
                                 std::uint64_t trials, std::uint64_t seed,
                                 std::size_t workers) {
  TreatmentReport rep;
  rep.treatment = t;
  rep.tally = run_trials(s, t, trials, seed, workers);
  const ExactOutcome ex = exact_outcome(s, t);
  const TrialTally& tt = rep.tally;
  const double e = s.flip_rate();
  const bool even_l = s.l % 2 == 0;
  const bool kl_regime = even_l && s.symmetric_rates() && e > 0.0;

  auto tail_bound = [&](BoundKind kind, bool regime) {
    BoundValue b;
    b.kind = kind;
    b.value = lc_failure_lower(s.l, e);
    b.params = params_of(s);
    b.regime_ok = regime;
    return b;
  };

  switch (t) {
    case Treatment::Memorize: {
      EventCheck ev;
      ev.event = "mean_error";
      const std::uint64_t labels = trials * s.l;
      ev.mc = tt.estimate;
      ev.ci = tt.wilson_ci;
      ev.exact = ex.mean_error;
      ev.exact_std_error = std::sqrt(std::max(0.0, ex.mean_error * (1.0 - ex.mean_error)) /
                                     static_cast<double>(labels));
      rep.events.push_back(ev);
      rep.events.push_back(make_event("success", tt.success, trials, ex.success));
      rep.events.push_back(make_event("failure", tt.failure, trials, ex.failure));
      rep.events.push_back(make_event("tie", tt.tie, trials, ex.tie));
      break;
    }
    case Treatment::LossCorrection: {
      EventCheck succ = make_event("success", tt.success, trials, ex.success);
      if (e <= 0.5) {
        BoundValue b;
        b.kind = BoundKind::HoeffdingSuccess;
        b.value = lc_success_lower(s.l, e);
        b.params = params_of(s);
        b.regime_ok = s.symmetric_rates() && e > 0.0 && e < 0.5;
        attach_bound(succ, b, "hoeffding");
      }
      rep.events.push_back(succ);
      rep.events.push_back(make_event("failure", tt.failure, trials, ex.failure));
      EventCheck incl = make_event("failure_tie_inclusive", tt.failure + tt.tie, trials,
                                   ex.failure + ex.tie);
      if (e > 0.0 && e < 1.0) {
        attach_bound(incl, tail_bound(BoundKind::BinomialFailureLower, kl_regime), "kl_tail");
      }
      rep.events.push_back(incl);
      rep.events.push_back(make_event("tie", tt.tie, trials, ex.tie));
      break;
    }
    case Treatment::LabelSmoothing: {
      rep.events.push_back(make_event("success", tt.success, trials, ex.success));
      EventCheck incl = make_event("success_tie_inclusive", tt.success + tt.tie, trials,
                                   ex.success + ex.tie);
      if (e > 0.0 && e < 1.0) {
        attach_bound(incl, tail_bound(BoundKind::BinomialFailureLower, kl_regime), "kl_tail");
      }
      rep.events.push_back(incl);
      rep.events.push_back(make_event("failure", tt.failure, trials, ex.failure));
      rep.events.push_back(make_event("tie", tt.tie, trials, ex.tie));
      break;
    }
    case Treatment::PeerLoss: {
      const double p_opposite = s.y == Label::Positive ? s.p_minus : s.p_plus;
      const bool population = s.global_rate_mode == GlobalRateMode::PopulationLimit;
      for (PeerSuccessForm form :
           {PeerSuccessForm::HoeffdingCorrected, PeerSuccessForm::PaperLiteral}) {
        EventCheck succ = make_event("success", tt.success, trials, ex.success);
        BoundValue b;
        b.kind = BoundKind::PeerSuccess;
        b.value = peer_success_lower(s.l, p_opposite, s.e_plus, s.e_minus, form);
        b.params = params_of(s);
        b.regime_ok = form == PeerSuccessForm::HoeffdingCorrected && population;
        attach_bound(succ, b, std::string(to_string(form)));
        rep.events.push_back(succ);
      }
      rep.events.push_back(make_event("failure", tt.failure, trials, ex.failure));
      EventCheck incl = make_event("failure_tie_inclusive", tt.failure + tt.tie, trials,
                                   ex.failure + ex.tie);
      if (e > 0.0 && e < 1.0) {
        BoundValue b = tail_bound(BoundKind::PeerFailureLower,
                                  kl_regime && s.symmetric_priors() && population);
        b.value = peer_failure_lower(s.l, e);
        attach_bound(incl, b, "kl_tail");
      }
      rep.events.push_back(incl);
      rep.events.push_back(make_event("tie", tt.tie, trials, ex.tie));
      break;
    }
  }
  return rep;
}

std::string label_string(Label y) { return y == Label::Positive ? "1" : "-1"; }

}  // namespace

std::string_view to_string(Treatment t) noexcept {
  switch (t) {
    case Treatment::Memorize: return "memorize";
    case Treatment::LossCorrection: return "loss_correction";
    case Treatment::LabelSmoothing: return "label_smoothing";
    case Treatment::PeerLoss: return "peer_loss";
  }
  return "unknown";
}

Treatment treatment_from_string(std::string_view name) {
  for (Treatment t : kAllTreatments) {
    if (to_string(t) == name) return t;
  }
  throw std::invalid_argument("unknown treatment: " + std::string(name));
}

void InstanceScenario::validate() const {
  if (l < 1) throw std::invalid_argument("l must be >= 1");
  if (!(p_plus > 0.0 && p_minus > 0.0)) {
    throw std::invalid_argument("p_plus and p_minus must be > 0");
  }
  if (std::abs(p_plus + p_minus - 1.0) > 1e-12) {
    throw std::invalid_argument("p_plus + p_minus must equal 1");
  }
  rates().validate();
  if (!(smoothing_a >= 0.0 && smoothing_a <= 1.0)) {
    throw std::invalid_argument("smoothing_a must lie in [0, 1]");
  }
  if (global_rate_mode == GlobalRateMode::FiniteSample && n < 1) {
    throw std::invalid_argument("n must be >= 1 for the finite-sample global rate");
  }
}

double InstanceScenario::population_global_rate() const {
  return global_noisy_positive_rate(p_plus, rates());
}

ClassifiedTrial classify_outcome(Treatment treatment, const LabelDist& noisy,
                                 const InstanceScenario& s, double global_rate) {
  ClassifiedTrial out;
  const double err_noisy = memorization_error(noisy, s.y);
  switch (treatment) {
    case Treatment::Memorize: {
      out.error = err_noisy;
      out.outcome = outcome_from_comparison(noisy.at(s.y), 0.5);
      break;
    }
    case Treatment::LossCorrection: {
      const CorrectedLabel c = corrected_label(noisy, s.rates());
      out.error = memorization_error(c.capped, s.y);
      out.outcome = outcome_from_comparison(c.raw.at(s.y), noisy.at(s.y));
      break;
    }
    case Treatment::LabelSmoothing: {
      out.error = memorization_error(smoothed_label(noisy, s.smoothing_a), s.y);
      switch (compare_ls_lc(noisy, s.y, s.rates(), s.smoothing_a)) {
        case Comparison::LsBetter: out.outcome = Outcome::Success; break;
        case Comparison::LcBetter: out.outcome = Outcome::Failure; break;
        case Comparison::Tie: out.outcome = Outcome::Tie; break;
      }
      break;
    }
    case Treatment::PeerLoss: {
      const PeerDecision d = peer_predict(noisy, global_rate, s.tie_rule, s.p_plus);
      out.error = d.predicted == s.y ? 0.0 : 1.0;
      if (d.tie) {
        out.outcome = Outcome::Tie;
      } else {
        out.outcome = d.predicted == s.y ? Outcome::Success : Outcome::Failure;
      }
      break;
    }
  }
  return out;
}

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = kWilsonZ * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {successes == 0 ? 0.0 : std::max(0.0, center - half),
          successes == trials ? 1.0 : std::min(1.0, center + half)};
}

double TrialTally::rate(Outcome o) const noexcept {
  if (trials == 0) return 0.0;
  const std::uint64_t c = o == Outcome::Success ? success
                          : o == Outcome::Failure ? failure
                                                  : tie;
  return static_cast<double>(c) / static_cast<double>(trials);
}

std::vector<Label> trial_labels(const InstanceScenario& scenario, std::uint64_t seed,
                                std::uint64_t trial) {
  CounterRng rng = CounterRng::substream(seed, trial);
  return sample_noisy_labels(scenario.y, scenario.l, scenario.rates(), rng);
}

TrialTally run_trials(const InstanceScenario& scenario, Treatment treatment,
                      std::uint64_t trials, std::uint64_t seed, std::size_t workers) {
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  scenario.validate();

  const std::size_t w = resolve_workers(workers, trials);
  std::vector<Partial> parts(w);
  if (w == 1) {
    parts[0] = run_range(scenario, treatment, seed, 0, trials);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(w);
    pool.reserve(w);
    for (std::size_t k = 0; k < w; ++k) {
      const std::uint64_t begin = trials * k / w;
      const std::uint64_t end = trials * (k + 1) / w;
      pool.emplace_back([&, k, begin, end] {
        try {
          parts[k] = run_range(scenario, treatment, seed, begin, end);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  TrialTally tally;
  tally.trials = trials;
  for (const Partial& p : parts) {
    tally.success += p.success;
    tally.failure += p.failure;
    tally.tie += p.tie;
    tally.wrong_labels += p.wrong;
  }
  if (treatment == Treatment::Memorize) {
    const std::uint64_t labels = trials * scenario.l;
    tally.estimate = static_cast<double>(tally.wrong_labels) / static_cast<double>(labels);
    tally.wilson_ci = wilson_interval(tally.wrong_labels, labels);
  } else {
    tally.estimate = tally.rate(Outcome::Success);
    tally.wilson_ci = wilson_interval(tally.success, trials);
  }
  return tally;
}

ExactOutcome exact_outcome(const InstanceScenario& scenario, Treatment treatment) {
  scenario.validate();
  const double p_pos = scenario.rates().positive_rate(scenario.y);
  const double global = scenario.population_global_rate();
  ExactOutcome ex;
  for (std::uint64_t k = 0; k <= scenario.l; ++k) {
    const double w = binom_pmf(scenario.l, p_pos, k);
    if (w == 0.0) continue;
    const LabelDist dist = empirical_from_count(k, scenario.l);
    const ClassifiedTrial c = classify_outcome(treatment, dist, scenario, global);
    switch (c.outcome) {
      case Outcome::Success: ex.success += w; break;
      case Outcome::Failure: ex.failure += w; break;
      case Outcome::Tie: ex.tie += w; break;
    }
    ex.mean_error += w * memorization_error(dist, scenario.y);
  }
  return ex;
}

const EventCheck* TreatmentReport::find(std::string_view event, std::string_view form) const {
  for (const EventCheck& ev : events) {
    if (ev.event == event && (form.empty() || ev.bound_form == form)) return &ev;
  }
  return nullptr;
}

const TreatmentReport& BoundReport::at(Treatment t) const {
  for (const TreatmentReport& r : treatments) {
    if (r.treatment == t) return r;
  }
  throw std::out_of_range("treatment not in report");
}

BoundReport bound_report(const InstanceScenario& scenario, std::uint64_t trials,
                         std::uint64_t seed, std::size_t workers) {
  scenario.validate();
  BoundReport rep;
  rep.scenario = scenario;
  rep.degenerate = scenario.degenerate();
  if (scenario.prior) rep.tau = tau_exact(*scenario.prior, scenario.n, scenario.l);
  for (std::size_t i = 0; i < kAllTreatments.size(); ++i) {
    const std::uint64_t tseed = mix64(seed ^ mix64(0x7EA7000000000000ULL + i));
    rep.treatments.push_back(
        treatment_report(scenario, kAllTreatments[i], trials, tseed, workers));
  }
  return rep;
}

std::vector<BoundReport> sweep(std::span<const InstanceScenario> scenarios,
                               std::uint64_t trials, std::uint64_t seed,
                               std::size_t workers) {
  if (scenarios.empty()) throw std::invalid_argument("sweep needs at least one scenario");
  std::vector<BoundReport> out;
  out.reserve(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const std::uint64_t sseed = mix64(seed + 0x9E3779B97F4A7C15ULL * (i + 1));
    out.push_back(bound_report(scenarios[i], trials, sseed, workers));
  }
  return out;
}

std::vector<InstanceScenario> scenario_grid(std::span<const std::uint64_t> ls,
                                            std::span<const double> es,
                                            const InstanceScenario& base) {
  std::vector<InstanceScenario> out;
  out.reserve(ls.size() * es.size());
  for (std::uint64_t l : ls) {
    for (double e : es) {
      InstanceScenario s = base;
      s.l = l;
      s.e_plus = e;
      s.e_minus = e;
      out.push_back(s);
    }
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, res.ptr);
}

std::string_view report_csv_header() {
  return "l,y,e_plus,e_minus,p_plus,p_minus,smoothing_a,n,tau,treatment,event,trials,"
         "mc_estimate,ci_lo,ci_hi,exact,bound,bound_form,regime_ok,ordering_holds";
}

void write_report_csv(std::ostream& out, std::span<const BoundReport> reports) {
  out << report_csv_header() << '\n';
  for (const BoundReport& r : reports) {
    const InstanceScenario& s = r.scenario;
    std::string prefix = std::to_string(s.l) + ',' + label_string(s.y) + ',' +
                         format_double(s.e_plus) + ',' + format_double(s.e_minus) + ',' +
                         format_double(s.p_plus) + ',' + format_double(s.p_minus) + ',' +
                         format_double(s.smoothing_a) + ',' + std::to_string(s.n) + ',' +
                         (r.tau ? format_double(*r.tau) : std::string()) + ',';
    for (const TreatmentReport& t : r.treatments) {
      for (const EventCheck& ev : t.events) {
        out << prefix << to_string(t.treatment) << ',' << ev.event << ',' << t.tally.trials
            << ',' << format_double(ev.mc) << ',' << format_double(ev.ci.lo) << ','
            << format_double(ev.ci.hi) << ',' << format_double(ev.exact) << ',';
        if (ev.bound) {
          out << format_double(ev.bound->value) << ',' << ev.bound_form << ','
              << (ev.bound->regime_ok ? "true" : "false") << ',';
        } else {
          out << ",,,";
        }
        if (ev.ordering_holds) out << (*ev.ordering_holds ? "true" : "false");
        out << '\n';
      }
    }
  }
}

}  // namespace noisylab
