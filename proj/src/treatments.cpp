#include "noisylab/treatments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace noisylab {
namespace {

void require_binary(const LabelDist& dist, const char* what) {
  if (dist.classes() != 2) {
    throw std::invalid_argument(std::string(what) + ": binary distribution required");
  }
}

// Index of the first cumulative bucket exceeding u.
std::size_t pick(std::span<const double> cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) return cumulative.size() - 1;
  return static_cast<std::size_t>(it - cumulative.begin());
}

struct Marginals {
  std::vector<double> x;
  std::vector<double> y;
};

Marginals validate_joint(const ProbTable& joint) {
  if (joint.rows == 0 || joint.cols < 2 || joint.data.size() != joint.rows * joint.cols) {
    throw std::invalid_argument("peer loss: malformed joint table");
  }
  Marginals m{std::vector<double>(joint.rows, 0.0), std::vector<double>(joint.cols, 0.0)};
  double total = 0.0;
  for (std::size_t i = 0; i < joint.rows; ++i) {
    for (std::size_t j = 0; j < joint.cols; ++j) {
      const double p = joint(i, j);
      if (!(p >= 0.0)) throw std::invalid_argument("peer loss: negative joint entry");
      m.x[i] += p;
      m.y[j] += p;
      total += p;
    }
  }
  if (std::abs(total - 1.0) > 1e-10) {
    throw std::invalid_argument("peer loss: joint does not sum to 1");
  }
  return m;
}

ProbTable clamp_predictor(const ProbTable& predictor, const ProbTable& joint, double q_min) {
  if (predictor.rows != joint.rows || predictor.cols != joint.cols ||
      predictor.data.size() != predictor.rows * predictor.cols) {
    throw std::invalid_argument("peer loss: predictor shape does not match joint");
  }
  const double m = static_cast<double>(predictor.cols);
  if (!(q_min > 0.0 && q_min * m < 1.0)) {
    throw std::invalid_argument("peer loss: q_min must lie in (0, 1/m)");
  }
  const double q_max = 1.0 - q_min * (m - 1.0);
  ProbTable q = predictor;
  for (std::size_t i = 0; i < q.rows; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < q.cols; ++j) {
      if (!(predictor(i, j) >= 0.0)) {
        throw std::invalid_argument("peer loss: negative predictor entry");
      }
      row += predictor(i, j);
    }
    if (std::abs(row - 1.0) > 1e-10) {
      throw std::invalid_argument("peer loss: predictor row does not sum to 1");
    }
    double clamped_sum = 0.0;
    for (std::size_t j = 0; j < q.cols; ++j) {
      q(i, j) = std::clamp(predictor(i, j), q_min, q_max);
      clamped_sum += q(i, j);
    }
    if (q.cols > 2) {
      for (std::size_t j = 0; j < q.cols; ++j) q(i, j) /= clamped_sum;
    }
  }
  return q;
}

// sum a log(a / b) over entries with a > 0.
double kl_term(double a, double b) {
  if (a <= 0.0) return 0.0;
  if (b <= 0.0) return std::numeric_limits<double>::infinity();
  return a * std::log(a / b);
}

}  // namespace

CorrectedLabel corrected_label(const LabelDist& dist, const BinaryNoiseRates& rates) {
  require_binary(dist, "corrected_label");
  if (!dist.is_proper()) throw std::invalid_argument("corrected_label: improper distribution");
  rates.validate();
  const double pos = dist[kPositiveIndex];
  const double neg = dist[kNegativeIndex];
  // Mass moved from -1 to +1; written as an offset from P~ so the entries
  // stay summing to 1 and a zero shift leaves P~ untouched.
  const double shift =
      (rates.e_plus * pos - rates.e_minus * neg) / (1.0 - rates.e_plus - rates.e_minus);
  CorrectedLabel out{LabelDist::signed_dist({neg - shift, pos + shift}), dist, false};
  const double raw_pos = out.raw[kPositiveIndex];
  const double raw_neg = out.raw[kNegativeIndex];
  // Check both entries: on the simplex edge rounding can push either one out.
  if (raw_pos > 1.0 || raw_neg < 0.0) {
    out.capped = LabelDist::one_hot(2, kPositiveIndex);
    out.was_capped = true;
  } else if (raw_pos < 0.0 || raw_neg > 1.0) {
    out.capped = LabelDist::one_hot(2, kNegativeIndex);
    out.was_capped = true;
  } else {
    out.capped = LabelDist::proper(out.raw.probs());
  }
  return out;
}

LabelDist corrected_label(const LabelDist& dist, const TransitionMatrix& t) {
  if (dist.classes() != t.classes()) {
    throw std::invalid_argument("corrected_label: class count mismatch");
  }
  const SquareMatrix inv = invert_transition(t);
  return LabelDist::signed_dist(inv.apply_transposed(dist.probs()));
}

LossVector::LossVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("LossVector: no classes");
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("LossVector: non-finite entry");
  }
}

double LossVector::dot(const LabelDist& dist) const {
  if (dist.classes() != classes()) throw std::invalid_argument("LossVector: class mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < classes(); ++k) s += dist[k] * values_[k];
  return s;
}

LossVector lc_loss_vector(const LossVector& loss, const TransitionMatrix& t) {
  if (loss.classes() != t.classes()) {
    throw std::invalid_argument("lc_loss_vector: class count mismatch");
  }
  return LossVector(invert_transition(t).apply(loss.values()));
}

LossVector lc_loss_vector(const LossVector& loss, const BinaryNoiseRates& rates) {
  return lc_loss_vector(loss, binary_transition(rates));
}

double lc_empirical_loss(std::span<const Label> labels, const BinaryNoiseRates& rates,
                         const LossVector& loss) {
  if (labels.empty()) throw std::invalid_argument("lc_empirical_loss: empty label list");
  const LossVector corrected = lc_loss_vector(loss, rates);
  double sum = 0.0;
  for (Label y : labels) sum += corrected.at(y);
  return sum / static_cast<double>(labels.size());
}

double lc_empirical_loss(std::span<const std::size_t> labels, const TransitionMatrix& t,
                         const LossVector& loss) {
  if (labels.empty()) throw std::invalid_argument("lc_empirical_loss: empty label list");
  const LossVector corrected = lc_loss_vector(loss, t);
  double sum = 0.0;
  for (std::size_t k : labels) {
    if (k >= corrected.classes()) throw std::invalid_argument("lc_empirical_loss: bad label");
    sum += corrected[k];
  }
  return sum / static_cast<double>(labels.size());
}

LabelDist smoothed_label(const LabelDist& dist, double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("smoothed_label: a must lie in [0, 1]");
  if (!dist.is_proper()) throw std::invalid_argument("smoothed_label: improper distribution");
  const double share = a / static_cast<double>(dist.classes());
  std::vector<double> p(dist.classes());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = (1.0 - a) * dist[k] + share;
  return LabelDist::proper(std::move(p));
}

Comparison compare_ls_lc(const LabelDist& dist, Label y, const BinaryNoiseRates& rates,
                         double a) {
  require_binary(dist, "compare_ls_lc");
  const double err_lc = memorization_error(corrected_label(dist, rates).capped, y);
  const double err_ls = memorization_error(smoothed_label(dist, a), y);
  if (std::abs(err_lc - err_ls) <= kTieTolerance) return Comparison::Tie;
  return err_lc < err_ls ? Comparison::LcBetter : Comparison::LsBetter;
}

double global_noisy_positive_rate(double p_plus, const BinaryNoiseRates& rates) {
  if (!(p_plus >= 0.0 && p_plus <= 1.0)) {
    throw std::invalid_argument("global_noisy_positive_rate: p_plus must lie in [0, 1]");
  }
  rates.validate();
  return p_plus * (1.0 - rates.e_plus) + (1.0 - p_plus) * rates.e_minus;
}

PeerDecision peer_predict(const LabelDist& dist_local, double global_rate, TieRule tie_rule,
                          double p_plus) {
  require_binary(dist_local, "peer_predict");
  if (!(global_rate >= 0.0 && global_rate <= 1.0)) {
    throw std::invalid_argument("peer_predict: global rate must lie in [0, 1]");
  }
  PeerDecision d;
  d.margin = dist_local[kPositiveIndex] - global_rate;
  d.tie = std::abs(d.margin) <= kTieTolerance;
  if (!d.tie) {
    d.predicted = d.margin > 0.0 ? Label::Positive : Label::Negative;
    return d;
  }
  switch (tie_rule) {
    case TieRule::LargerPrior:
      d.predicted = p_plus < 0.5 ? Label::Negative : Label::Positive;
      break;
    case TieRule::Positive:
      d.predicted = Label::Positive;
      break;
    case TieRule::Negative:
      d.predicted = Label::Negative;
      break;
  }
  return d;
}

PeerLossDecomposition peer_expected_loss(const ProbTable& joint, const ProbTable& predictor,
                                         double q_min) {
  const Marginals marg = validate_joint(joint);
  const ProbTable q = clamp_predictor(predictor, joint, q_min);

  PeerLossDecomposition out;
  for (std::size_t i = 0; i < joint.rows; ++i) {
    for (std::size_t j = 0; j < joint.cols; ++j) {
      const double p = joint(i, j);
      const double prod = marg.x[i] * marg.y[j];
      const double log_q = std::log(q(i, j));
      out.ce_term -= p * log_q;
      out.peer_term -= prod * log_q;
      // A factorized cell reproduces p only up to the rounding of the
      // marginal sums; drop that residue so independent joints give exactly 0.
      double gap = prod - p;
      if (std::abs(gap) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(prod, p)) {
        gap = 0.0;
      }
      out.value += gap * log_q;

      const double model = q(i, j) * marg.x[i];
      out.kl_model_vs_joint += kl_term(model, p);
      out.kl_model_vs_product += kl_term(model, prod);
      out.kl_joint_vs_model += kl_term(p, model);
      out.kl_product_vs_model += kl_term(prod, model);
      out.mutual_information += kl_term(p, prod);
    }
  }
  return out;
}

SampledEstimate peer_loss_sampled(const ProbTable& joint, const ProbTable& predictor,
                                  double q_min, std::size_t samples, CounterRng& rng) {
  if (samples < 2) throw std::invalid_argument("peer_loss_sampled: need at least 2 samples");
  const Marginals marg = validate_joint(joint);
  const ProbTable q = clamp_predictor(predictor, joint, q_min);

  std::vector<double> cum_joint(joint.data.size());
  std::vector<double> cum_x(marg.x.size());
  std::vector<double> cum_y(marg.y.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < joint.data.size(); ++k) cum_joint[k] = acc += joint.data[k];
  acc = 0.0;
  for (std::size_t k = 0; k < marg.x.size(); ++k) cum_x[k] = acc += marg.x[k];
  acc = 0.0;
  for (std::size_t k = 0; k < marg.y.size(); ++k) cum_y[k] = acc += marg.y[k];

  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t cell = pick(cum_joint, rng.uniform() * cum_joint.back());
    const std::size_t x = cell / joint.cols;
    const std::size_t y = cell % joint.cols;
    const std::size_t peer_x = pick(cum_x, rng.uniform() * cum_x.back());
    const std::size_t peer_y = pick(cum_y, rng.uniform() * cum_y.back());
    const double v = -std::log(q(x, y)) + std::log(q(peer_x, peer_y));
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

double peer_instance_objective(double p_local_positive, double global_rate, double q,
                               double q_min) {
  if (!(q_min > 0.0 && q_min < 0.5)) {
    throw std::invalid_argument("peer objective: q_min must lie in (0, 1/2)");
  }
  const double qc = std::clamp(q, q_min, 1.0 - q_min);
  const double margin = p_local_positive - global_rate;
  // CE(q, +1) = -log q and CE(q, -1) = -log(1 - q); the local and peer terms
  // cancel except for the margin times the log-odds.
  return -margin * (std::log(qc) - std::log1p(-qc));
}

VertexCheck peer_vertex_check(const LabelDist& dist_local, double global_rate,
                              std::size_t grid_points, double q_min) {
  require_binary(dist_local, "peer_vertex_check");
  if (grid_points < 3) throw std::invalid_argument("peer_vertex_check: need >= 3 grid points");
  const double p_local = dist_local[kPositiveIndex];
  const double step = (1.0 - 2.0 * q_min) / static_cast<double>(grid_points - 1);

  VertexCheck out;
  out.margin = p_local - global_rate;
  double best = std::numeric_limits<double>::infinity();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double q =
        i + 1 == grid_points ? 1.0 - q_min : q_min + static_cast<double>(i) * step;
    const double v = peer_instance_objective(p_local, global_rate, q, q_min);
    if (v < best) {
      best = v;
      out.argmin_q = q;
      out.argmin_index = i;
    }
    worst = std::max(worst, v);
  }
  out.objective_range = worst - best;
  out.at_boundary = out.argmin_index == 0 || out.argmin_index + 1 == grid_points;
  return out;
}

double paradox_gap(std::span<const Label> labels, const BinaryNoiseRates& rates,
                   const LossVector& loss, Label y) {
  if (loss.classes() != 2) throw std::invalid_argument("paradox_gap: binary loss required");
  return lc_empirical_loss(labels, rates, loss) - loss.at(y);
}

}  // namespace noisylab
