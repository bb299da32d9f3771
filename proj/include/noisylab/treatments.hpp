#pragma once

// The three noisy-label treatments at the level of a single instance: loss
// correction (corrected labels and corrected loss vectors), label smoothing
// and peer loss, plus the diagnostics used to reason about them.

#include <cstddef>
#include <span>
#include <vector>

#include "noisylab/labels.hpp"
#include "noisylab/memorize.hpp"
#include "noisylab/noise.hpp"
#include "noisylab/random.hpp"

namespace noisylab {

/// Tolerance below which two errors, or a margin and zero, count as a tie.
inline constexpr double kTieTolerance = 1e-12;

struct CorrectedLabel {
  LabelDist raw;     // (T^-1)^T P~, may leave [0, 1]
  LabelDist capped;  // raw if proper, otherwise the one-hot on the side raw overshoots to
  bool was_capped = false;
};

/// Binary corrected label. raw[+1] = ((1-e-) P~[+1] - e- P~[-1]) / (1-e+-e-)
/// and raw[-1] = ((1-e+) P~[-1] - e+ P~[+1]) / (1-e+-e-); entries sum to 1.
CorrectedLabel corrected_label(const LabelDist& dist, const BinaryNoiseRates& rates);

/// Uncapped (T^-1)^T P~ for any class count.
LabelDist corrected_label(const LabelDist& dist, const TransitionMatrix& t);

/// Per-class loss values l(h(x), y') in class order.
class LossVector {
 public:
  LossVector() = default;
  explicit LossVector(std::vector<double> values);
  std::size_t classes() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double at(Label y) const { return values_.at(class_index(y)); }
  const std::vector<double>& values() const noexcept { return values_; }
  double dot(const LabelDist& dist) const;

 private:
  std::vector<double> values_;
};

/// Corrected loss T^-1 l. Throws std::domain_error for singular T.
LossVector lc_loss_vector(const LossVector& loss, const TransitionMatrix& t);
LossVector lc_loss_vector(const LossVector& loss, const BinaryNoiseRates& rates);

/// (1/l) sum_i onehot(y~_i)^T l_LC over the instance's noisy labels.
double lc_empirical_loss(std::span<const Label> labels, const BinaryNoiseRates& rates,
                         const LossVector& loss);
double lc_empirical_loss(std::span<const std::size_t> labels, const TransitionMatrix& t,
                         const LossVector& loss);

/// (1 - a) dist + a/m. Throws unless a in [0, 1].
LabelDist smoothed_label(const LabelDist& dist, double a);

enum class Comparison { LcBetter, LsBetter, Tie };

/// Which of the memorized labels, smoothed or capped-corrected, has the lower
/// error on true label y. Binary only.
Comparison compare_ls_lc(const LabelDist& dist, Label y, const BinaryNoiseRates& rates,
                         double a);

/// P[noisy = +1] over the whole population: p+ (1 - e+) + p- e-.
double global_noisy_positive_rate(double p_plus, const BinaryNoiseRates& rates);

/// How peer_predict resolves a zero margin.
enum class TieRule {
  LargerPrior,  // class with the larger clean prior; +1 when the priors are equal
  Positive,
  Negative,
};

struct PeerDecision {
  Label predicted = Label::Positive;
  double margin = 0.0;  // P~_local[+1] - global noisy positive rate
  bool tie = false;     // |margin| <= kTieTolerance
};

/// Confident peer-loss prediction: +1 iff the local noisy positive rate
/// exceeds the global one.
PeerDecision peer_predict(const LabelDist& dist_local, double global_rate,
                          TieRule tie_rule = TieRule::LargerPrior, double p_plus = 0.5);

/// Row-major |X| x m table of probabilities.
struct ProbTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
};

inline constexpr double kDefaultQMin = 1e-3;

struct PeerLossDecomposition {
  double value = 0.0;                 // E[CE(h(x), y~)] - E_x E_y~[CE(h(x), y~)]
  double ce_term = 0.0;
  double peer_term = 0.0;             // E_x E_y~[CE(h(x), y~)]
  double kl_model_vs_joint = 0.0;     // KL(Q(x,y~) || P(x,y~))
  double kl_model_vs_product = 0.0;   // KL(Q(x,y~) || P(x) P(y~))
  double kl_joint_vs_model = 0.0;     // KL(P(x,y~) || Q(x,y~))
  double kl_product_vs_model = 0.0;   // KL(P(x) P(y~) || Q(x,y~))
  double mutual_information = 0.0;    // KL(P(x,y~) || P(x) P(y~))
};

/// Expected peer loss with cross-entropy for a predictor Q(y~|x) on a finite
/// joint P(x, y~). Predictor entries are clamped to [q_min, 1 - q_min (m-1)]
/// (rows renormalized when m > 2). Q(x, y~) = Q(y~|x) P(x).
///
/// The KL terms satisfy
///   value = KL(P || Q) - KL(P_x P_y~ || Q) - I(x; y~)
/// exactly. The reversed-argument difference KL(Q || P) - KL(Q || P_x P_y~)
/// coincides with `value` only when x and y~ are independent.
PeerLossDecomposition peer_expected_loss(const ProbTable& joint, const ProbTable& predictor,
                                         double q_min = kDefaultQMin);

struct SampledEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Literal peer loss l(h(x), y~) - l(h(x_p1), y~_p2) averaged over sampled
/// (x, y~) ~ P and independent peers x_p1 ~ P_x, y~_p2 ~ P_y~.
SampledEstimate peer_loss_sampled(const ProbTable& joint, const ProbTable& predictor,
                                  double q_min, std::size_t samples, CounterRng& rng);

/// Per-instance expected peer loss as a function of q = P[h(x) = +1]:
/// -(P~[+1] - global_rate) * log(q / (1 - q)), with q clamped to [q_min, 1-q_min].
double peer_instance_objective(double p_local_positive, double global_rate, double q,
                               double q_min = kDefaultQMin);

struct VertexCheck {
  double argmin_q = 0.0;
  std::size_t argmin_index = 0;
  bool at_boundary = false;
  double margin = 0.0;
  double objective_range = 0.0;  // max - min over the grid
};

/// Grid search of peer_instance_objective over q in {q_min, ..., 1 - q_min}.
VertexCheck peer_vertex_check(const LabelDist& dist_local, double global_rate,
                              std::size_t grid_points, double q_min = kDefaultQMin);

/// lc_empirical_loss - l(y): how far the memorization-coupled corrected loss
/// is from the clean loss the independence argument promises.
double paradox_gap(std::span<const Label> labels, const BinaryNoiseRates& rates,
                   const LossVector& loss, Label y);

}  // namespace noisylab
