#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "generators.hpp"
#include "noisylab/treatments.hpp"
#include "oracles.hpp"

using namespace noisylab;

namespace {

const std::vector<Label> kTwoPosOneNeg = {Label::Positive, Label::Positive, Label::Negative};

ProbTable table(std::size_t rows, std::size_t cols, std::vector<double> data) {
  return ProbTable{rows, cols, std::move(data)};
}

ProbTable random_joint(gen::Gen& g, std::size_t rows) {
  return table(rows, 2, g.simplex(rows * 2));
}

ProbTable random_predictor(gen::Gen& g, std::size_t rows) {
  ProbTable q{rows, 2, {}};
  for (std::size_t i = 0; i < rows; ++i) {
    const double p = g.real(0.0, 1.0);
    q.data.push_back(1.0 - p);
    q.data.push_back(p);
  }
  return q;
}

}  // namespace

TEST_SUITE("treatments") {

TEST_CASE("corrected label examples") {
  const CorrectedLabel a = corrected_label(LabelDist::proper({0.4, 0.6}), BinaryNoiseRates{0.2, 0.2});
  CHECK(a.raw[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(a.raw[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK_FALSE(a.was_capped);
  CHECK(a.capped.probs() == a.raw.probs());

  const CorrectedLabel b = corrected_label(LabelDist::proper({0.0, 1.0}), BinaryNoiseRates{0.2, 0.2});
  CHECK(b.raw[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  CHECK(b.raw[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(b.was_capped);
  CHECK(b.capped.probs() == std::vector<double>{0.0, 1.0});

  const CorrectedLabel c = corrected_label(LabelDist::proper({1.0, 0.0}), BinaryNoiseRates{0.1, 0.3});
  CHECK(c.was_capped);
  CHECK(c.capped.probs() == std::vector<double>{1.0, 0.0});

  for (double e : {0.0, 0.1, 0.25, 0.45}) {
    const CorrectedLabel h = corrected_label(LabelDist::proper({0.5, 0.5}), BinaryNoiseRates{e, e});
    CHECK(h.raw.probs() == std::vector<double>{0.5, 0.5});
  }
  CHECK_THROWS_AS(corrected_label(LabelDist::proper({0.5, 0.5}), BinaryNoiseRates{0.6, 0.5}),
                  std::invalid_argument);
}

TEST_CASE("corrected label matches the transposed inverse") {
  for (std::uint64_t i = 0; i < 500; ++i) {
    gen::Gen g(61, i);
    const BinaryNoiseRates r = g.rates();
    const LabelDist d = g.binary_dist();
    const double det = 1.0 - r.e_plus - r.e_minus;
    // (T^-1)^T P with T^-1 = 1/det [[1-e+, -e-], [-e+, 1-e-]].
    const double neg = ((1.0 - r.e_plus) * d[0] - r.e_plus * d[1]) / det;
    const double pos = (-r.e_minus * d[0] + (1.0 - r.e_minus) * d[1]) / det;
    const CorrectedLabel c = corrected_label(d, r);
    CHECK(c.raw[0] == doctest::Approx(neg).epsilon(1e-9));
    CHECK(c.raw[1] == doctest::Approx(pos).epsilon(1e-9));
    const LabelDist general = corrected_label(d, binary_transition(r));
    CHECK(std::abs(general[0] - c.raw[0]) <= 1e-10);
    CHECK(std::abs(general[1] - c.raw[1]) <= 1e-10);
  }
}

TEST_CASE("raw corrected labels sum to one") {
  for (std::uint64_t i = 0; i < 10000; ++i) {
    gen::Gen g(62, i);
    const CorrectedLabel c = corrected_label(g.binary_dist(), g.rates(0.999));
    CHECK(std::abs(c.raw[0] + c.raw[1] - 1.0) <= 1e-12);
    CHECK(c.capped.is_proper());
  }
}

TEST_CASE("capping follows the violated side") {
  for (std::uint64_t i = 0; i < 2000; ++i) {
    gen::Gen g(63, i);
    const CorrectedLabel c = corrected_label(g.binary_dist(), g.rates());
    if (c.raw[1] > 1.0) CHECK(c.capped.probs() == std::vector<double>{0.0, 1.0});
    else if (c.raw[1] < 0.0) CHECK(c.capped.probs() == std::vector<double>{1.0, 0.0});
    else CHECK(c.capped.probs() == c.raw.probs());
  }
}

TEST_CASE("symmetric rates: correction moves toward the majority") {
  for (std::uint64_t i = 0; i < 5000; ++i) {
    gen::Gen g(64, i);
    const LabelDist d = g.binary_dist();
    const BinaryNoiseRates r = g.symmetric_rates();
    if (r.e_plus == 0.0 || d[1] == d[0]) continue;
    const CorrectedLabel c = corrected_label(d, r);
    CHECK((d[1] > d[0]) == (c.raw[1] > d[1]));
  }
}

TEST_CASE("asymmetric rates: correction moves by the weighted comparison") {
  for (std::uint64_t i = 0; i < 5000; ++i) {
    gen::Gen g(65, i);
    const LabelDist d = g.binary_dist();
    const BinaryNoiseRates r = g.rates();
    const double lhs = r.e_plus * d[1];
    const double rhs = r.e_minus * d[0];
    if (std::abs(lhs - rhs) < 1e-12) continue;
    CHECK((lhs > rhs) == (corrected_label(d, r).raw[1] > d[1]));
  }
}

TEST_CASE("corrected loss vector") {
  const LossVector loss({2.0, 0.1});
  const LossVector same = lc_loss_vector(loss, BinaryNoiseRates{0.0, 0.0});
  CHECK(same.values() == loss.values());
  const LossVector lc = lc_loss_vector(loss, BinaryNoiseRates{0.2, 0.2});
  CHECK(lc[0] == doctest::Approx(2.63333333333333).epsilon(1e-13));
  CHECK(lc[1] == doctest::Approx(-0.53333333333333).epsilon(1e-13));
  CHECK(0.8 * lc[1] + 0.2 * lc[0] == doctest::Approx(0.1).epsilon(1e-14));
  const TransitionMatrix singular(SquareMatrix(2, {0.5, 0.5, 0.5, 0.5}));
  CHECK_THROWS_AS(lc_loss_vector(loss, singular), std::domain_error);
}

TEST_CASE("corrected losses are unbiased under the exact posterior") {
  for (std::uint64_t i = 0; i < 10000; ++i) {
    gen::Gen g(66, i);
    const BinaryNoiseRates r = g.rates(0.9);
    const LossVector loss(g.losses(2));
    const LossVector lc = lc_loss_vector(loss, r);
    for (Label y : {Label::Positive, Label::Negative}) {
      const double p_pos = r.positive_rate(y);
      const double expectation = p_pos * lc.at(Label::Positive) + (1.0 - p_pos) * lc.at(Label::Negative);
      CHECK(std::abs(expectation - loss.at(y)) <= 1e-12);
    }
  }
}

TEST_CASE("empirical corrected loss example") {
  const LossVector loss({2.0, 0.1});
  const BinaryNoiseRates r{0.2, 0.2};
  const double lhs = lc_empirical_loss(kTwoPosOneNeg, r, loss);
  CHECK(lhs == doctest::Approx(0.522222222222).epsilon(1e-10));
  const CorrectedLabel c = corrected_label(empirical_distribution(kTwoPosOneNeg), r);
  CHECK(c.raw[0] == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
  CHECK(c.raw[1] == doctest::Approx(7.0 / 9.0).epsilon(1e-12));
  CHECK(loss.dot(c.raw) == doctest::Approx(lhs).epsilon(1e-12));

  const std::vector<Label> pos(4, Label::Positive);
  CHECK(lc_empirical_loss(pos, BinaryNoiseRates{0.0, 0.0}, loss) == doctest::Approx(0.1));
  const std::vector<Label> neg = {Label::Negative};
  CHECK(lc_empirical_loss(neg, BinaryNoiseRates{0.0, 0.0}, loss) == doctest::Approx(2.0));
  CHECK_THROWS_AS(lc_empirical_loss(std::vector<Label>{}, r, loss), std::invalid_argument);
}

TEST_CASE("empirical corrected loss equals raw corrected label dot loss") {
  for (std::uint64_t i = 0; i < 10000; ++i) {
    gen::Gen g(67, i);
    const auto labels = g.labels(g.integer(1, 30));
    const BinaryNoiseRates r = g.rates(0.9);
    const LossVector loss(g.losses(2));
    const double lhs = lc_empirical_loss(labels, r, loss);
    const double rhs = loss.dot(corrected_label(empirical_distribution(labels), r).raw);
    CHECK(std::abs(lhs - rhs) <= 1e-10);
  }
}

TEST_CASE("multiclass corrected label identities") {
  for (std::uint64_t i = 0; i < 500; ++i) {
    gen::Gen g(68, i);
    const std::size_t m = g.integer(2, 4);
    SquareMatrix raw(m);
    for (std::size_t r = 0; r < m; ++r) {
      auto row = g.simplex(m);
      for (std::size_t c = 0; c < m; ++c) raw(r, c) = 0.5 * row[c] + (r == c ? 0.5 : 0.0);
    }
    const TransitionMatrix t(raw);
    std::vector<std::size_t> labels(g.integer(1, 20));
    for (auto& k : labels) k = g.integer(0, m - 1);
    const LabelDist d = empirical_distribution(labels, m);
    const LabelDist c = corrected_label(d, t);
    double s = 0.0;
    for (double v : c.probs()) s += v;
    CHECK(std::abs(s - 1.0) <= 1e-12);
    const LossVector loss(g.losses(m));
    CHECK(std::abs(lc_empirical_loss(labels, t, loss) - loss.dot(c)) <= 1e-10);
  }
}

TEST_CASE("smoothed labels") {
  const LabelDist d = LabelDist::proper({0.4, 0.6});
  CHECK(smoothed_label(d, 0.0).probs() == d.probs());
  CHECK(smoothed_label(d, 1.0).probs() == std::vector<double>{0.5, 0.5});
  const LabelDist s = smoothed_label(d, 0.1);
  CHECK(s[0] == doctest::Approx(0.41).epsilon(1e-14));
  CHECK(s[1] == doctest::Approx(0.59).epsilon(1e-14));
  CHECK_THROWS_AS(smoothed_label(d, 1.1), std::invalid_argument);
  CHECK_THROWS_AS(smoothed_label(d, -0.1), std::invalid_argument);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    gen::Gen g(69, i);
    const LabelDist p = LabelDist::proper(g.simplex(g.integer(2, 5)));
    CHECK(smoothed_label(p, g.real(0.0, 1.0)).is_proper());
  }
}

TEST_CASE("label smoothing against loss correction examples") {
  const BinaryNoiseRates r{0.2, 0.2};
  CHECK(compare_ls_lc(LabelDist::proper({0.4, 0.6}), Label::Positive, r, 0.1) == Comparison::LcBetter);
  CHECK(compare_ls_lc(LabelDist::proper({0.6, 0.4}), Label::Positive, r, 0.1) == Comparison::LsBetter);
  CHECK(compare_ls_lc(LabelDist::proper({0.5, 0.5}), Label::Positive, r, 0.1) == Comparison::Tie);
  CHECK(compare_ls_lc(LabelDist::proper({0.6, 0.4}), Label::Negative, r, 0.1) == Comparison::LcBetter);
  CHECK_THROWS_AS(compare_ls_lc(LabelDist::uniform(3), Label::Positive, r, 0.1), std::invalid_argument);
}

TEST_CASE("peer prediction examples") {
  const double rate = global_noisy_positive_rate(0.5, BinaryNoiseRates{0.2, 0.2});
  CHECK(rate == doctest::Approx(0.5));
  const PeerDecision up = peer_predict(LabelDist::binary(0.6), rate);
  CHECK(up.predicted == Label::Positive);
  CHECK(up.margin == doctest::Approx(0.1));
  CHECK_FALSE(up.tie);
  CHECK(peer_predict(LabelDist::binary(0.4), rate).predicted == Label::Negative);
  const PeerDecision tie = peer_predict(LabelDist::binary(0.5), rate);
  CHECK(tie.tie);
  CHECK(tie.predicted == Label::Positive);
  CHECK(peer_predict(LabelDist::binary(0.5), 0.5, TieRule::LargerPrior, 0.3).predicted == Label::Negative);
  CHECK(peer_predict(LabelDist::binary(0.5), 0.5, TieRule::Negative).predicted == Label::Negative);
  CHECK(peer_predict(LabelDist::binary(0.5), 0.5, TieRule::Positive, 0.1).predicted == Label::Positive);
  CHECK(global_noisy_positive_rate(0.3, BinaryNoiseRates{0.1, 0.2}) ==
        doctest::Approx(0.3 * 0.9 + 0.7 * 0.2));
}

TEST_CASE("tie flag tracks a zero margin") {
  for (std::uint64_t i = 0; i < 2000; ++i) {
    gen::Gen g(70, i);
    const LabelDist d = g.binary_dist();
    const double rate = g.coin() ? d[1] : g.real(0.0, 1.0);
    const PeerDecision p = peer_predict(d, rate);
    CHECK(p.tie == (std::abs(d[1] - rate) <= kTieTolerance));
    if (!p.tie) CHECK((p.predicted == Label::Positive) == (d[1] > rate));
  }
}

TEST_CASE("independent joints give zero expected peer loss") {
  const std::vector<double> px = {0.25, 0.5, 0.125, 0.125};
  const std::vector<double> py = {0.375, 0.625};
  ProbTable joint{4, 2, {}};
  for (double a : px)
    for (double b : py) joint.data.push_back(a * b);
  for (std::uint64_t i = 0; i < 200; ++i) {
    gen::Gen g(71, i);
    const PeerLossDecomposition d = peer_expected_loss(joint, random_predictor(g, 4), 1e-3);
    CHECK(d.value == 0.0);
    CHECK(d.kl_model_vs_joint == d.kl_model_vs_product);
    CHECK(d.mutual_information == 0.0);
  }
  for (std::uint64_t i = 0; i < 200; ++i) {
    gen::Gen g(72, i);
    const auto ax = g.simplex(3), ay = g.simplex(2);
    ProbTable j{3, 2, {}};
    for (double a : ax)
      for (double b : ay) j.data.push_back(a * b);
    CHECK(std::abs(peer_expected_loss(j, random_predictor(g, 3), 1e-3).value) <= 1e-14);
  }
}

TEST_CASE("peer loss KL decomposition on random joints") {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    gen::Gen g(73, i);
    const std::size_t rows = g.integer(1, 4);
    const ProbTable joint = random_joint(g, rows);
    const ProbTable pred = random_predictor(g, rows);
    const double q_min = 1e-6;
    const PeerLossDecomposition d = peer_expected_loss(joint, pred, q_min);

    std::vector<double> px(rows, 0.0), py(2, 0.0), model, product;
    for (std::size_t x = 0; x < rows; ++x)
      for (std::size_t y = 0; y < 2; ++y) {
        px[x] += joint(x, y);
        py[y] += joint(x, y);
      }
    double direct = 0.0;
    for (std::size_t x = 0; x < rows; ++x)
      for (std::size_t y = 0; y < 2; ++y) {
        const double q = std::clamp(pred(x, y), q_min, 1.0 - q_min);
        direct += -(joint(x, y) - px[x] * py[y]) * std::log(q);
        model.push_back(q * px[x]);
        product.push_back(px[x] * py[y]);
      }
    const double mi = oracle::mutual_information(joint.data, rows, 2);
    CHECK(std::abs(d.value - direct) <= 1e-10);
    CHECK(std::abs(d.mutual_information - mi) <= 1e-12);
    CHECK(std::abs(d.kl_joint_vs_model - oracle::kl_table(joint.data, model)) <= 1e-10);
    CHECK(std::abs(d.kl_product_vs_model - oracle::kl_table(product, model)) <= 1e-10);
    CHECK(std::abs(d.value - (d.kl_joint_vs_model - d.kl_product_vs_model - d.mutual_information)) <= 1e-10);
  }
}

TEST_CASE("perfect memorization predictor") {
  gen::Gen g(74, 0);
  const ProbTable joint = random_joint(g, 3);
  ProbTable cond{3, 2, {}};
  for (std::size_t x = 0; x < 3; ++x) {
    const double px = joint(x, 0) + joint(x, 1);
    cond.data.push_back(joint(x, 0) / px);
    cond.data.push_back(joint(x, 1) / px);
  }
  const PeerLossDecomposition d = peer_expected_loss(joint, cond, 1e-12);
  const double mi = oracle::mutual_information(joint.data, 3, 2);
  CHECK(d.kl_joint_vs_model == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(d.value == doctest::Approx(-d.kl_product_vs_model - mi).epsilon(1e-10));
  CHECK(d.value <= -mi);
}

TEST_CASE("peer loss input validation") {
  const ProbTable bad{1, 2, {0.3, 0.3}};
  const ProbTable q{1, 2, {0.5, 0.5}};
  CHECK_THROWS_AS(peer_expected_loss(bad, q), std::invalid_argument);
  const ProbTable good{1, 2, {0.3, 0.7}};
  const ProbTable q_bad{1, 2, {0.5, 0.6}};
  CHECK_THROWS_AS(peer_expected_loss(good, q_bad), std::invalid_argument);
  const ProbTable q_shape{2, 2, {0.5, 0.5, 0.5, 0.5}};
  CHECK_THROWS_AS(peer_expected_loss(good, q_shape), std::invalid_argument);
}

TEST_CASE("literal peer sampling agrees with the expectation") {
  for (std::uint64_t i = 0; i < 5; ++i) {
    gen::Gen g(75, i);
    const ProbTable joint = random_joint(g, 3);
    const ProbTable pred = random_predictor(g, 3);
    const double expected = peer_expected_loss(joint, pred, 1e-3).value;
    CounterRng rng(76, i);
    const SampledEstimate s = peer_loss_sampled(joint, pred, 1e-3, 200000, rng);
    CHECK(std::abs(s.value - expected) <= 4.0 * s.std_error);
  }
}

TEST_CASE("confident predictions sit at the grid boundary") {
  const VertexCheck up = peer_vertex_check(LabelDist::binary(0.6), 0.5, 1001, 1e-3);
  CHECK(up.argmin_q == 1.0 - 1e-3);
  CHECK(up.at_boundary);
  const VertexCheck down = peer_vertex_check(LabelDist::binary(0.4), 0.5, 1001, 1e-3);
  CHECK(down.argmin_q == 1e-3);
  CHECK(down.at_boundary);
  const VertexCheck flat = peer_vertex_check(LabelDist::binary(0.5), 0.5, 1001, 1e-3);
  CHECK(flat.objective_range <= 1e-12);
  CHECK_THROWS_AS(peer_vertex_check(LabelDist::binary(0.5), 0.5, 2, 1e-3), std::invalid_argument);
}

TEST_CASE("peer objective never has an interior minimum") {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    gen::Gen g(77, i);
    const LabelDist d = g.binary_dist();
    const double rate = g.real(0.0, 1.0);
    if (std::abs(d[1] - rate) <= 1e-9) continue;
    const VertexCheck v = peer_vertex_check(d, rate, 1001, 1e-3);
    CHECK(v.at_boundary);
    CHECK((v.argmin_index == 1000) == (d[1] > rate));
  }
}

TEST_CASE("memorization paradox gap") {
  const std::vector<Label> four_of_five = {Label::Positive, Label::Positive, Label::Negative,
                                           Label::Positive, Label::Positive};
  for (std::uint64_t i = 0; i < 50; ++i) {
    gen::Gen g(78, i);
    const LossVector loss(g.losses(2));
    CHECK(std::abs(paradox_gap(four_of_five, BinaryNoiseRates{0.2, 0.2}, loss, Label::Positive)) <= 1e-12);
  }
  CHECK(paradox_gap(kTwoPosOneNeg, BinaryNoiseRates{0.2, 0.2}, LossVector({2.0, 0.1}), Label::Positive) ==
        doctest::Approx(0.422222222222).epsilon(1e-10));
  const std::vector<Label> clean(6, Label::Negative);
  CHECK(paradox_gap(clean, BinaryNoiseRates{0.0, 0.0}, LossVector({2.0, 0.1}), Label::Negative) == 0.0);
  CHECK_THROWS_AS(paradox_gap(std::vector<Label>{}, BinaryNoiseRates{0.2, 0.2}, LossVector({2.0, 0.1}),
                              Label::Positive),
                  std::invalid_argument);
}

}
