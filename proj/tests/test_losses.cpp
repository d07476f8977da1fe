#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "pmvis/errors.hpp"
#include "pmvis/losses.hpp"
#include "pmvis/rng.hpp"

using namespace pmvis;

namespace {

constexpr double kFdTol = 1e-5;

ProbGrid random_grid(SplitMix64& rng, int h, int w, double lo = 0.05,
                     double hi = 0.95) {
  ProbGrid g(h, w);
  for (auto& v : g.values) v = lo + rng.next_double() * (hi - lo);
  return g;
}

BinaryMask random_target(SplitMix64& rng, int h, int w, double density = 0.5) {
  BinaryMask m(h, w);
  for (auto& px : m.data) px = rng.next_bernoulli(density) ? 1 : 0;
  return m;
}

// Skip entries whose column/row maximum is nearly tied with another entry;
// the max subgradient is non-smooth there.
bool near_projection_tie(const ProbGrid& g, int idx, double margin) {
  int r = idx / g.width, c = idx % g.width;
  for (int rr = 0; rr < g.height; ++rr)
    if (rr != r && std::abs(g.at(rr, c) - g.at(r, c)) < margin) return true;
  for (int cc = 0; cc < g.width; ++cc)
    if (cc != c && std::abs(g.at(r, cc) - g.at(r, c)) < margin) return true;
  return false;
}

}  // namespace

TEST_CASE("dice loss endpoints") {
  BinaryMask target(4, 4);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 4; ++c) target.set(r, c, 1);

  ProbGrid perfect(4, 4);
  for (size_t i = 0; i < perfect.values.size(); ++i)
    perfect.values[i] = target.data[i];
  CHECK(dice_loss(perfect, target).value < 1.0 / 8.0);  // within the eps bound

  ProbGrid zeros(4, 4);
  CHECK(dice_loss(zeros, target).value == doctest::Approx(1.0 - 1.0 / 9.0));
  CHECK(dice_loss(zeros, target).value > 0.85);

  CHECK_THROWS_AS(dice_loss(ProbGrid(3, 4), target), DimensionMismatch);
}

TEST_CASE("dice gradient matches finite differences") {
  SplitMix64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    ProbGrid g = random_grid(rng, 8, 8);
    BinaryMask t = random_target(rng, 8, 8);
    double err = oracles::max_gradient_error(
        [&](const ProbGrid& p) { return dice_loss(p, t); }, g);
    REQUIRE(err < kFdTol);
  }
}

TEST_CASE("focal loss endpoints and gamma=0 reduction") {
  BinaryMask target(2, 2);
  target.set(0, 0, 1);
  ProbGrid perfect(2, 2);
  perfect.at(0, 0) = 1.0;
  CHECK(focal_loss(perfect, target, 0.25, 2.0).value < 1e-9);

  // gamma=0, alpha=0.5 is half of the balanced cross-entropy.
  ProbGrid g(2, 2);
  g.values = {0.7, 0.2, 0.4, 0.9};
  double ce = -std::log(0.7) - std::log(0.8) - std::log(0.6) - std::log(0.1);
  CHECK(focal_loss(g, target, 0.5, 0.0).value == doctest::Approx(0.5 * ce / 4.0));
}

TEST_CASE("focal gradient matches finite differences off the clamp") {
  SplitMix64 rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    ProbGrid g = random_grid(rng, 8, 8);
    BinaryMask t = random_target(rng, 8, 8);
    double err = oracles::max_gradient_error(
        [&](const ProbGrid& p) { return focal_loss(p, t, 0.25, 2.0); }, g);
    REQUIRE(err < kFdTol);
  }
}

TEST_CASE("focal gradient is zero where the clamp binds") {
  BinaryMask target(1, 2);
  target.set(0, 0, 1);
  ProbGrid g(1, 2);
  g.values = {0.0, 1.0};  // both outside [delta, 1-delta]
  LossResult res = focal_loss(g, target, 0.25, 2.0);
  CHECK(std::isfinite(res.value));
  CHECK(res.grad[0] == 0.0);
  CHECK(res.grad[1] == 0.0);
}

TEST_CASE("projection loss endpoints") {
  Box box{1, 1, 2, 2};
  ProbGrid indicator(4, 4);
  for (int r = 1; r < 3; ++r)
    for (int c = 1; c < 3; ++c) indicator.at(r, c) = 1.0;
  CHECK(boxinst_projection_loss(indicator, box).value <
        2.0 / 3.0);  // eps bound per axis

  ProbGrid zeros(4, 4);
  LossResult res = boxinst_projection_loss(zeros, box);
  CHECK(res.value == doctest::Approx(2.0 * (1.0 - 1.0 / 3.0)));
  CHECK(res.value > 1.0);

  CHECK_THROWS_AS(boxinst_projection_loss(zeros, Box{3, 3, 2, 2}), BoxOutOfBounds);
}

TEST_CASE("projection gradient matches finite differences away from ties") {
  SplitMix64 rng(47);
  const double margin = 3e-4;  // > 2h so the argmax cannot flip within a probe
  for (int trial = 0; trial < 50; ++trial) {
    ProbGrid g = random_grid(rng, 8, 8);
    Box box{1 + int(rng.next_below(3)), 1 + int(rng.next_below(3)),
            2 + int(rng.next_below(3)), 2 + int(rng.next_below(3))};
    double err = oracles::max_gradient_error(
        [&](const ProbGrid& p) { return boxinst_projection_loss(p, box); }, g, 1e-4,
        [&](const ProbGrid& p, int idx) { return near_projection_tie(p, idx, margin); });
    REQUIRE(err < kFdTol);
  }
}

TEST_CASE("pairwise loss endpoints") {
  ColorImage img(4, 4);  // uniform: every edge qualifies
  Box box{0, 0, 4, 4};

  ProbGrid ones(4, 4);
  for (auto& v : ones.values) v = 1.0;
  CHECK(boxinst_pairwise_loss(ones, img, box, 0.3, 2).value == 0.0);

  // A checkerboard drives P(y_i = y_j) to zero on diagonal-free edges; the
  // clamp keeps the value finite.
  ProbGrid checker(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) checker.at(r, c) = (r + c) % 2;
  LossResult res = boxinst_pairwise_loss(checker, img, box, 0.3, 2);
  CHECK(std::isfinite(res.value));
  CHECK(res.value > 1.0);

  // A dissimilar-everywhere image qualifies no edges.
  ColorImage loud(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) loud.at(0, r, c) = 100.0 * (r * 4 + c);
  CHECK(boxinst_pairwise_loss(checker, loud, box, 0.3, 2).value == 0.0);
}

TEST_CASE("pairwise gradient matches finite differences") {
  SplitMix64 rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    ProbGrid g = random_grid(rng, 8, 8);
    ColorImage img(8, 8);
    for (auto& ch : img.channels)
      for (auto& v : ch) v = rng.next_double();
    Box box{int(rng.next_below(3)), int(rng.next_below(3)), 3 + int(rng.next_below(3)),
            3 + int(rng.next_below(3))};
    double err = oracles::max_gradient_error(
        [&](const ProbGrid& p) {
          return boxinst_pairwise_loss(p, img, box, 0.3, 2);
        },
        g);
    REQUIRE(err < kFdTol);
  }
}

TEST_CASE("loss values stay non-negative on random instances") {
  SplitMix64 rng(59);
  for (int trial = 0; trial < 100; ++trial) {
    ProbGrid g = random_grid(rng, 6, 6, 0.0, 1.0);
    BinaryMask t = random_target(rng, 6, 6);
    ColorImage img(6, 6);
    for (auto& ch : img.channels)
      for (auto& v : ch) v = rng.next_double();
    Box box{1, 1, 4, 4};
    CHECK(dice_loss(g, t).value >= 0.0);
    CHECK(focal_loss(g, t, 0.25, 2.0).value >= 0.0);
    CHECK(boxinst_projection_loss(g, box).value >= 0.0);
    CHECK(boxinst_pairwise_loss(g, img, box, 0.3, 2).value >= 0.0);
  }
}

TEST_CASE("supervision policy table") {
  CHECK(select_policy(AnnotationKind::kPixelMask, TrainingStage::kImageStage) ==
        LossPolicy{true, false, true});
  CHECK(select_policy(AnnotationKind::kPixelMask, TrainingStage::kVideoStage) ==
        LossPolicy{true, false, true});
  CHECK(select_policy(AnnotationKind::kBoxOnly, TrainingStage::kImageStage) ==
        LossPolicy{false, false, false});
  CHECK(select_policy(AnnotationKind::kPseudoMask, TrainingStage::kVideoStage) ==
        LossPolicy{true, true, true});
  CHECK(select_policy(AnnotationKind::kPseudoMask, TrainingStage::kImageStage) ==
        LossPolicy{true, true, true});
  CHECK_THROWS_AS(select_policy(AnnotationKind::kBoxOnly, TrainingStage::kVideoStage),
                  InvalidCombination);
}
