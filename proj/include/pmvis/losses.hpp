#ifndef PMVIS_LOSSES_HPP
#define PMVIS_LOSSES_HPP

#include <vector>

#include "pmvis/mask.hpp"

namespace pmvis {

// Predicted foreground probability per pixel, row-major.
struct ProbGrid {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  ProbGrid() = default;
  ProbGrid(int h, int w) : height(h), width(w), values(size_t(h) * w, 0.0) {}

  double at(int row, int col) const { return values[size_t(row) * width + col]; }
  double& at(int row, int col) { return values[size_t(row) * width + col]; }
};

// Three real channels per pixel (LAB-like), row-major per channel.
struct ColorImage {
  int height = 0;
  int width = 0;
  std::vector<double> channels[3];

  ColorImage() = default;
  ColorImage(int h, int w) : height(h), width(w) {
    for (auto& ch : channels) ch.assign(size_t(h) * w, 0.0);
  }

  double at(int ch, int row, int col) const {
    return channels[ch][size_t(row) * width + col];
  }
  double& at(int ch, int row, int col) {
    return channels[ch][size_t(row) * width + col];
  }
};

struct LossResult {
  double value = 0.0;
  std::vector<double> grad;  // d value / d pred, same layout as the grid
};

// The loss formulas come from the methods cited for MaskLoss and BoxInstLoss;
// these defaults are this repo's recorded choices, configurable at the CLI.
struct LossHyperparams {
  double dice_epsilon = 1.0;
  double focal_alpha = 0.25;
  double focal_gamma = 2.0;
  double prob_clamp = 1e-6;       // probability clamp delta
  double pairwise_theta = 2.0;    // color similarity temperature
  double pairwise_threshold = 0.3;
  int pairwise_dilation = 2;      // box dilation in pixels
};

// 1 - (2*sum(p*t) + eps) / (sum(p) + sum(t) + eps), with analytic gradient.
LossResult dice_loss(const ProbGrid& pred, const BinaryMask& target,
                     double epsilon = 1.0);

// Mean over pixels of -alpha_t * (1 - p_t)^gamma * log(p_t). Predictions are
// clamped to [delta, 1-delta]; the gradient is zero where the clamp binds.
LossResult focal_loss(const ProbGrid& pred, const BinaryMask& target, double alpha,
                      double gamma, double clamp_delta = 1e-6);

// Dice between each axis max-projection of pred and the box indicator
// projection, summed over both axes. The max subgradient routes to the
// lowest-index argmax pixel per row/column.
LossResult boxinst_projection_loss(const ProbGrid& pred, const Box& box,
                                   double epsilon = 1.0);

// Over 8-neighborhood edges inside the dilated box whose color similarity
// exp(-||ci - cj|| / theta) >= sim_threshold: mean of -log(pi*pj +
// (1-pi)*(1-pj)), the probability clamped below at clamp_delta.
LossResult boxinst_pairwise_loss(const ProbGrid& pred, const ColorImage& img,
                                 const Box& box, double sim_threshold,
                                 int dilation, double theta = 2.0,
                                 double clamp_delta = 1e-6);

enum class AnnotationKind { kPixelMask, kBoxOnly, kPseudoMask };
enum class TrainingStage { kImageStage, kVideoStage };

// Which loss terms a sample with the given annotation kind enables.
struct LossPolicy {
  bool enable_mask_loss = false;
  bool enable_boxinst_loss = false;
  bool supervise_mask_head = false;

  bool operator==(const LossPolicy& other) const = default;
};

// Dynamic supervision selection:
//   pixel masks  -> mask loss, supervised mask head
//   box-only     -> box supervision only, mask head untouched
//   pseudo masks -> mask loss and boxinst loss together
// Throws InvalidCombination for box-only data at the video stage; pseudo
// labels always carry masks.
LossPolicy select_policy(AnnotationKind kind, TrainingStage stage);

}  // namespace pmvis

#endif  // PMVIS_LOSSES_HPP
