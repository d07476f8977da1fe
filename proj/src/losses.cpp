#include "pmvis/losses.hpp"

#include <algorithm>
#include <cmath>

#include "pmvis/errors.hpp"

namespace pmvis {

namespace {

void check_dims(const ProbGrid& pred, int height, int width, const char* what) {
  if (pred.height != height || pred.width != width)
    throw DimensionMismatch(std::string(what) + ": grid dimensions disagree");
}

// Shared 1-D dice used by the projection loss. prob and target have equal
// length; grad is with respect to prob.
void dice_1d(const std::vector<double>& prob, const std::vector<uint8_t>& target,
             double epsilon, double* value, std::vector<double>* grad) {
  double num = epsilon, den = epsilon;
  for (size_t i = 0; i < prob.size(); ++i) {
    num += 2.0 * prob[i] * target[i];
    den += prob[i] + target[i];
  }
  *value = 1.0 - num / den;
  grad->assign(prob.size(), 0.0);
  for (size_t i = 0; i < prob.size(); ++i)
    (*grad)[i] = -(2.0 * target[i] * den - num) / (den * den);
}

}  // namespace

LossResult dice_loss(const ProbGrid& pred, const BinaryMask& target, double epsilon) {
  check_dims(pred, target.height, target.width, "dice_loss");
  double num = epsilon, den = epsilon;
  for (size_t i = 0; i < pred.values.size(); ++i) {
    num += 2.0 * pred.values[i] * target.data[i];
    den += pred.values[i] + target.data[i];
  }
  LossResult out;
  out.value = 1.0 - num / den;
  out.grad.resize(pred.values.size());
  for (size_t i = 0; i < pred.values.size(); ++i)
    out.grad[i] = -(2.0 * target.data[i] * den - num) / (den * den);
  return out;
}

LossResult focal_loss(const ProbGrid& pred, const BinaryMask& target, double alpha,
                      double gamma, double clamp_delta) {
  check_dims(pred, target.height, target.width, "focal_loss");
  const size_t n = pred.values.size();
  LossResult out;
  out.grad.assign(n, 0.0);
  if (n == 0) return out;
  for (size_t i = 0; i < n; ++i) {
    double p = pred.values[i];
    bool clamped = p < clamp_delta || p > 1.0 - clamp_delta;
    p = std::clamp(p, clamp_delta, 1.0 - clamp_delta);
    bool positive = target.data[i] != 0;
    double pt = positive ? p : 1.0 - p;
    double at = positive ? alpha : 1.0 - alpha;
    double one_minus = 1.0 - pt;
    out.value += -at * std::pow(one_minus, gamma) * std::log(pt);
    if (!clamped) {
      double d_pt = gamma > 0.0
                        ? -at * (-gamma * std::pow(one_minus, gamma - 1.0) * std::log(pt) +
                                 std::pow(one_minus, gamma) / pt)
                        : -at / pt;
      out.grad[i] = positive ? d_pt : -d_pt;
    }
  }
  out.value /= double(n);
  for (double& g : out.grad) g /= double(n);
  return out;
}

LossResult boxinst_projection_loss(const ProbGrid& pred, const Box& box,
                                   double epsilon) {
  if (box.x < 0 || box.y < 0 || box.x + box.w > pred.width ||
      box.y + box.h > pred.height)
    throw BoxOutOfBounds("boxinst_projection_loss: box outside the grid");

  // Column and row max-projections; ties go to the lowest index.
  std::vector<double> x_proj(pred.width, 0.0), y_proj(pred.height, 0.0);
  std::vector<int> x_argmax(pred.width, 0), y_argmax(pred.height, 0);
  for (int c = 0; c < pred.width; ++c) {
    double best = -1.0;
    for (int r = 0; r < pred.height; ++r) {
      if (pred.at(r, c) > best) {
        best = pred.at(r, c);
        x_argmax[c] = r;
      }
    }
    x_proj[c] = best;
  }
  for (int r = 0; r < pred.height; ++r) {
    double best = -1.0;
    for (int c = 0; c < pred.width; ++c) {
      if (pred.at(r, c) > best) {
        best = pred.at(r, c);
        y_argmax[r] = c;
      }
    }
    y_proj[r] = best;
  }

  std::vector<uint8_t> x_target(pred.width, 0), y_target(pred.height, 0);
  for (int c = box.x; c < box.x + box.w; ++c) x_target[c] = 1;
  for (int r = box.y; r < box.y + box.h; ++r) y_target[r] = 1;

  double vx, vy;
  std::vector<double> gx, gy;
  dice_1d(x_proj, x_target, epsilon, &vx, &gx);
  dice_1d(y_proj, y_target, epsilon, &vy, &gy);

  LossResult out;
  out.value = vx + vy;
  out.grad.assign(pred.values.size(), 0.0);
  for (int c = 0; c < pred.width; ++c)
    out.grad[size_t(x_argmax[c]) * pred.width + c] += gx[c];
  for (int r = 0; r < pred.height; ++r)
    out.grad[size_t(r) * pred.width + y_argmax[r]] += gy[r];
  return out;
}

LossResult boxinst_pairwise_loss(const ProbGrid& pred, const ColorImage& img,
                                 const Box& box, double sim_threshold, int dilation,
                                 double theta, double clamp_delta) {
  if (img.height != pred.height || img.width != pred.width)
    throw DimensionMismatch("boxinst_pairwise_loss: image and grid disagree");

  const int x0 = std::max(0, box.x - dilation);
  const int y0 = std::max(0, box.y - dilation);
  const int x1 = std::min(pred.width, box.x + box.w + dilation);
  const int y1 = std::min(pred.height, box.y + box.h + dilation);

  // Each undirected 8-neighborhood edge once: E, SE, S, SW.
  static constexpr int kOffsets[4][2] = {{0, 1}, {1, 1}, {1, 0}, {1, -1}};

  LossResult out;
  out.grad.assign(pred.values.size(), 0.0);
  int edges = 0;
  for (int r = y0; r < y1; ++r) {
    for (int c = x0; c < x1; ++c) {
      for (const auto& off : kOffsets) {
        int nr = r + off[0], nc = c + off[1];
        if (nr < y0 || nr >= y1 || nc < x0 || nc >= x1) continue;
        double d2 = 0.0;
        for (int ch = 0; ch < 3; ++ch) {
          double d = img.at(ch, r, c) - img.at(ch, nr, nc);
          d2 += d * d;
        }
        if (std::exp(-std::sqrt(d2) / theta) < sim_threshold) continue;
        ++edges;
        double pi = pred.at(r, c), pj = pred.at(nr, nc);
        double same = pi * pj + (1.0 - pi) * (1.0 - pj);
        if (same < clamp_delta) {
          out.value += -std::log(clamp_delta);  // clamped; gradient stops here
          continue;
        }
        out.value += -std::log(same);
        out.grad[size_t(r) * pred.width + c] += -(2.0 * pj - 1.0) / same;
        out.grad[size_t(nr) * pred.width + nc] += -(2.0 * pi - 1.0) / same;
      }
    }
  }
  if (edges > 0) {
    out.value /= double(edges);
    for (double& g : out.grad) g /= double(edges);
  }
  return out;
}

LossPolicy select_policy(AnnotationKind kind, TrainingStage stage) {
  switch (kind) {
    case AnnotationKind::kPixelMask:
      return LossPolicy{true, false, true};
    case AnnotationKind::kBoxOnly:
      if (stage == TrainingStage::kVideoStage)
        throw InvalidCombination(
            "box-only data at the video stage: pseudo-labels always carry masks");
      return LossPolicy{false, false, false};
    case AnnotationKind::kPseudoMask:
      return LossPolicy{true, true, true};
  }
  throw InvalidCombination("unknown annotation kind");
}

}  // namespace pmvis
