// Test-only reference implementations, written independently of the library
// code they check. Keep these naive and obvious.
#ifndef PMVIS_TESTS_ORACLES_HPP
#define PMVIS_TESTS_ORACLES_HPP

#include <functional>
#include <map>
#include <vector>

#include "pmvis/dataset.hpp"
#include "pmvis/losses.hpp"
#include "pmvis/mask.hpp"

namespace oracles {

// Central finite differences at step h over every grid entry; returns the
// worst relative error among entries not excluded by `skip`.
double max_gradient_error(
    const std::function<pmvis::LossResult(const pmvis::ProbGrid&)>& f,
    const pmvis::ProbGrid& grid, double h = 1e-4,
    const std::function<bool(const pmvis::ProbGrid&, int)>& skip = nullptr);

// Crossing-number point-in-polygon test at pixel centers; union over rings.
pmvis::BinaryMask rasterize_reference(
    const std::vector<std::vector<double>>& polygons, int height, int width);

// Naive track IoU: decode everything, count pixels.
double st_iou_reference(const pmvis::InstanceTrack& a, const pmvis::InstanceTrack& b);

struct EvalOracleResult {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  // category -> AP at the given threshold
  std::map<int, double> ap_per_category;
  double mean_ap = 0.0;  // over categories with ground truth
};

// Full greedy protocol at one IoU threshold, recomputed from scratch.
EvalOracleResult evaluate_reference(const std::vector<pmvis::InstanceTrack>& preds,
                                    const std::vector<pmvis::InstanceTrack>& gts,
                                    double iou_thr, int recall_points);

// Mean over gt (track, frame) pairs with a present gt mask of the per-frame
// IoU against the best-matching pred track (by track IoU); absent pred
// frames count 0.
double mean_frame_iou(const std::vector<pmvis::InstanceTrack>& preds,
                      const std::vector<pmvis::InstanceTrack>& gts);

// Best per-frame assignment (max total IoU over all injective det->object
// mappings); for scenes with <= 3 objects. Returns per-frame det index for
// each object, -1 when unassigned or IoU is zero.
std::vector<std::vector<int>> assign_exhaustive(
    const std::vector<std::vector<pmvis::BinaryMask>>& dets_per_frame,
    const std::vector<std::vector<pmvis::BinaryMask>>& objects_per_frame);

}  // namespace oracles

#endif  // PMVIS_TESTS_ORACLES_HPP
