#ifndef PMVIS_EVAL_HPP
#define PMVIS_EVAL_HPP

#include <map>
#include <string>
#include <vector>

#include "pmvis/dataset.hpp"

namespace pmvis {

// YTVIS-protocol evaluation. Conventions adopted here, since no single
// normative text pins them down:
//   - a track's confidence is its mean frame score; only ordering matters;
//   - absent frame masks count as empty in the spatio-temporal IoU;
//   - greedy matching in confidence order, same category, same video;
//   - AR caps detections per (video, category) at each max_dets value;
//   - categories with no ground truth anywhere are excluded from the means.
struct EvalConfig {
  std::vector<double> iou_thresholds;  // default 0.50:0.05:0.95
  std::vector<int> max_dets_for_ar;    // default {1, 10}
  int recall_points = 101;

  static EvalConfig defaults();
};

struct ThresholdDiagnostics {
  double iou_threshold = 0.0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

struct EvalReport {
  // category id -> AP per threshold, in [0,1].
  std::map<int, std::vector<double>> per_category_ap;
  double ap = 0.0;
  double ap50 = 0.0;
  double ap75 = 0.0;
  std::vector<double> ar;  // one per max_dets_for_ar entry
  std::vector<ThresholdDiagnostics> diagnostics;
};

// Sum of per-frame intersections over sum of per-frame unions; absent masks
// are empty; 0 when the denominator is 0. Throws VideoMismatch when the
// tracks come from different videos.
double st_iou(const InstanceTrack& pred, const InstanceTrack& gt);

struct Matching {
  // For each pred index (in the given order): matched gt index or -1.
  std::vector<int> pred_to_gt;
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

// Greedy protocol: preds in descending mean-score order each take the
// unmatched same-category same-video gt with the highest st_iou >= iou_thr
// (ties: higher IoU, then lower gt track id).
Matching match_greedy(const std::vector<InstanceTrack>& preds,
                      const std::vector<InstanceTrack>& gts, double iou_thr);

// Interpolated AP: the precision envelope sampled at recall_points recall
// values. Entries are (score, is_tp) for one category, any order.
double average_precision(std::vector<std::pair<double, bool>> entries, int gt_count,
                         int recall_points);

EvalReport evaluate(const VideoDataset& preds, const VideoDataset& gts,
                    const EvalConfig& cfg);

// Percent table with one decimal, shaped like the usual AP/AR columns.
std::string report_to_text(const EvalReport& report,
                           const std::map<int, std::string>& categories);
std::string report_to_json(const EvalReport& report,
                           const std::map<int, std::string>& categories);

}  // namespace pmvis

#endif  // PMVIS_EVAL_HPP
