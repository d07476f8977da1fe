#include "pmvis/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "json.hpp"
#include "pmvis/errors.hpp"

namespace pmvis {

using ordered_json = nlohmann::ordered_json;

EvalConfig EvalConfig::defaults() {
  EvalConfig cfg;
  for (int i = 0; i < 10; ++i) cfg.iou_thresholds.push_back(double(50 + 5 * i) / 100.0);
  cfg.max_dets_for_ar = {1, 10};
  cfg.recall_points = 101;
  return cfg;
}

double st_iou(const InstanceTrack& pred, const InstanceTrack& gt) {
  if (pred.video_id != gt.video_id)
    throw VideoMismatch("st_iou across different videos");
  if (pred.frame_masks.size() != gt.frame_masks.size())
    throw VideoMismatch("st_iou across different video lengths");
  int64_t inter = 0, uni = 0;
  for (size_t f = 0; f < pred.frame_masks.size(); ++f) {
    const bool has_p = pred.frame_masks[f].has_value();
    const bool has_g = gt.frame_masks[f].has_value();
    if (!has_p && !has_g) continue;
    if (!has_p) {
      uni += rle_area(*gt.frame_masks[f]);
      continue;
    }
    if (!has_g) {
      uni += rle_area(*pred.frame_masks[f]);
      continue;
    }
    BinaryMask p = rle_decode(*pred.frame_masks[f]);
    BinaryMask g = rle_decode(*gt.frame_masks[f]);
    if (p.height != g.height || p.width != g.width)
      throw VideoMismatch("st_iou across different frame dimensions");
    for (size_t i = 0; i < p.data.size(); ++i) {
      inter += p.data[i] & g.data[i];
      uni += p.data[i] | g.data[i];
    }
  }
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

namespace {

struct PredRef {
  size_t index;  // into the caller's preds vector
  double score;
  int track_id;
};

std::vector<PredRef> score_order(const std::vector<InstanceTrack>& preds) {
  std::vector<PredRef> order;
  order.reserve(preds.size());
  for (size_t i = 0; i < preds.size(); ++i)
    order.push_back({i, preds[i].mean_score(), preds[i].track_id});
  std::sort(order.begin(), order.end(), [](const PredRef& a, const PredRef& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.track_id < b.track_id;
  });
  return order;
}

Matching match_with_ious(
    const std::vector<InstanceTrack>& preds, const std::vector<InstanceTrack>& gts,
    double iou_thr,
    const std::function<double(size_t, size_t)>& iou_of) {
  Matching m;
  m.pred_to_gt.assign(preds.size(), -1);
  std::vector<bool> gt_used(gts.size(), false);

  for (const PredRef& pr : score_order(preds)) {
    const InstanceTrack& pred = preds[pr.index];
    int best_gt = -1;
    double best_iou = -1.0;
    for (size_t gi = 0; gi < gts.size(); ++gi) {
      if (gt_used[gi]) continue;
      if (gts[gi].category_id != pred.category_id ||
          gts[gi].video_id != pred.video_id)
        continue;
      double iou = iou_of(pr.index, gi);
      if (iou < iou_thr) continue;
      if (iou > best_iou ||
          (iou == best_iou && best_gt >= 0 &&
           gts[gi].track_id < gts[best_gt].track_id)) {
        best_iou = iou;
        best_gt = int(gi);
      }
    }
    if (best_gt >= 0) {
      gt_used[best_gt] = true;
      m.pred_to_gt[pr.index] = best_gt;
      ++m.tp;
    } else {
      ++m.fp;
    }
  }
  m.fn = int(gts.size()) - m.tp;
  return m;
}

}  // namespace

Matching match_greedy(const std::vector<InstanceTrack>& preds,
                      const std::vector<InstanceTrack>& gts, double iou_thr) {
  // Quadratic, recomputing IoU per pair; evaluate() caches instead.
  return match_with_ious(preds, gts, iou_thr, [&](size_t pi, size_t gi) {
    return st_iou(preds[pi], gts[gi]);
  });
}

double average_precision(std::vector<std::pair<double, bool>> entries, int gt_count,
                         int recall_points) {
  if (gt_count <= 0) return 0.0;
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> precision, recall;
  int tp = 0, fp = 0;
  for (const auto& [score, is_tp] : entries) {
    (void)score;
    is_tp ? ++tp : ++fp;
    precision.push_back(double(tp) / double(tp + fp));
    recall.push_back(double(tp) / double(gt_count));
  }
  // Monotone non-increasing precision envelope.
  for (int i = int(precision.size()) - 2; i >= 0; --i)
    precision[i] = std::max(precision[i], precision[i + 1]);

  double sum = 0.0;
  for (int i = 0; i < recall_points; ++i) {
    double r = recall_points == 1 ? 0.0 : double(i) / double(recall_points - 1);
    auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[size_t(it - recall.begin())];
  }
  return sum / double(recall_points);
}

EvalReport evaluate(const VideoDataset& preds, const VideoDataset& gts,
                    const EvalConfig& cfg) {
  if (preds.categories != gts.categories)
    throw CategoryTableMismatch("prediction and ground-truth category tables differ");
  for (const auto& t : preds.tracks)
    if (!gts.find_video(t.video_id))
      throw VideoMismatch("prediction references video " +
                          std::to_string(t.video_id) + " absent from ground truth");

  // Cache spatio-temporal IoU for same-video same-category pairs.
  std::unordered_map<int64_t, double> iou_cache;
  auto pair_key = [&](size_t pi, size_t gi) {
    return int64_t(pi) * int64_t(gts.tracks.size() + 1) + int64_t(gi);
  };
  for (size_t pi = 0; pi < preds.tracks.size(); ++pi) {
    for (size_t gi = 0; gi < gts.tracks.size(); ++gi) {
      const auto& p = preds.tracks[pi];
      const auto& g = gts.tracks[gi];
      if (p.video_id != g.video_id || p.category_id != g.category_id) continue;
      iou_cache[pair_key(pi, gi)] = st_iou(p, g);
    }
  }

  // Partition track indices by category.
  std::map<int, std::vector<size_t>> preds_by_cat, gts_by_cat;
  for (size_t i = 0; i < preds.tracks.size(); ++i)
    preds_by_cat[preds.tracks[i].category_id].push_back(i);
  for (size_t i = 0; i < gts.tracks.size(); ++i)
    gts_by_cat[gts.tracks[i].category_id].push_back(i);

  EvalReport report;
  for (double thr : cfg.iou_thresholds)
    report.diagnostics.push_back(ThresholdDiagnostics{thr, 0, 0, 0});

  auto subset = [](const std::vector<InstanceTrack>& tracks,
                   const std::vector<size_t>& idx) {
    std::vector<InstanceTrack> out;
    out.reserve(idx.size());
    for (size_t i : idx) out.push_back(tracks[i]);
    return out;
  };

  std::vector<std::vector<double>> recall_sums(cfg.max_dets_for_ar.size());
  int evaluated_categories = 0;
  double ap_sum_all = 0.0;
  std::vector<double> ap_sum_per_thr(cfg.iou_thresholds.size(), 0.0);

  for (const auto& [cat, gt_idx] : gts_by_cat) {
    if (gt_idx.empty()) continue;
    ++evaluated_categories;
    const std::vector<size_t>& pred_idx = preds_by_cat[cat];
    std::vector<InstanceTrack> cat_preds = subset(preds.tracks, pred_idx);
    std::vector<InstanceTrack> cat_gts = subset(gts.tracks, gt_idx);
    auto iou_of = [&](size_t pi, size_t gi) {
      auto it = iou_cache.find(pair_key(pred_idx[pi], gt_idx[gi]));
      return it == iou_cache.end() ? 0.0 : it->second;
    };

    std::vector<double>& cat_ap = report.per_category_ap[cat];
    for (size_t ti = 0; ti < cfg.iou_thresholds.size(); ++ti) {
      Matching m = match_with_ious(cat_preds, cat_gts, cfg.iou_thresholds[ti], iou_of);
      report.diagnostics[ti].tp += m.tp;
      report.diagnostics[ti].fp += m.fp;
      report.diagnostics[ti].fn += m.fn;

      std::vector<std::pair<double, bool>> entries;
      for (size_t pi = 0; pi < cat_preds.size(); ++pi)
        entries.push_back({cat_preds[pi].mean_score(), m.pred_to_gt[pi] >= 0});
      double ap = average_precision(std::move(entries), int(cat_gts.size()),
                                    cfg.recall_points);
      cat_ap.push_back(ap);
      ap_sum_all += ap;
      ap_sum_per_thr[ti] += ap;
    }

    // AR with per-video detection caps.
    for (size_t ki = 0; ki < cfg.max_dets_for_ar.size(); ++ki) {
      int cap = cfg.max_dets_for_ar[ki];
      std::map<int, std::vector<PredRef>> per_video;
      for (size_t pi = 0; pi < cat_preds.size(); ++pi)
        per_video[cat_preds[pi].video_id].push_back(
            {pi, cat_preds[pi].mean_score(), cat_preds[pi].track_id});
      std::vector<size_t> capped;
      for (auto& [vid, refs] : per_video) {
        std::sort(refs.begin(), refs.end(), [](const PredRef& a, const PredRef& b) {
          if (a.score != b.score) return a.score > b.score;
          return a.track_id < b.track_id;
        });
        for (size_t i = 0; i < refs.size() && int(i) < cap; ++i)
          capped.push_back(refs[i].index);
      }
      std::sort(capped.begin(), capped.end());
      std::vector<InstanceTrack> capped_preds;
      for (size_t pi : capped) capped_preds.push_back(cat_preds[pi]);

      double recall_sum = 0.0;
      for (double thr : cfg.iou_thresholds) {
        Matching m = match_with_ious(capped_preds, cat_gts, thr,
                                     [&](size_t pi, size_t gi) {
                                       return iou_of(capped[pi], gi);
                                     });
        recall_sum += double(m.tp) / double(cat_gts.size());
      }
      recall_sums[ki].push_back(recall_sum / double(cfg.iou_thresholds.size()));
    }
  }

  if (evaluated_categories > 0) {
    report.ap = ap_sum_all / double(evaluated_categories * cfg.iou_thresholds.size());
    for (size_t ti = 0; ti < cfg.iou_thresholds.size(); ++ti) {
      if (std::abs(cfg.iou_thresholds[ti] - 0.50) < 1e-9)
        report.ap50 = ap_sum_per_thr[ti] / double(evaluated_categories);
      if (std::abs(cfg.iou_thresholds[ti] - 0.75) < 1e-9)
        report.ap75 = ap_sum_per_thr[ti] / double(evaluated_categories);
    }
  }
  for (const auto& sums : recall_sums) {
    double total = 0.0;
    for (double r : sums) total += r;
    report.ar.push_back(sums.empty() ? 0.0 : total / double(sums.size()));
  }
  return report;
}

namespace {

double percent1(double fraction) { return std::round(fraction * 1000.0) / 10.0; }

std::string fmt1(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", percent1(fraction));
  return buf;
}

}  // namespace

std::string report_to_text(const EvalReport& report,
                           const std::map<int, std::string>& categories) {
  std::string out;
  out += "metric      value\n";
  out += "AP          " + fmt1(report.ap) + "\n";
  out += "AP50        " + fmt1(report.ap50) + "\n";
  out += "AP75        " + fmt1(report.ap75) + "\n";
  const char* ar_names[] = {"AR1 ", "AR10"};
  for (size_t i = 0; i < report.ar.size(); ++i) {
    std::string name = i < 2 ? ar_names[i] : ("AR#" + std::to_string(i));
    out += name + std::string(12 - std::min<size_t>(12, name.size()), ' ') +
           fmt1(report.ar[i]) + "\n";
  }
  out += "\nper-category AP (mean over thresholds)\n";
  for (const auto& [cat, aps] : report.per_category_ap) {
    double mean = 0.0;
    for (double a : aps) mean += a;
    if (!aps.empty()) mean /= double(aps.size());
    auto it = categories.find(cat);
    std::string name = it == categories.end() ? std::to_string(cat) : it->second;
    if (name.size() < 20) name += std::string(20 - name.size(), ' ');
    out += name + fmt1(mean) + "\n";
  }
  return out;
}

std::string report_to_json(const EvalReport& report,
                           const std::map<int, std::string>& categories) {
  ordered_json doc;
  doc["AP"] = percent1(report.ap);
  doc["AP50"] = percent1(report.ap50);
  doc["AP75"] = percent1(report.ap75);
  for (size_t i = 0; i < report.ar.size(); ++i) {
    std::string name = i == 0 ? "AR1" : (i == 1 ? "AR10" : "AR#" + std::to_string(i));
    doc[name] = percent1(report.ar[i]);
  }
  doc["per_category"] = ordered_json::object();
  for (const auto& [cat, aps] : report.per_category_ap) {
    double mean = 0.0;
    for (double a : aps) mean += a;
    if (!aps.empty()) mean /= double(aps.size());
    auto it = categories.find(cat);
    std::string name = it == categories.end() ? std::to_string(cat) : it->second;
    doc["per_category"][name] = percent1(mean);
  }
  doc["diagnostics"] = ordered_json::array();
  for (const auto& d : report.diagnostics)
    doc["diagnostics"].push_back(ordered_json{{"iou_threshold", d.iou_threshold},
                                              {"tp", d.tp},
                                              {"fp", d.fp},
                                              {"fn", d.fn}});
  return doc.dump(1);
}

}  // namespace pmvis
