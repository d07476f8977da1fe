#ifndef PMVIS_CURATION_HPP
#define PMVIS_CURATION_HPP

#include <vector>

#include "pmvis/dataset.hpp"

namespace pmvis {

struct Detection {
  int category_id = 0;
  double score = 0.0;
  RleMask mask;
};

// Raw per-frame model outputs for one video, before any track structure.
struct RawDetectionSet {
  int video_id = 0;
  int width = 0;
  int height = 0;
  std::vector<std::vector<Detection>> frames;
  std::string provenance;
};

struct FilterConfig {
  int top_k = 4;                 // 0 disables the TopK filter
  double score_threshold = 0.2;  // tau; inclusive, so 0 is the exact identity
};

enum class MotionModel { kNone, kConstantVelocityCentroid };

// Deterministic stand-in for the neural mask tracker: IoU association plus
// centroid-velocity coasting behind the same keyframe/bidirectional contract.
struct TrackerConfig {
  double iou_match_threshold = 0.4;
  int max_coast_frames = 10;
  MotionModel motion_model = MotionModel::kConstantVelocityCentroid;
  double new_track_score_floor = 0.05;
};

// Greedy frame-to-frame association by descending IoU within a category.
// Ties break to the higher-scored detection, then the lower index. Unmatched
// detections at or above the score floor start new tracks. Track ids are
// assigned in creation order starting at 1.
std::vector<InstanceTrack> link_detections(const RawDetectionSet& raw,
                                           const TrackerConfig& cfg);

// Index of the highest per-frame score; ties go to the lowest index.
// Throws NoScoredFrames.
int select_keyframe(const InstanceTrack& track);

// From the keyframe mask, walk toward both ends of the video: adopt the best
// same-category raw candidate when its IoU to the current mask clears the
// threshold, otherwise coast by the estimated centroid velocity for up to
// max_coast_frames. Coasted frames carry no score. Frames the walk cannot
// reach keep whatever the input track had.
InstanceTrack propagate_bidirectional(const InstanceTrack& track,
                                      const RawDetectionSet& raw,
                                      const TrackerConfig& cfg);

// Per video, keep the K tracks with the highest mean score (ties to the
// lower track id). K = 0 keeps everything.
std::vector<InstanceTrack> filter_topk(const std::vector<InstanceTrack>& tracks, int k);

// Keep tracks with mean score >= tau.
std::vector<InstanceTrack> filter_pscore(const std::vector<InstanceTrack>& tracks,
                                         double tau);

struct CurationSummary {
  int linked = 0;
  int propagated = 0;
  int after_pscore = 0;
  int after_topk = 0;
};

// Full label-side pipeline: link, propagate per track, PScore, then TopK,
// assembled into a pseudo-label dataset. Output track ids are renumbered
// sequentially so reruns are byte-identical.
VideoDataset curate(const std::vector<VideoInfo>& videos,
                    const std::map<int, std::string>& categories,
                    const std::vector<RawDetectionSet>& raw_sets,
                    const TrackerConfig& tracker_cfg, const FilterConfig& filter_cfg,
                    CurationSummary* summary = nullptr, int jobs = 1);

// Raw-detections interchange JSON (videos/categories/detections).
std::vector<RawDetectionSet> parse_raw_detections(const std::string& json_text,
                                                  std::vector<VideoInfo>* videos,
                                                  std::map<int, std::string>* categories);
std::string serialize_raw_detections(const std::vector<VideoInfo>& videos,
                                     const std::map<int, std::string>& categories,
                                     const std::vector<RawDetectionSet>& raw_sets);

}  // namespace pmvis

#endif  // PMVIS_CURATION_HPP
