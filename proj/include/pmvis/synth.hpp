#ifndef PMVIS_SYNTH_HPP
#define PMVIS_SYNTH_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pmvis/curation.hpp"
#include "pmvis/dataset.hpp"
#include "pmvis/losses.hpp"

namespace pmvis {

enum class ObjectShape { kRect, kEllipse };

struct ObjectSpec {
  ObjectShape shape = ObjectShape::kRect;
  double width = 8.0;
  double height = 8.0;
  double x = 0.0;  // top-left at frame 0
  double y = 0.0;
  double vx = 0.0;  // pixels per frame
  double vy = 0.0;
  int category_id = 1;
  std::array<double, 3> color = {0.5, 0.5, 0.5};
};

// One deterministic scene: moving shapes over a flat background. Later
// objects occlude earlier ones (painter's order); ground-truth masks are the
// visible pixels.
struct SceneSpec {
  int video_id = 1;
  int length = 10;
  int width = 64;
  int height = 64;
  std::vector<ObjectSpec> objects;
  std::array<double, 3> background = {0.0, 0.0, 0.0};
};

struct SceneRender {
  std::vector<VideoInfo> video;          // single entry
  std::vector<InstanceTrack> gt_tracks;  // one per object, in object order
  std::vector<ColorImage> frames;        // empty unless requested
};

SceneRender render_scene(const SceneSpec& spec, bool with_frames = true);

// The three pseudo-label error types: missed object-frames, spurious
// random-walk tracks, and boundary jitter; plus a per-track score model.
struct CorruptionSpec {
  double miss_rate = 0.0;            // per object-frame
  double false_positive_rate = 0.0;  // expected spurious tracks per video
  int jitter = 0;                    // erosion/dilation magnitude in pixels
  double true_score_mean = 0.8;
  double false_score_mean = 0.1;
  double score_spread = 0.05;        // stddev of the per-track base score
  double frame_score_noise = 0.02;   // stddev of per-frame noise around the base
};

enum class DetectionOrigin { kTrue, kSpurious };

struct LedgerEntry {
  int frame = 0;
  int det_index = 0;  // within that frame's detection list
  DetectionOrigin origin = DetectionOrigin::kTrue;
  int source_track_id = 0;  // gt track for true detections, synthetic id otherwise
};

// Partition of every emitted detection into {true-derived, spurious}.
struct CorruptionLedger {
  std::vector<LedgerEntry> entries;
};

RawDetectionSet corrupt(const std::vector<InstanceTrack>& gt_tracks,
                        const VideoInfo& video, const CorruptionSpec& spec,
                        uint64_t seed, CorruptionLedger* ledger = nullptr);

// Corpus of randomized scenes, one seed-derived stream per video.
struct CorpusSpec {
  uint64_t seed = 1;
  int num_videos = 4;
  int length = 10;
  int width = 64;
  int height = 64;
  int objects_per_video = 3;
  std::vector<int> category_ids = {1, 2, 3};
  std::vector<std::string> category_names = {"rect", "disk", "blob"};
  double min_size = 8.0;
  double max_size = 16.0;
  double max_speed = 2.0;
};

struct Corpus {
  VideoDataset ground_truth;
  std::vector<RawDetectionSet> raw_sets;
  std::vector<CorruptionLedger> ledgers;  // parallel to raw_sets
};

Corpus make_corpus(const CorpusSpec& corpus_spec, const CorruptionSpec& corruption);

}  // namespace pmvis

#endif  // PMVIS_SYNTH_HPP
