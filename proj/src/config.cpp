#include "pmvis/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pmvis/errors.hpp"

namespace pmvis {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

template <typename T>
void maybe(const json& obj, const char* key, T* out) {
  if (obj.contains(key)) *out = obj.at(key).get<T>();
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid config JSON: ") + e.what());
  }
  PipelineConfig cfg;
  maybe(doc, "seed", &cfg.seed);
  maybe(doc, "jobs", &cfg.jobs);
  if (doc.contains("paths")) {
    const json& p = doc["paths"];
    maybe(p, "raw", &cfg.raw_path);
    maybe(p, "ground_truth", &cfg.ground_truth_path);
    maybe(p, "out", &cfg.out_path);
  }
  if (doc.contains("filter")) {
    const json& f = doc["filter"];
    maybe(f, "top_k", &cfg.filter.top_k);
    maybe(f, "score_threshold", &cfg.filter.score_threshold);
  }
  if (doc.contains("tracker")) {
    const json& t = doc["tracker"];
    maybe(t, "iou_match_threshold", &cfg.tracker.iou_match_threshold);
    maybe(t, "max_coast_frames", &cfg.tracker.max_coast_frames);
    maybe(t, "new_track_score_floor", &cfg.tracker.new_track_score_floor);
    if (t.contains("motion_model")) {
      std::string m = t["motion_model"].get<std::string>();
      if (m == "none")
        cfg.tracker.motion_model = MotionModel::kNone;
      else if (m == "constant-velocity-centroid")
        cfg.tracker.motion_model = MotionModel::kConstantVelocityCentroid;
      else
        throw SchemaError("tracker.motion_model: unknown value '" + m + "'");
    }
  }
  if (doc.contains("eval")) {
    const json& e = doc["eval"];
    maybe(e, "iou_thresholds", &cfg.eval.iou_thresholds);
    maybe(e, "max_dets_for_ar", &cfg.eval.max_dets_for_ar);
    maybe(e, "recall_points", &cfg.eval.recall_points);
    for (size_t i = 1; i < cfg.eval.iou_thresholds.size(); ++i)
      if (cfg.eval.iou_thresholds[i] <= cfg.eval.iou_thresholds[i - 1])
        throw SchemaError("eval.iou_thresholds must be strictly increasing");
  }
  if (doc.contains("loss")) {
    const json& l = doc["loss"];
    maybe(l, "dice_epsilon", &cfg.loss.dice_epsilon);
    maybe(l, "focal_alpha", &cfg.loss.focal_alpha);
    maybe(l, "focal_gamma", &cfg.loss.focal_gamma);
    maybe(l, "prob_clamp", &cfg.loss.prob_clamp);
    maybe(l, "pairwise_theta", &cfg.loss.pairwise_theta);
    maybe(l, "pairwise_threshold", &cfg.loss.pairwise_threshold);
    maybe(l, "pairwise_dilation", &cfg.loss.pairwise_dilation);
  }
  if (doc.contains("corpus")) {
    const json& c = doc["corpus"];
    maybe(c, "seed", &cfg.corpus.seed);
    maybe(c, "num_videos", &cfg.corpus.num_videos);
    maybe(c, "length", &cfg.corpus.length);
    maybe(c, "width", &cfg.corpus.width);
    maybe(c, "height", &cfg.corpus.height);
    maybe(c, "objects_per_video", &cfg.corpus.objects_per_video);
    maybe(c, "category_ids", &cfg.corpus.category_ids);
    maybe(c, "category_names", &cfg.corpus.category_names);
    maybe(c, "min_size", &cfg.corpus.min_size);
    maybe(c, "max_size", &cfg.corpus.max_size);
    maybe(c, "max_speed", &cfg.corpus.max_speed);
  }
  if (doc.contains("corruption")) {
    const json& c = doc["corruption"];
    maybe(c, "miss_rate", &cfg.corruption.miss_rate);
    maybe(c, "false_positive_rate", &cfg.corruption.false_positive_rate);
    maybe(c, "jitter", &cfg.corruption.jitter);
    maybe(c, "true_score_mean", &cfg.corruption.true_score_mean);
    maybe(c, "false_score_mean", &cfg.corruption.false_score_mean);
    maybe(c, "score_spread", &cfg.corruption.score_spread);
    maybe(c, "frame_score_noise", &cfg.corruption.frame_score_noise);
  }
  return cfg;
}

std::string serialize_config(const PipelineConfig& cfg) {
  ordered_json doc;
  doc["seed"] = cfg.seed;
  doc["jobs"] = cfg.jobs;
  doc["paths"] = ordered_json{{"raw", cfg.raw_path},
                              {"ground_truth", cfg.ground_truth_path},
                              {"out", cfg.out_path}};
  doc["filter"] = ordered_json{{"top_k", cfg.filter.top_k},
                               {"score_threshold", cfg.filter.score_threshold}};
  doc["tracker"] = ordered_json{
      {"iou_match_threshold", cfg.tracker.iou_match_threshold},
      {"max_coast_frames", cfg.tracker.max_coast_frames},
      {"motion_model", cfg.tracker.motion_model == MotionModel::kNone
                           ? "none"
                           : "constant-velocity-centroid"},
      {"new_track_score_floor", cfg.tracker.new_track_score_floor}};
  doc["eval"] = ordered_json{{"iou_thresholds", cfg.eval.iou_thresholds},
                             {"max_dets_for_ar", cfg.eval.max_dets_for_ar},
                             {"recall_points", cfg.eval.recall_points}};
  doc["loss"] = ordered_json{{"dice_epsilon", cfg.loss.dice_epsilon},
                             {"focal_alpha", cfg.loss.focal_alpha},
                             {"focal_gamma", cfg.loss.focal_gamma},
                             {"prob_clamp", cfg.loss.prob_clamp},
                             {"pairwise_theta", cfg.loss.pairwise_theta},
                             {"pairwise_threshold", cfg.loss.pairwise_threshold},
                             {"pairwise_dilation", cfg.loss.pairwise_dilation}};
  doc["corpus"] = ordered_json{{"seed", cfg.corpus.seed},
                               {"num_videos", cfg.corpus.num_videos},
                               {"length", cfg.corpus.length},
                               {"width", cfg.corpus.width},
                               {"height", cfg.corpus.height},
                               {"objects_per_video", cfg.corpus.objects_per_video},
                               {"category_ids", cfg.corpus.category_ids},
                               {"category_names", cfg.corpus.category_names},
                               {"min_size", cfg.corpus.min_size},
                               {"max_size", cfg.corpus.max_size},
                               {"max_speed", cfg.corpus.max_speed}};
  doc["corruption"] =
      ordered_json{{"miss_rate", cfg.corruption.miss_rate},
                   {"false_positive_rate", cfg.corruption.false_positive_rate},
                   {"jitter", cfg.corruption.jitter},
                   {"true_score_mean", cfg.corruption.true_score_mean},
                   {"false_score_mean", cfg.corruption.false_score_mean},
                   {"score_spread", cfg.corruption.score_spread},
                   {"frame_score_noise", cfg.corruption.frame_score_noise}};
  return doc.dump(1);
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace pmvis
