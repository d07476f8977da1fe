#include "pmvis/curation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <unordered_map>

#include "json.hpp"
#include "pmvis/errors.hpp"

namespace pmvis {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

struct WorkingTrack {
  InstanceTrack track;
  BinaryMask last_mask;
  int last_frame = -1;
};

}  // namespace

std::vector<InstanceTrack> link_detections(const RawDetectionSet& raw,
                                           const TrackerConfig& cfg) {
  const int num_frames = int(raw.frames.size());
  std::vector<WorkingTrack> working;

  for (int t = 0; t < num_frames; ++t) {
    const auto& dets = raw.frames[t];
    std::vector<BinaryMask> det_masks;
    det_masks.reserve(dets.size());
    for (const auto& d : dets) det_masks.push_back(rle_decode(d.mask));

    struct Pair {
      double iou;
      double score;
      int det;
      int track;
    };
    std::vector<Pair> pairs;
    for (size_t wi = 0; wi < working.size(); ++wi) {
      const auto& w = working[wi];
      if (t - w.last_frame > cfg.max_coast_frames + 1) continue;
      for (size_t di = 0; di < dets.size(); ++di) {
        if (dets[di].category_id != w.track.category_id) continue;
        double iou = mask_iou(w.last_mask, det_masks[di]);
        if (iou >= cfg.iou_match_threshold)
          pairs.push_back({iou, dets[di].score, int(di), int(wi)});
      }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
      if (a.iou != b.iou) return a.iou > b.iou;
      if (a.score != b.score) return a.score > b.score;
      if (a.det != b.det) return a.det < b.det;
      return a.track < b.track;
    });

    std::vector<bool> det_used(dets.size(), false), track_used(working.size(), false);
    for (const auto& p : pairs) {
      if (det_used[p.det] || track_used[p.track]) continue;
      det_used[p.det] = true;
      track_used[p.track] = true;
      WorkingTrack& w = working[p.track];
      w.track.frame_masks[t] = dets[p.det].mask;
      w.track.frame_scores[t] = dets[p.det].score;
      w.last_mask = det_masks[p.det];
      w.last_frame = t;
    }
    for (size_t di = 0; di < dets.size(); ++di) {
      if (det_used[di] || dets[di].score < cfg.new_track_score_floor) continue;
      WorkingTrack w;
      w.track.track_id = int(working.size()) + 1;
      w.track.video_id = raw.video_id;
      w.track.category_id = dets[di].category_id;
      w.track.frame_masks.assign(num_frames, std::nullopt);
      w.track.frame_scores.assign(num_frames, std::nullopt);
      w.track.frame_masks[t] = dets[di].mask;
      w.track.frame_scores[t] = dets[di].score;
      w.last_mask = det_masks[di];
      w.last_frame = t;
      working.push_back(std::move(w));
    }
  }

  std::vector<InstanceTrack> out;
  out.reserve(working.size());
  for (auto& w : working) out.push_back(std::move(w.track));
  return out;
}

int select_keyframe(const InstanceTrack& track) {
  int best = -1;
  double best_score = -1.0;
  for (size_t f = 0; f < track.frame_scores.size(); ++f) {
    if (track.frame_scores[f] && *track.frame_scores[f] > best_score) {
      best_score = *track.frame_scores[f];
      best = int(f);
    }
  }
  if (best < 0) throw NoScoredFrames("track has no scored frame");
  return best;
}

InstanceTrack propagate_bidirectional(const InstanceTrack& track,
                                      const RawDetectionSet& raw,
                                      const TrackerConfig& cfg) {
  const int keyframe = select_keyframe(track);
  if (!track.frame_masks[keyframe])
    throw MissingKeyframeMask("keyframe " + std::to_string(keyframe) +
                              " has no mask");
  const int num_frames = int(track.frame_masks.size());

  InstanceTrack out = track;
  const BinaryMask key_mask = rle_decode(*track.frame_masks[keyframe]);

  for (int dir : {-1, +1}) {
    BinaryMask cur = key_mask;
    BinaryMask last_adopted = key_mask;
    int last_adopted_frame = keyframe;
    double vx = 0.0, vy = 0.0;       // per-step centroid velocity in walk direction
    double ox = 0.0, oy = 0.0;       // accumulated coast offset from last adoption
    bool have_velocity = false;
    int coast = 0;

    for (int f = keyframe + dir; f >= 0 && f < num_frames; f += dir) {
      int best_det = -1;
      double best_iou = -1.0;
      const auto& dets = raw.frames[f];
      for (size_t di = 0; di < dets.size(); ++di) {
        if (dets[di].category_id != track.category_id) continue;
        double iou = mask_iou(cur, rle_decode(dets[di].mask));
        if (iou > best_iou) {
          best_iou = iou;
          best_det = int(di);
        }
      }
      if (best_det >= 0 && best_iou >= cfg.iou_match_threshold) {
        BinaryMask adopted = rle_decode(dets[best_det].mask);
        if (cfg.motion_model == MotionModel::kConstantVelocityCentroid) {
          auto [cx, cy] = mask_centroid(adopted);
          auto [px, py] = mask_centroid(last_adopted);
          int steps = std::abs(f - last_adopted_frame);
          vx = (cx - px) / steps;
          vy = (cy - py) / steps;
          have_velocity = true;
        }
        cur = adopted;
        last_adopted = std::move(adopted);
        last_adopted_frame = f;
        ox = oy = 0.0;
        coast = 0;
        out.frame_masks[f] = dets[best_det].mask;
        if (!out.frame_scores[f]) out.frame_scores[f] = dets[best_det].score;
      } else if (coast < cfg.max_coast_frames) {
        ++coast;
        if (have_velocity) {
          ox += vx;
          oy += vy;
        }
        cur = translate_mask(last_adopted, int(std::lround(ox)),
                             int(std::lround(oy)));
        if (!out.frame_masks[f]) {
          out.frame_masks[f] = rle_encode(cur);
          // synthesized frame: no model score behind it
        }
      } else {
        break;  // coast budget exhausted; remaining frames keep the input
      }
    }
  }
  return out;
}

std::vector<InstanceTrack> filter_topk(const std::vector<InstanceTrack>& tracks,
                                       int k) {
  if (k <= 0) return tracks;
  std::map<int, std::vector<std::pair<double, int>>> per_video;  // (-score, id)
  for (const auto& t : tracks)
    per_video[t.video_id].push_back({-t.mean_score(), t.track_id});

  std::map<int, std::vector<int>> keep_ids;
  for (auto& [vid, entries] : per_video) {
    std::sort(entries.begin(), entries.end());
    for (size_t i = 0; i < entries.size() && int(i) < k; ++i)
      keep_ids[vid].push_back(entries[i].second);
  }

  std::vector<InstanceTrack> out;
  for (const auto& t : tracks) {
    const auto& ids = keep_ids[t.video_id];
    if (std::find(ids.begin(), ids.end(), t.track_id) != ids.end()) out.push_back(t);
  }
  return out;
}

std::vector<InstanceTrack> filter_pscore(const std::vector<InstanceTrack>& tracks,
                                         double tau) {
  std::vector<InstanceTrack> out;
  for (const auto& t : tracks)
    if (t.mean_score() >= tau) out.push_back(t);
  return out;
}

VideoDataset curate(const std::vector<VideoInfo>& videos,
                    const std::map<int, std::string>& categories,
                    const std::vector<RawDetectionSet>& raw_sets,
                    const TrackerConfig& tracker_cfg, const FilterConfig& filter_cfg,
                    CurationSummary* summary, int jobs) {
  CurationSummary sum;

  auto process_video = [&](const RawDetectionSet& raw) {
    std::vector<InstanceTrack> tracks = link_detections(raw, tracker_cfg);
    std::vector<InstanceTrack> propagated;
    propagated.reserve(tracks.size());
    for (const auto& t : tracks) propagated.push_back(propagate_bidirectional(t, raw, tracker_cfg));
    auto scored = filter_pscore(propagated, filter_cfg.score_threshold);
    auto kept = filter_topk(scored, filter_cfg.top_k);
    return std::tuple<size_t, size_t, size_t, std::vector<InstanceTrack>>(
        tracks.size(), propagated.size(), scored.size(), std::move(kept));
  };

  std::vector<std::tuple<size_t, size_t, size_t, std::vector<InstanceTrack>>> results(
      raw_sets.size());
  if (jobs > 1) {
    std::vector<std::future<void>> futures;
    std::atomic<size_t> next{0};
    for (int j = 0; j < jobs; ++j) {
      futures.push_back(std::async(std::launch::async, [&]() {
        for (size_t i = next.fetch_add(1); i < raw_sets.size(); i = next.fetch_add(1))
          results[i] = process_video(raw_sets[i]);
      }));
    }
    for (auto& f : futures) f.get();
  } else {
    for (size_t i = 0; i < raw_sets.size(); ++i) results[i] = process_video(raw_sets[i]);
  }

  VideoDataset out;
  out.videos = videos;
  out.categories = categories;
  int next_id = 1;
  for (auto& [linked, propagated, scored, kept] : results) {
    sum.linked += int(linked);
    sum.propagated += int(propagated);
    sum.after_pscore += int(scored);
    sum.after_topk += int(kept.size());
    for (auto& t : kept) {
      t.track_id = next_id++;
      out.tracks.push_back(std::move(t));
    }
  }
  if (summary) *summary = sum;
  return out;
}

std::vector<RawDetectionSet> parse_raw_detections(
    const std::string& json_text, std::vector<VideoInfo>* videos,
    std::map<int, std::string>* categories) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.contains("videos") || !doc.contains("categories") ||
      !doc.contains("detections"))
    throw SchemaError("$: raw detections need videos, categories, detections");

  std::vector<VideoInfo> vids;
  std::unordered_map<int, size_t> by_id;
  for (size_t i = 0; i < doc["videos"].size(); ++i) {
    const auto& jv = doc["videos"][i];
    VideoInfo v;
    v.id = jv.at("id").get<int>();
    v.width = jv.at("width").get<int>();
    v.height = jv.at("height").get<int>();
    v.length = jv.at("length").get<int>();
    if (jv.contains("file_names"))
      v.file_names = jv["file_names"].get<std::vector<std::string>>();
    by_id[v.id] = i;
    vids.push_back(std::move(v));
  }
  std::map<int, std::string> cats;
  for (const auto& jc : doc["categories"])
    cats[jc.at("id").get<int>()] = jc.at("name").get<std::string>();

  std::vector<RawDetectionSet> sets(vids.size());
  for (size_t i = 0; i < vids.size(); ++i) {
    sets[i].video_id = vids[i].id;
    sets[i].width = vids[i].width;
    sets[i].height = vids[i].height;
    sets[i].frames.resize(vids[i].length);
  }
  for (size_t i = 0; i < doc["detections"].size(); ++i) {
    const auto& jd = doc["detections"][i];
    std::string path = "detections[" + std::to_string(i) + "]";
    int video_id = jd.at("video_id").get<int>();
    auto it = by_id.find(video_id);
    if (it == by_id.end())
      throw DanglingReference(path + ".video_id: unknown video " +
                              std::to_string(video_id));
    RawDetectionSet& set = sets[it->second];
    int frame = jd.at("frame").get<int>();
    if (frame < 0 || frame >= int(set.frames.size()))
      throw SchemaError(path + ".frame: out of range");
    Detection d;
    d.category_id = jd.at("category_id").get<int>();
    if (!cats.count(d.category_id))
      throw DanglingReference(path + ".category_id: unknown category " +
                              std::to_string(d.category_id));
    d.score = jd.at("score").get<double>();
    const auto& seg = jd.at("segmentation");
    d.mask = RleMask{seg.at("size")[0].get<int>(), seg.at("size")[1].get<int>(),
                     seg.at("counts").get<std::string>()};
    set.frames[frame].push_back(std::move(d));
  }
  if (videos) *videos = std::move(vids);
  if (categories) *categories = std::move(cats);
  return sets;
}

std::string serialize_raw_detections(const std::vector<VideoInfo>& videos,
                                     const std::map<int, std::string>& categories,
                                     const std::vector<RawDetectionSet>& raw_sets) {
  ordered_json doc;
  doc["videos"] = ordered_json::array();
  for (const auto& v : videos) {
    ordered_json jv;
    jv["id"] = v.id;
    jv["width"] = v.width;
    jv["height"] = v.height;
    jv["length"] = v.length;
    jv["file_names"] = v.file_names;
    doc["videos"].push_back(std::move(jv));
  }
  doc["categories"] = ordered_json::array();
  for (const auto& [id, name] : categories)
    doc["categories"].push_back(ordered_json{{"id", id}, {"name", name}});
  doc["detections"] = ordered_json::array();
  for (const auto& set : raw_sets) {
    for (size_t f = 0; f < set.frames.size(); ++f) {
      for (const auto& d : set.frames[f]) {
        ordered_json jd;
        jd["video_id"] = set.video_id;
        jd["frame"] = int(f);
        jd["category_id"] = d.category_id;
        jd["score"] = d.score;
        jd["segmentation"] = ordered_json{{"size", {d.mask.height, d.mask.width}},
                                          {"counts", d.mask.counts}};
        doc["detections"].push_back(std::move(jd));
      }
    }
  }
  return doc.dump(1);
}

}  // namespace pmvis
