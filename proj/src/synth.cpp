#include "pmvis/synth.hpp"

#include <algorithm>
#include <cmath>

#include "pmvis/rng.hpp"

namespace pmvis {

namespace {

BinaryMask raster_object(const ObjectSpec& obj, int frame, int height, int width) {
  const double x = obj.x + obj.vx * frame;
  const double y = obj.y + obj.vy * frame;
  BinaryMask mask(height, width);
  if (obj.shape == ObjectShape::kRect) {
    for (int r = 0; r < height; ++r) {
      if (r + 0.5 < y || r + 0.5 >= y + obj.height) continue;
      for (int c = 0; c < width; ++c)
        if (c + 0.5 >= x && c + 0.5 < x + obj.width) mask.set(r, c, 1);
    }
  } else {
    const double cx = x + obj.width / 2.0, cy = y + obj.height / 2.0;
    const double a = obj.width / 2.0, b = obj.height / 2.0;
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        double dx = (c + 0.5 - cx) / a, dy = (r + 0.5 - cy) / b;
        if (dx * dx + dy * dy <= 1.0) mask.set(r, c, 1);
      }
    }
  }
  return mask;
}

}  // namespace

SceneRender render_scene(const SceneSpec& spec, bool with_frames) {
  SceneRender out;
  VideoInfo video;
  video.id = spec.video_id;
  video.length = spec.length;
  video.width = spec.width;
  video.height = spec.height;
  for (int f = 0; f < spec.length; ++f)
    video.file_names.push_back("video" + std::to_string(spec.video_id) + "/" +
                               std::to_string(f) + ".jpg");
  out.video.push_back(video);

  out.gt_tracks.resize(spec.objects.size());
  for (size_t i = 0; i < spec.objects.size(); ++i) {
    InstanceTrack& t = out.gt_tracks[i];
    t.track_id = int(i) + 1;
    t.video_id = spec.video_id;
    t.category_id = spec.objects[i].category_id;
    t.frame_masks.assign(spec.length, std::nullopt);
    t.frame_scores.assign(spec.length, std::nullopt);
  }

  for (int f = 0; f < spec.length; ++f) {
    std::vector<BinaryMask> raw;
    raw.reserve(spec.objects.size());
    for (const auto& obj : spec.objects)
      raw.push_back(raster_object(obj, f, spec.height, spec.width));

    // Painter's order: the last listed object is on top.
    for (size_t i = 0; i < spec.objects.size(); ++i) {
      BinaryMask visible = raw[i];
      for (size_t j = i + 1; j < spec.objects.size(); ++j)
        for (size_t p = 0; p < visible.data.size(); ++p)
          if (raw[j].data[p]) visible.data[p] = 0;
      if (mask_area(visible) > 0) out.gt_tracks[i].frame_masks[f] = rle_encode(visible);
    }

    if (with_frames) {
      ColorImage img(spec.height, spec.width);
      for (int ch = 0; ch < 3; ++ch)
        std::fill(img.channels[ch].begin(), img.channels[ch].end(),
                  spec.background[ch]);
      for (size_t i = 0; i < spec.objects.size(); ++i) {
        for (size_t p = 0; p < raw[i].data.size(); ++p) {
          if (!raw[i].data[p]) continue;
          for (int ch = 0; ch < 3; ++ch)
            img.channels[ch][p] = spec.objects[i].color[ch];
        }
      }
      out.frames.push_back(std::move(img));
    }
  }
  return out;
}

RawDetectionSet corrupt(const std::vector<InstanceTrack>& gt_tracks,
                        const VideoInfo& video, const CorruptionSpec& spec,
                        uint64_t seed, CorruptionLedger* ledger) {
  SplitMix64 rng(seed);
  RawDetectionSet out;
  out.video_id = video.id;
  out.width = video.width;
  out.height = video.height;
  out.frames.resize(video.length);
  out.provenance = "synth-corrupt";
  CorruptionLedger led;

  auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };

  for (const auto& gt : gt_tracks) {
    double base = clamp01(rng.next_normal(spec.true_score_mean, spec.score_spread));
    for (int f = 0; f < video.length; ++f) {
      if (!gt.frame_masks[f]) continue;
      bool miss = rng.next_bernoulli(spec.miss_rate);
      double score = clamp01(rng.next_normal(base, spec.frame_score_noise));
      int jitter_amount =
          spec.jitter > 0 ? 1 + int(rng.next_below(uint64_t(spec.jitter))) : 0;
      bool grow = rng.next_bernoulli(0.5);
      if (miss) continue;

      BinaryMask mask = rle_decode(*gt.frame_masks[f]);
      if (jitter_amount > 0) {
        BinaryMask jittered = grow ? dilate_mask(mask, jitter_amount)
                                   : erode_mask(mask, jitter_amount);
        if (mask_area(jittered) > 0) mask = std::move(jittered);
      }
      led.entries.push_back({f, int(out.frames[f].size()), DetectionOrigin::kTrue,
                             gt.track_id});
      out.frames[f].push_back({gt.category_id, score, rle_encode(mask)});
    }
  }

  // Spurious random-walk tracks.
  std::vector<int> categories;
  for (const auto& gt : gt_tracks)
    if (std::find(categories.begin(), categories.end(), gt.category_id) ==
        categories.end())
      categories.push_back(gt.category_id);
  if (categories.empty()) categories.push_back(1);

  int n_false = int(std::floor(spec.false_positive_rate));
  double frac = spec.false_positive_rate - n_false;
  if (rng.next_bernoulli(frac)) ++n_false;

  for (int s = 0; s < n_false; ++s) {
    int synthetic_id = 100000 + s;
    int category = categories[rng.next_below(categories.size())];
    double size = rng.next_range(4.0, 8.0);
    double x = rng.next_range(0.0, std::max(1.0, video.width - size));
    double y = rng.next_range(0.0, std::max(1.0, video.height - size));
    int start = int(rng.next_below(uint64_t(std::max(1, video.length / 2))));
    int duration = video.length / 2 + int(rng.next_below(uint64_t(
                       std::max(1, video.length - video.length / 2))));
    double base = clamp01(rng.next_normal(spec.false_score_mean, spec.score_spread));
    for (int f = start; f < std::min(video.length, start + duration); ++f) {
      ObjectSpec obj;
      obj.shape = ObjectShape::kRect;
      obj.width = size;
      obj.height = size;
      obj.x = x;
      obj.y = y;
      obj.category_id = category;
      BinaryMask mask = raster_object(obj, 0, video.height, video.width);
      double score = clamp01(rng.next_normal(base, spec.frame_score_noise));
      x = std::clamp(x + rng.next_range(-1.0, 1.0), 0.0, double(video.width) - size);
      y = std::clamp(y + rng.next_range(-1.0, 1.0), 0.0, double(video.height) - size);
      if (mask_area(mask) == 0) continue;
      led.entries.push_back({f, int(out.frames[f].size()),
                             DetectionOrigin::kSpurious, synthetic_id});
      out.frames[f].push_back({category, score, rle_encode(mask)});
    }
  }

  if (ledger) *ledger = std::move(led);
  return out;
}

Corpus make_corpus(const CorpusSpec& corpus_spec, const CorruptionSpec& corruption) {
  Corpus corpus;
  for (size_t i = 0; i < corpus_spec.category_ids.size(); ++i) {
    std::string name = i < corpus_spec.category_names.size()
                           ? corpus_spec.category_names[i]
                           : "category" + std::to_string(corpus_spec.category_ids[i]);
    corpus.ground_truth.categories[corpus_spec.category_ids[i]] = name;
  }

  int next_track_id = 1;
  for (int v = 1; v <= corpus_spec.num_videos; ++v) {
    SplitMix64 rng(SplitMix64::mix(corpus_spec.seed, uint64_t(v)));
    SceneSpec scene;
    scene.video_id = v;
    scene.length = corpus_spec.length;
    scene.width = corpus_spec.width;
    scene.height = corpus_spec.height;
    for (int o = 0; o < corpus_spec.objects_per_video; ++o) {
      ObjectSpec obj;
      obj.shape = rng.next_bernoulli(0.5) ? ObjectShape::kRect : ObjectShape::kEllipse;
      obj.width = rng.next_range(corpus_spec.min_size, corpus_spec.max_size);
      obj.height = rng.next_range(corpus_spec.min_size, corpus_spec.max_size);
      obj.vx = rng.next_range(-corpus_spec.max_speed, corpus_spec.max_speed);
      obj.vy = rng.next_range(-corpus_spec.max_speed, corpus_spec.max_speed);
      // Start positions keeping the whole trajectory inside the frame.
      auto place = [&](double extent, double vel, double frame_size) {
        double lo = std::max(0.0, -vel * (corpus_spec.length - 1));
        double hi = std::min(frame_size - extent,
                             frame_size - extent - vel * (corpus_spec.length - 1));
        if (hi < lo) return lo;
        return rng.next_range(lo, hi);
      };
      obj.x = place(obj.width, obj.vx, corpus_spec.width);
      obj.y = place(obj.height, obj.vy, corpus_spec.height);
      obj.category_id =
          corpus_spec.category_ids[rng.next_below(corpus_spec.category_ids.size())];
      for (auto& ch : obj.color) ch = rng.next_range(0.0, 1.0);
      scene.objects.push_back(obj);
    }

    SceneRender render = render_scene(scene, /*with_frames=*/false);
    corpus.ground_truth.videos.push_back(render.video[0]);
    for (auto& t : render.gt_tracks) {
      t.track_id = next_track_id++;
      corpus.ground_truth.tracks.push_back(std::move(t));
    }

    std::vector<InstanceTrack> video_tracks;
    for (const auto& t : corpus.ground_truth.tracks)
      if (t.video_id == v) video_tracks.push_back(t);
    CorruptionLedger ledger;
    corpus.raw_sets.push_back(corrupt(video_tracks, render.video[0], corruption,
                                      SplitMix64::mix(corpus_spec.seed, uint64_t(v) + 0x10000),
                                      &ledger));
    corpus.ledgers.push_back(std::move(ledger));
  }
  return corpus;
}

}  // namespace pmvis
