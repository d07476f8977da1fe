#include <cmath>

#include "doctest.h"
#include "pmvis/synth.hpp"

using namespace pmvis;

namespace {

int count_true(const CorruptionLedger& ledger) {
  int n = 0;
  for (const auto& e : ledger.entries)
    if (e.origin == DetectionOrigin::kTrue) ++n;
  return n;
}

int count_detections(const RawDetectionSet& raw) {
  int n = 0;
  for (const auto& frame : raw.frames) n += int(frame.size());
  return n;
}

}  // namespace

TEST_CASE("render: a static rect covers exactly its pixel grid") {
  SceneSpec spec;
  spec.length = 2;
  spec.width = 16;
  spec.height = 12;
  spec.objects.push_back(
      ObjectSpec{ObjectShape::kRect, 5, 4, 3, 2, 0, 0, 1, {0.5, 0.5, 0.5}});
  SceneRender scene = render_scene(spec);

  REQUIRE(scene.gt_tracks.size() == 1);
  for (int f = 0; f < 2; ++f) {
    REQUIRE(scene.gt_tracks[0].frame_masks[f].has_value());
    BinaryMask m = rle_decode(*scene.gt_tracks[0].frame_masks[f]);
    CHECK(mask_area(m) == 20);
    CHECK(mask_to_box(m) == Box{3, 2, 5, 4});
  }
  // Frames paint the object color over the background.
  REQUIRE(scene.frames.size() == 2);
  CHECK(scene.frames[0].at(0, 3, 4) == 0.5);
  CHECK(scene.frames[0].at(0, 0, 0) == 0.0);
}

TEST_CASE("render: motion shifts the centroid by the velocity") {
  SceneSpec spec;
  spec.length = 5;
  spec.width = 32;
  spec.height = 32;
  spec.objects.push_back(
      ObjectSpec{ObjectShape::kRect, 6, 6, 2, 2, 3, 1, 1, {0.5, 0.5, 0.5}});
  SceneRender scene = render_scene(spec, false);

  auto centroid = [&](int f) {
    return mask_centroid(rle_decode(*scene.gt_tracks[0].frame_masks[f]));
  };
  for (int f = 1; f < 5; ++f) {
    auto [x0, y0] = centroid(f - 1);
    auto [x1, y1] = centroid(f);
    CHECK(x1 - x0 == doctest::Approx(3.0));
    CHECK(y1 - y0 == doctest::Approx(1.0));
  }
}

TEST_CASE("render: ellipse area approximates pi*a*b") {
  SceneSpec spec;
  spec.length = 1;
  spec.width = 64;
  spec.height = 64;
  spec.objects.push_back(
      ObjectSpec{ObjectShape::kEllipse, 20, 12, 10, 10, 0, 0, 1, {0.5, 0.5, 0.5}});
  SceneRender scene = render_scene(spec, false);
  int area = mask_area(rle_decode(*scene.gt_tracks[0].frame_masks[0]));
  double expected = 3.14159265 * 10.0 * 6.0;
  CHECK(std::abs(area - expected) < 0.05 * expected);
}

TEST_CASE("render: later objects occlude earlier ones") {
  SceneSpec spec;
  spec.length = 1;
  spec.width = 16;
  spec.height = 16;
  spec.objects.push_back(
      ObjectSpec{ObjectShape::kRect, 8, 8, 2, 2, 0, 0, 1, {0.2, 0.2, 0.2}});
  spec.objects.push_back(
      ObjectSpec{ObjectShape::kRect, 8, 8, 6, 6, 0, 0, 2, {0.8, 0.8, 0.8}});
  SceneRender scene = render_scene(spec);

  BinaryMask bottom = rle_decode(*scene.gt_tracks[0].frame_masks[0]);
  BinaryMask top = rle_decode(*scene.gt_tracks[1].frame_masks[0]);
  CHECK(mask_area(top) == 64);          // on top, fully visible
  CHECK(mask_area(bottom) == 64 - 16);  // minus the 4x4 overlap
  CHECK(mask_iou(bottom, top) == 0.0);  // visible regions are disjoint
  // The frame shows the top object's color inside the overlap.
  CHECK(scene.frames[0].at(0, 7, 7) == 0.8);
}

TEST_CASE("render: a fully occluded object has no mask that frame") {
  SceneSpec spec;
  spec.length = 1;
  spec.width = 16;
  spec.height = 16;
  spec.objects.push_back(
      ObjectSpec{ObjectShape::kRect, 4, 4, 6, 6, 0, 0, 1, {0.2, 0.2, 0.2}});
  spec.objects.push_back(
      ObjectSpec{ObjectShape::kRect, 8, 8, 4, 4, 0, 0, 2, {0.8, 0.8, 0.8}});
  SceneRender scene = render_scene(spec, false);
  CHECK(!scene.gt_tracks[0].frame_masks[0].has_value());
  CHECK(scene.gt_tracks[1].frame_masks[0].has_value());
}

TEST_CASE("corrupt: zero corruption reproduces every gt object-frame") {
  SceneSpec spec;
  spec.length = 6;
  spec.width = spec.height = 32;
  spec.objects.push_back(
      ObjectSpec{ObjectShape::kRect, 8, 8, 2, 2, 2, 1, 1, {0.3, 0.3, 0.3}});
  spec.objects.push_back(
      ObjectSpec{ObjectShape::kEllipse, 10, 8, 18, 18, -1, 0, 2, {0.7, 0.7, 0.7}});
  SceneRender scene = render_scene(spec, false);

  CorruptionLedger ledger;
  RawDetectionSet raw = corrupt(scene.gt_tracks, scene.video[0], CorruptionSpec{}, 3,
                                &ledger);
  int gt_frames = 0;
  for (const auto& t : scene.gt_tracks)
    for (const auto& m : t.frame_masks) gt_frames += m.has_value();
  CHECK(count_detections(raw) == gt_frames);
  CHECK(int(ledger.entries.size()) == gt_frames);
  CHECK(count_true(ledger) == gt_frames);
  for (const auto& e : ledger.entries) {
    const Detection& d = raw.frames[e.frame][e.det_index];
    CHECK(d.mask == *scene.gt_tracks[e.source_track_id - 1].frame_masks[e.frame]);
    CHECK(d.score >= 0.0);
    CHECK(d.score <= 1.0);
  }
}

TEST_CASE("corrupt: miss rate 1 drops all true detections") {
  SceneSpec spec;
  spec.length = 4;
  spec.width = spec.height = 24;
  spec.objects.push_back(
      ObjectSpec{ObjectShape::kRect, 6, 6, 2, 2, 1, 0, 1, {0.5, 0.5, 0.5}});
  SceneRender scene = render_scene(spec, false);

  CorruptionSpec all_miss;
  all_miss.miss_rate = 1.0;
  RawDetectionSet raw = corrupt(scene.gt_tracks, scene.video[0], all_miss, 3);
  CHECK(count_detections(raw) == 0);
}

TEST_CASE("corrupt: miss rate behaves binomially over many frames") {
  SceneSpec spec;
  spec.length = 50;
  spec.width = spec.height = 24;
  spec.objects.push_back(
      ObjectSpec{ObjectShape::kRect, 6, 6, 8, 8, 0, 0, 1, {0.5, 0.5, 0.5}});
  SceneRender scene = render_scene(spec, false);

  CorruptionSpec spec_miss;
  spec_miss.miss_rate = 0.3;
  int kept = 0, total = 0;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    RawDetectionSet raw = corrupt(scene.gt_tracks, scene.video[0], spec_miss, seed);
    kept += count_detections(raw);
    total += 50;
  }
  // n = 1000 Bernoulli(0.7) draws: mean 700, sigma ~14.5; allow 4 sigma.
  CHECK(kept > 700 - 58);
  CHECK(kept < 700 + 58);
}

TEST_CASE("corrupt: integer false-positive rate injects that many tracks") {
  SceneSpec spec;
  spec.length = 8;
  spec.width = spec.height = 32;
  spec.objects.push_back(
      ObjectSpec{ObjectShape::kRect, 8, 8, 2, 2, 0, 0, 1, {0.5, 0.5, 0.5}});
  SceneRender scene = render_scene(spec, false);

  CorruptionSpec with_fp;
  with_fp.false_positive_rate = 2.0;
  CorruptionLedger ledger;
  RawDetectionSet raw = corrupt(scene.gt_tracks, scene.video[0], with_fp, 17, &ledger);

  std::set<int> spurious_ids;
  int spurious_dets = 0;
  for (const auto& e : ledger.entries) {
    if (e.origin != DetectionOrigin::kSpurious) continue;
    spurious_ids.insert(e.source_track_id);
    ++spurious_dets;
    // Spurious scores sit near the false mean, far below the true band.
    CHECK(raw.frames[e.frame][e.det_index].score < 0.5);
  }
  CHECK(spurious_ids.size() == 2);
  CHECK(spurious_dets >= 2 * (spec.length / 2));  // each spans >= half the video
  CHECK(count_true(ledger) == spec.length);
  CHECK(int(ledger.entries.size()) == count_detections(raw));
}

TEST_CASE("corrupt: jitter changes boundaries but keeps masks nonempty") {
  SceneSpec spec;
  spec.length = 10;
  spec.width = spec.height = 32;
  spec.objects.push_back(
      ObjectSpec{ObjectShape::kRect, 8, 8, 10, 10, 0, 0, 1, {0.5, 0.5, 0.5}});
  SceneRender scene = render_scene(spec, false);

  CorruptionSpec with_jitter;
  with_jitter.jitter = 1;
  RawDetectionSet raw = corrupt(scene.gt_tracks, scene.video[0], with_jitter, 29);
  bool any_changed = false;
  for (int f = 0; f < spec.length; ++f) {
    for (const auto& d : raw.frames[f]) {
      CHECK(rle_area(d.mask) > 0);
      if (d.mask != *scene.gt_tracks[0].frame_masks[f]) any_changed = true;
    }
  }
  CHECK(any_changed);
}

TEST_CASE("corrupt: same seed is reproducible, different seed is not") {
  SceneSpec spec;
  spec.length = 6;
  spec.width = spec.height = 32;
  spec.objects.push_back(
      ObjectSpec{ObjectShape::kRect, 8, 8, 4, 4, 1, 1, 1, {0.5, 0.5, 0.5}});
  SceneRender scene = render_scene(spec, false);

  CorruptionSpec c;
  c.miss_rate = 0.3;
  c.jitter = 1;
  c.false_positive_rate = 1.0;
  auto dump = [&](uint64_t seed) {
    RawDetectionSet raw = corrupt(scene.gt_tracks, scene.video[0], c, seed);
    return serialize_raw_detections(scene.video, {{1, "rect"}}, {raw});
  };
  CHECK(dump(5) == dump(5));
  CHECK(dump(5) != dump(6));
}

TEST_CASE("corpus: structure, bounds, determinism") {
  CorpusSpec spec;
  spec.seed = 12;
  spec.num_videos = 5;
  spec.length = 8;
  Corpus a = make_corpus(spec, CorruptionSpec{});
  Corpus b = make_corpus(spec, CorruptionSpec{});

  CHECK(a.ground_truth == b.ground_truth);
  REQUIRE(a.ground_truth.videos.size() == 5);
  REQUIRE(a.raw_sets.size() == 5);
  REQUIRE(a.ledgers.size() == 5);
  CHECK(int(a.ground_truth.tracks.size()) == 5 * spec.objects_per_video);

  std::set<int> track_ids;
  for (const auto& t : a.ground_truth.tracks) {
    CHECK(track_ids.insert(t.track_id).second);  // globally unique
    for (const auto& m : t.frame_masks) {
      if (!m) continue;
      CHECK(m->height == spec.height);
      CHECK(m->width == spec.width);
      CHECK(rle_area(*m) > 0);
    }
  }
  CHECK(serialize_video_dataset(a.ground_truth) ==
        serialize_video_dataset(b.ground_truth));

  Corpus other = make_corpus(CorpusSpec{99, 5, 8}, CorruptionSpec{});
  CHECK(serialize_video_dataset(other.ground_truth) !=
        serialize_video_dataset(a.ground_truth));
}
