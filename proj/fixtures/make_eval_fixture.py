#!/usr/bin/env python3
"""Builds the small hand-verified evaluation fixture (2 videos, 3 gt tracks).

The expected report in eval_golden_report.json was computed by hand from the
geometry below:
  - category 1: both gt tracks matched exactly, one trailing low-score false
    positive -> AP 1.0 at every threshold.
  - category 2: prediction shifted one column, per-frame IoU 16/24 = 2/3,
    matched at thresholds 0.50-0.65 only -> AP 0.4 averaged over thresholds.
  - overall AP (1.0 + 0.4) / 2 = 70.0%; AP50 100.0, AP75 50.0, AR1 = AR10 = 70.0.
"""
import json

from make_rle_golden import encode_counts

H, W = 8, 8


def rect(r0, r1, c0, c1):
    # inclusive pixel ranges
    pixels = [0] * (H * W)
    for r in range(r0, r1 + 1):
        for c in range(c0, c1 + 1):
            pixels[r * W + c] = 1
    return {"size": [H, W], "counts": encode_counts(pixels, H, W)}


def video(vid):
    return {
        "id": vid,
        "width": W,
        "height": H,
        "length": 2,
        "file_names": [f"v{vid}/0.jpg", f"v{vid}/1.jpg"],
    }


def track(tid, vid, cat, mask, scores=None):
    t = {
        "id": tid,
        "video_id": vid,
        "category_id": cat,
        "segmentations": [mask, mask],
    }
    if scores is not None:
        t["scores"] = scores
    return t


def main():
    categories = [{"id": 1, "name": "boxy"}, {"id": 2, "name": "wide"}]
    gt = {
        "videos": [video(1), video(2)],
        "categories": categories,
        "annotations": [
            track(1, 1, 1, rect(0, 3, 0, 3)),
            track(2, 1, 2, rect(0, 3, 0, 4)),
            track(3, 2, 1, rect(4, 7, 0, 3)),
        ],
    }
    preds = {
        "videos": [video(1), video(2)],
        "categories": categories,
        "annotations": [
            track(1, 1, 1, rect(0, 3, 0, 3), [0.9, 0.9]),
            track(2, 1, 2, rect(0, 3, 1, 5), [0.7, 0.7]),  # one-column jitter
            track(3, 2, 1, rect(0, 1, 6, 7), [0.5, 0.5]),  # false positive
            track(4, 2, 1, rect(4, 7, 0, 3), [0.8, 0.8]),
        ],
    }
    with open("eval_scene_gt.json", "w") as f:
        json.dump(gt, f, indent=1)
    with open("eval_scene_preds.json", "w") as f:
        json.dump(preds, f, indent=1)
    print("wrote eval_scene_gt.json, eval_scene_preds.json")


if __name__ == "__main__":
    main()
