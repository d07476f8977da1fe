#!/usr/bin/env python3
"""Reference run-length encoder used to produce rle_golden.json.

Independent of the C++ implementation: column-major runs starting with the
zero count, char-packed 6 bits per character with ascii offset 48 and
sign-folded deltas against the count two places back.
"""
import json
import random


def encode_counts(pixels, h, w):
    # pixels: row-major list of 0/1
    runs = []
    cur = 0
    length = 0
    for c in range(w):
        for r in range(h):
            v = pixels[r * w + c]
            if v == cur:
                length += 1
            else:
                runs.append(length)
                cur = v
                length = 1
    runs.append(length)
    if h * w == 0:
        runs = [0]

    s = []
    for i, run in enumerate(runs):
        x = run
        if i > 2:
            x -= runs[i - 2]
        more = True
        while more:
            c = x & 0x1F
            x >>= 5
            more = (x != -1) if (c & 0x10) else (x != 0)
            if more:
                c |= 0x20
            s.append(chr(c + 48))
    return "".join(s)


def entry(pixels, h, w):
    return {
        "size": [h, w],
        "counts": encode_counts(pixels, h, w),
        "pixels": "".join(str(p) for p in pixels),
    }


def main():
    rng = random.Random(20240817)
    entries = []

    entries.append(entry([0], 1, 1))
    entries.append(entry([1], 1, 1))
    entries.append(entry([1, 1, 1, 1], 2, 2))
    entries.append(entry([0, 0, 0, 0], 2, 2))
    entries.append(entry([0, 1, 1, 0], 2, 2))
    entries.append(entry([1, 0, 0, 1], 2, 2))
    # single pixel in a larger frame (forces a multi-char count)
    big = [0] * (13 * 17)
    big[5 * 17 + 9] = 1
    entries.append(entry(big, 13, 17))
    # full larger frame
    entries.append(entry([1] * (13 * 17), 13, 17))

    for h, w in [(3, 3), (5, 4), (7, 13), (13, 7), (32, 32), (64, 64), (61, 47)]:
        for density in (0.1, 0.5, 0.9):
            pixels = [1 if rng.random() < density else 0 for _ in range(h * w)]
            entries.append(entry(pixels, h, w))

    with open("rle_golden.json", "w") as f:
        json.dump(entries, f, indent=1)
    print(f"wrote {len(entries)} golden entries")


if __name__ == "__main__":
    main()
