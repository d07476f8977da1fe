#include "pmvis/mask.hpp"

#include <algorithm>
#include <cmath>

#include "pmvis/errors.hpp"

namespace pmvis {

namespace {

// Char-packed counts string: LEB128-like, 6 bits per char, ascii offset 48,
// counts beyond the second stored as deltas against the count two back.
std::string pack_counts(const std::vector<uint32_t>& runs) {
  std::string s;
  s.reserve(runs.size() * 2);
  for (size_t i = 0; i < runs.size(); ++i) {
    int64_t x = int64_t(runs[i]);
    if (i > 2) x -= int64_t(runs[i - 2]);
    bool more = true;
    while (more) {
      char c = char(x & 0x1f);
      x >>= 5;
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      s.push_back(char(c + 48));
    }
  }
  return s;
}

std::vector<uint32_t> unpack_counts(const std::string& s) {
  std::vector<uint32_t> runs;
  size_t p = 0;
  while (p < s.size()) {
    int64_t x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= s.size()) throw MalformedRle("dangling 6-bit group");
      int64_t c = int64_t(s[p]) - 48;
      if (c < 0 || c > 63) throw MalformedRle("character out of range");
      x |= (c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= int64_t(-1) << (5 * k);
    }
    if (runs.size() > 2) x += int64_t(runs[runs.size() - 2]);
    if (x < 0) throw MalformedRle("negative run count");
    runs.push_back(uint32_t(x));
  }
  return runs;
}

}  // namespace

RleMask rle_encode(const BinaryMask& mask) {
  std::vector<uint32_t> runs;
  uint8_t cur = 0;  // runs always start with zeros
  uint32_t len = 0;
  for (int c = 0; c < mask.width; ++c) {
    for (int r = 0; r < mask.height; ++r) {
      uint8_t v = mask.at(r, c);
      if (v == cur) {
        ++len;
      } else {
        runs.push_back(len);
        cur = v;
        len = 1;
      }
    }
  }
  runs.push_back(len);
  if (mask.height == 0 || mask.width == 0) runs.assign(1, 0);
  return RleMask{mask.height, mask.width, pack_counts(runs)};
}

BinaryMask rle_decode(const RleMask& rle) {
  const std::vector<uint32_t> runs = unpack_counts(rle.counts);
  const int64_t total = int64_t(rle.height) * rle.width;
  BinaryMask mask(rle.height, rle.width);
  int64_t pos = 0;
  uint8_t cur = 0;
  for (uint32_t run : runs) {
    if (pos + run > total) throw MalformedRle("runs overflow height * width");
    if (cur) {
      for (uint32_t i = 0; i < run; ++i) {
        int64_t p = pos + i;
        mask.set(int(p % rle.height), int(p / rle.height), 1);
      }
    }
    pos += run;
    cur ^= 1;
  }
  if (pos != total) throw MalformedRle("runs do not cover height * width");
  return mask;
}

std::vector<uint32_t> rle_runs(const RleMask& rle) { return unpack_counts(rle.counts); }

RleMask rle_from_runs(const std::vector<uint32_t>& runs, int height, int width) {
  return RleMask{height, width, pack_counts(runs)};
}

int mask_area(const BinaryMask& mask) {
  int area = 0;
  for (uint8_t v : mask.data) area += v;
  return area;
}

int rle_area(const RleMask& rle) {
  const std::vector<uint32_t> runs = unpack_counts(rle.counts);
  int64_t area = 0;
  for (size_t i = 1; i < runs.size(); i += 2) area += runs[i];
  return int(area);
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.height != b.height || a.width != b.width)
    throw DimensionMismatch("mask_iou requires equal dimensions");
  int64_t inter = 0, uni = 0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    inter += a.data[i] & b.data[i];
    uni += a.data[i] | b.data[i];
  }
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

Box mask_to_box(const BinaryMask& mask) {
  int min_r = mask.height, max_r = -1, min_c = mask.width, max_c = -1;
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (!mask.at(r, c)) continue;
      min_r = std::min(min_r, r);
      max_r = std::max(max_r, r);
      min_c = std::min(min_c, c);
      max_c = std::max(max_c, c);
    }
  }
  if (max_r < 0) return Box{0, 0, 0, 0};
  return Box{min_c, min_r, max_c - min_c + 1, max_r - min_r + 1};
}

std::pair<std::vector<uint8_t>, std::vector<uint8_t>> axis_projections(
    const BinaryMask& mask) {
  std::vector<uint8_t> x_profile(mask.width, 0), y_profile(mask.height, 0);
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (mask.at(r, c)) {
        x_profile[c] = 1;
        y_profile[r] = 1;
      }
    }
  }
  return {x_profile, y_profile};
}

BinaryMask translate_mask(const BinaryMask& mask, int dx, int dy) {
  BinaryMask out(mask.height, mask.width);
  for (int r = 0; r < mask.height; ++r) {
    int nr = r + dy;
    if (nr < 0 || nr >= mask.height) continue;
    for (int c = 0; c < mask.width; ++c) {
      int nc = c + dx;
      if (nc < 0 || nc >= mask.width) continue;
      if (mask.at(r, c)) out.set(nr, nc, 1);
    }
  }
  return out;
}

std::pair<double, double> mask_centroid(const BinaryMask& mask) {
  double sx = 0, sy = 0;
  int n = 0;
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (mask.at(r, c)) {
        sx += c;
        sy += r;
        ++n;
      }
    }
  }
  if (n == 0) return {0.0, 0.0};
  return {sx / n, sy / n};
}

namespace {

BinaryMask morph(const BinaryMask& mask, int radius, bool dilate) {
  if (radius <= 0) return mask;
  BinaryMask out(mask.height, mask.width);
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      bool hit = !dilate;
      for (int dr = -radius; dr <= radius && hit != dilate; ++dr) {
        for (int dc = -radius; dc <= radius; ++dc) {
          int nr = r + dr, nc = c + dc;
          uint8_t v = 0;
          if (nr >= 0 && nr < mask.height && nc >= 0 && nc < mask.width)
            v = mask.at(nr, nc);
          if (dilate && v) {
            hit = true;
            break;
          }
          if (!dilate && !v) {
            hit = false;
            break;
          }
        }
      }
      out.set(r, c, hit ? 1 : 0);
    }
  }
  return out;
}

}  // namespace

BinaryMask dilate_mask(const BinaryMask& mask, int radius) {
  return morph(mask, radius, true);
}

BinaryMask erode_mask(const BinaryMask& mask, int radius) {
  return morph(mask, radius, false);
}

}  // namespace pmvis
