#ifndef PMVIS_MASK_HPP
#define PMVIS_MASK_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pmvis {

// Dense binary mask, one byte per pixel, row-major.
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> data;  // height * width entries, each 0 or 1

  BinaryMask() = default;
  BinaryMask(int h, int w) : height(h), width(w), data(size_t(h) * w, 0) {}

  uint8_t at(int row, int col) const { return data[size_t(row) * width + col]; }
  void set(int row, int col, uint8_t v) { data[size_t(row) * width + col] = v; }

  bool operator==(const BinaryMask& other) const = default;
};

// Compressed run-length mask in the COCO char-packed string form.
// Runs are column-major and start with the count of zeros.
struct RleMask {
  int height = 0;
  int width = 0;
  std::string counts;

  bool operator==(const RleMask& other) const = default;
};

// Axis-aligned box, top-left corner + size, half-open on the far edges.
struct Box {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool empty() const { return w <= 0 || h <= 0; }
  bool operator==(const Box& other) const = default;
};

RleMask rle_encode(const BinaryMask& mask);

// Throws MalformedRle on dangling 6-bit groups, negative runs, or runs
// that do not sum to height * width.
BinaryMask rle_decode(const RleMask& rle);

// Run counts without the char packing. Exposed for the uncompressed COCO
// annotation form and for diagnostics.
std::vector<uint32_t> rle_runs(const RleMask& rle);
RleMask rle_from_runs(const std::vector<uint32_t>& runs, int height, int width);

int mask_area(const BinaryMask& mask);
int rle_area(const RleMask& rle);

// |a ∩ b| / |a ∪ b|. Both empty -> 0. Throws DimensionMismatch.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

// Tight bounding box of the nonzero pixels; empty mask -> Box{0,0,0,0}.
Box mask_to_box(const BinaryMask& mask);

// x profile: per-column max over rows; y profile: per-row max over columns.
std::pair<std::vector<uint8_t>, std::vector<uint8_t>> axis_projections(
    const BinaryMask& mask);

// Integer-translated copy, clipped at the frame borders.
BinaryMask translate_mask(const BinaryMask& mask, int dx, int dy);

// Mean (x, y) of the set pixels. Undefined-on-empty guarded by the caller;
// returns (0, 0) for an empty mask.
std::pair<double, double> mask_centroid(const BinaryMask& mask);

// Square-structuring-element morphology, radius in pixels.
BinaryMask dilate_mask(const BinaryMask& mask, int radius);
BinaryMask erode_mask(const BinaryMask& mask, int radius);

}  // namespace pmvis

#endif  // PMVIS_MASK_HPP
