#ifndef PMVIS_DATASET_HPP
#define PMVIS_DATASET_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pmvis/mask.hpp"

namespace pmvis {

enum class ImageDatasetKind { kPixel, kBoxOnly };

struct ImageAnnotation {
  int category_id = 0;
  Box box;
  std::optional<RleMask> mask;  // always absent for box-only sources
};

struct ImageSample {
  int image_id = 0;
  int width = 0;
  int height = 0;
  std::string file_name;
  std::vector<ImageAnnotation> annotations;
};

struct ImageDataset {
  std::vector<ImageSample> samples;
  std::map<int, std::string> categories;
  // Dangling file references are collected here, not fatal (dangling id
  // references are fatal). See the parser notes in src/dataset.cpp.
  std::vector<std::string> warnings;
};

struct VideoInfo {
  int id = 0;
  int length = 0;
  int width = 0;
  int height = 0;
  std::vector<std::string> file_names;
};

// One object instance across a video.
struct InstanceTrack {
  int track_id = 0;
  int video_id = 0;
  int category_id = 0;
  std::vector<std::optional<RleMask>> frame_masks;
  std::vector<std::optional<double>> frame_scores;

  // Arithmetic mean over frames with a score present; 0 if none, so
  // unscored tracks sort last under both filters.
  double mean_score() const;
};

struct VideoDataset {
  std::vector<VideoInfo> videos;
  std::map<int, std::string> categories;
  std::vector<InstanceTrack> tracks;

  const VideoInfo* find_video(int video_id) const;
  bool operator==(const VideoDataset& other) const;
};

enum class CategorySource { kPixelCorpus, kBoxCorpus };

struct CategoryMapEntry {
  std::set<int> image_category_ids;  // nonempty
  CategorySource source = CategorySource::kPixelCorpus;
};

// video category id -> one or more image category ids (the m/n relation).
struct CategoryMap {
  std::map<int, CategoryMapEntry> entries;
};

struct AliasRule {
  std::string video_name;
  std::vector<std::string> image_names;
};

struct CategoryStats {
  int classes = 0;
  int items = 0;  // total images or videos in the dataset
  int annotations = 0;
  std::map<int, std::pair<int, int>> per_category;  // id -> (items, annos)
};

bool operator==(const InstanceTrack& a, const InstanceTrack& b);

// COCO object-detection schema. Polygons are rasterized to RleMask; for
// kind=box-only any segmentation present is dropped. Throws SchemaError /
// DanglingReference with a path to the offending node.
ImageDataset parse_image_dataset(const std::string& json_text, ImageDatasetKind kind);

// YTVIS-style schema; per-frame null segmentations become absent masks.
// Pseudo-label files may extend annotations with a parallel "scores" array.
// Throws SchemaError / LengthMismatch / DanglingReference.
VideoDataset parse_video_dataset(const std::string& json_text);

// YTVIS-style schema with compressed RLE segmentations and deterministic
// key order; exact inverse of parse_video_dataset.
std::string serialize_video_dataset(const VideoDataset& ds);

// Line-oriented rules: `video_name = image_name[, image_name...]`.
std::vector<AliasRule> parse_alias_rules(const std::string& text);

// Default rule: case-insensitive exact name match, pixel corpus preferred;
// alias rules override. Throws UncoveredCategory naming every uncovered
// video category.
CategoryMap build_category_map(const std::map<int, std::string>& video_cats,
                               const std::map<int, std::string>& image_cats_pixel,
                               const std::map<int, std::string>& image_cats_box,
                               const std::vector<AliasRule>& alias_rules);

CategoryStats dataset_stats(const ImageDataset& ds);
CategoryStats dataset_stats(const VideoDataset& ds);

// Even-odd scanline rasterization at pixel centers; the union of all rings.
BinaryMask rasterize_polygons(const std::vector<std::vector<double>>& polygons,
                              int height, int width);

}  // namespace pmvis

#endif  // PMVIS_DATASET_HPP
