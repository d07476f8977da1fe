#include "pmvis/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "pmvis/errors.hpp"

namespace pmvis {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

double InstanceTrack::mean_score() const {
  double sum = 0;
  int n = 0;
  for (const auto& s : frame_scores) {
    if (s) {
      sum += *s;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / n;
}

bool operator==(const InstanceTrack& a, const InstanceTrack& b) {
  return a.track_id == b.track_id && a.video_id == b.video_id &&
         a.category_id == b.category_id && a.frame_masks == b.frame_masks &&
         a.frame_scores == b.frame_scores;
}

const VideoInfo* VideoDataset::find_video(int video_id) const {
  for (const auto& v : videos)
    if (v.id == video_id) return &v;
  return nullptr;
}

bool VideoDataset::operator==(const VideoDataset& other) const {
  auto video_eq = [](const VideoInfo& a, const VideoInfo& b) {
    return a.id == b.id && a.length == b.length && a.width == b.width &&
           a.height == b.height && a.file_names == b.file_names;
  };
  return std::equal(videos.begin(), videos.end(), other.videos.begin(),
                    other.videos.end(), video_eq) &&
         categories == other.categories && tracks == other.tracks;
}

namespace {

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key))
    throw SchemaError(path + ": missing required key '" + key + "'");
  return obj.at(key);
}

int require_int(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number_integer())
    throw SchemaError(path + "." + key + ": expected integer");
  return v.get<int>();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

std::map<int, std::string> parse_categories(const json& doc, const std::string& where) {
  std::map<int, std::string> cats;
  const json& arr = require(doc, "categories", where);
  for (size_t i = 0; i < arr.size(); ++i) {
    std::string path = "categories[" + std::to_string(i) + "]";
    int id = require_int(arr[i], "id", path);
    cats[id] = require(arr[i], "name", path).get<std::string>();
  }
  return cats;
}

RleMask rle_from_json(const json& seg, int height, int width, const std::string& path) {
  int h = height, w = width;
  if (seg.contains("size")) {
    const json& size = seg.at("size");
    if (!size.is_array() || size.size() != 2)
      throw SchemaError(path + ".size: expected [h, w]");
    h = size[0].get<int>();
    w = size[1].get<int>();
  }
  const json& counts = require(seg, "counts", path);
  if (counts.is_string()) return RleMask{h, w, counts.get<std::string>()};
  if (counts.is_array()) {
    std::vector<uint32_t> runs;
    for (const auto& c : counts) runs.push_back(c.get<uint32_t>());
    return rle_from_runs(runs, h, w);
  }
  throw SchemaError(path + ".counts: expected string or array");
}

json rle_to_json(const RleMask& rle) {
  return json{{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
}

std::optional<RleMask> segmentation_from_json(const json& seg, int height, int width,
                                              const std::string& path) {
  if (seg.is_null()) return std::nullopt;
  if (seg.is_object()) return rle_from_json(seg, height, width, path);
  if (seg.is_array()) {
    std::vector<std::vector<double>> polys;
    for (const auto& ring : seg) {
      if (!ring.is_array() || ring.size() < 6 || ring.size() % 2 != 0)
        throw SchemaError(path + ": malformed polygon ring");
      polys.push_back(ring.get<std::vector<double>>());
    }
    return rle_encode(rasterize_polygons(polys, height, width));
  }
  throw SchemaError(path + ": expected polygon list, RLE object, or null");
}

}  // namespace

ImageDataset parse_image_dataset(const std::string& json_text, ImageDatasetKind kind) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }

  ImageDataset out;
  out.categories = parse_categories(doc, "$");

  std::unordered_map<int, size_t> by_id;
  const json& images = require(doc, "images", "$");
  for (size_t i = 0; i < images.size(); ++i) {
    std::string path = "images[" + std::to_string(i) + "]";
    ImageSample s;
    s.image_id = require_int(images[i], "id", path);
    s.width = require_int(images[i], "width", path);
    s.height = require_int(images[i], "height", path);
    if (images[i].contains("file_name") && images[i]["file_name"].is_string())
      s.file_name = images[i]["file_name"].get<std::string>();
    if (s.file_name.empty())
      out.warnings.push_back(path + ": image " + std::to_string(s.image_id) +
                             " has no file reference");
    by_id[s.image_id] = out.samples.size();
    out.samples.push_back(std::move(s));
  }

  const json& anns = require(doc, "annotations", "$");
  for (size_t i = 0; i < anns.size(); ++i) {
    std::string path = "annotations[" + std::to_string(i) + "]";
    int image_id = require_int(anns[i], "image_id", path);
    auto it = by_id.find(image_id);
    if (it == by_id.end())
      throw DanglingReference(path + ".image_id: unknown image " +
                              std::to_string(image_id));
    ImageSample& sample = out.samples[it->second];

    ImageAnnotation ann;
    ann.category_id = require_int(anns[i], "category_id", path);
    if (!out.categories.count(ann.category_id))
      throw DanglingReference(path + ".category_id: unknown category " +
                              std::to_string(ann.category_id));

    const json& bbox = require(anns[i], "bbox", path);
    if (!bbox.is_array() || bbox.size() != 4)
      throw SchemaError(path + ".bbox: expected [x, y, w, h]");
    double bx = bbox[0].get<double>(), by = bbox[1].get<double>();
    double bw = bbox[2].get<double>(), bh = bbox[3].get<double>();
    int x0 = std::max(0, int(std::floor(bx)));
    int y0 = std::max(0, int(std::floor(by)));
    int x1 = std::min(sample.width, int(std::ceil(bx + bw)));
    int y1 = std::min(sample.height, int(std::ceil(by + bh)));
    if (x1 < x0 || y1 < y0) throw SchemaError(path + ".bbox: negative size");
    if (bx < 0 || by < 0 || bx + bw > sample.width || by + bh > sample.height)
      out.warnings.push_back(path + ": bbox clipped to the image");
    ann.box = Box{x0, y0, x1 - x0, y1 - y0};

    if (kind == ImageDatasetKind::kPixel && anns[i].contains("segmentation") &&
        !anns[i]["segmentation"].is_null()) {
      ann.mask = segmentation_from_json(anns[i]["segmentation"], sample.height,
                                        sample.width, path + ".segmentation");
    }
    sample.annotations.push_back(std::move(ann));
  }
  return out;
}

VideoDataset parse_video_dataset(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }

  VideoDataset out;
  out.categories = parse_categories(doc, "$");

  std::unordered_map<int, size_t> by_id;
  const json& videos = require(doc, "videos", "$");
  for (size_t i = 0; i < videos.size(); ++i) {
    std::string path = "videos[" + std::to_string(i) + "]";
    VideoInfo v;
    v.id = require_int(videos[i], "id", path);
    v.width = require_int(videos[i], "width", path);
    v.height = require_int(videos[i], "height", path);
    if (videos[i].contains("file_names"))
      v.file_names = videos[i]["file_names"].get<std::vector<std::string>>();
    if (videos[i].contains("length"))
      v.length = require_int(videos[i], "length", path);
    else
      v.length = int(v.file_names.size());
    if (!v.file_names.empty() && int(v.file_names.size()) != v.length)
      throw LengthMismatch(path + ": file_names size " +
                           std::to_string(v.file_names.size()) + " != length " +
                           std::to_string(v.length));
    by_id[v.id] = out.videos.size();
    out.videos.push_back(std::move(v));
  }

  std::unordered_set<int> track_ids;
  const json& anns = require(doc, "annotations", "$");
  for (size_t i = 0; i < anns.size(); ++i) {
    std::string path = "annotations[" + std::to_string(i) + "]";
    InstanceTrack t;
    t.track_id = require_int(anns[i], "id", path);
    if (!track_ids.insert(t.track_id).second)
      throw SchemaError(path + ".id: duplicate track id " + std::to_string(t.track_id));
    t.video_id = require_int(anns[i], "video_id", path);
    auto it = by_id.find(t.video_id);
    if (it == by_id.end())
      throw DanglingReference(path + ".video_id: unknown video " +
                              std::to_string(t.video_id));
    const VideoInfo& video = out.videos[it->second];
    t.category_id = require_int(anns[i], "category_id", path);
    if (!out.categories.count(t.category_id))
      throw DanglingReference(path + ".category_id: unknown category " +
                              std::to_string(t.category_id));

    const json& segs = require(anns[i], "segmentations", path);
    if (!segs.is_array() || int(segs.size()) != video.length)
      throw LengthMismatch(path + ".segmentations: size " +
                           std::to_string(segs.size()) + " != video length " +
                           std::to_string(video.length));
    for (size_t f = 0; f < segs.size(); ++f) {
      auto mask = segmentation_from_json(
          segs[f], video.height, video.width,
          path + ".segmentations[" + std::to_string(f) + "]");
      if (mask && (mask->height != video.height || mask->width != video.width))
        throw SchemaError(path + ".segmentations[" + std::to_string(f) +
                          "]: mask size does not match video dimensions");
      t.frame_masks.push_back(std::move(mask));
    }

    t.frame_scores.assign(video.length, std::nullopt);
    if (anns[i].contains("scores")) {
      const json& scores = anns[i]["scores"];
      if (!scores.is_array() || int(scores.size()) != video.length)
        throw LengthMismatch(path + ".scores: size != video length");
      for (size_t f = 0; f < scores.size(); ++f)
        if (!scores[f].is_null()) t.frame_scores[f] = scores[f].get<double>();
    }
    out.tracks.push_back(std::move(t));
  }
  return out;
}

std::string serialize_video_dataset(const VideoDataset& ds) {
  ordered_json doc;
  doc["videos"] = ordered_json::array();
  for (const auto& v : ds.videos) {
    ordered_json jv;
    jv["id"] = v.id;
    jv["width"] = v.width;
    jv["height"] = v.height;
    jv["length"] = v.length;
    jv["file_names"] = v.file_names;
    doc["videos"].push_back(std::move(jv));
  }
  doc["categories"] = ordered_json::array();
  for (const auto& [id, name] : ds.categories)
    doc["categories"].push_back(ordered_json{{"id", id}, {"name", name}});
  doc["annotations"] = ordered_json::array();
  for (const auto& t : ds.tracks) {
    ordered_json jt;
    jt["id"] = t.track_id;
    jt["video_id"] = t.video_id;
    jt["category_id"] = t.category_id;
    jt["segmentations"] = ordered_json::array();
    for (const auto& m : t.frame_masks)
      jt["segmentations"].push_back(m ? ordered_json(rle_to_json(*m))
                                      : ordered_json(nullptr));
    bool any_score = std::any_of(t.frame_scores.begin(), t.frame_scores.end(),
                                 [](const auto& s) { return s.has_value(); });
    if (any_score) {
      jt["scores"] = ordered_json::array();
      for (const auto& s : t.frame_scores)
        jt["scores"].push_back(s ? ordered_json(*s) : ordered_json(nullptr));
    }
    doc["annotations"].push_back(std::move(jt));
  }
  return doc.dump(1);
}

std::vector<AliasRule> parse_alias_rules(const std::string& text) {
  std::vector<AliasRule> rules;
  std::istringstream in(text);
  std::string line;
  auto trim = [](std::string s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw SchemaError("alias rules line " + std::to_string(line_no) +
                        ": expected 'video_name = image_name[, ...]'");
    AliasRule rule;
    rule.video_name = trim(t.substr(0, eq));
    std::string rhs = t.substr(eq + 1);
    size_t pos = 0;
    while (pos != std::string::npos) {
      size_t comma = rhs.find(',', pos);
      std::string name = trim(comma == std::string::npos
                                  ? rhs.substr(pos)
                                  : rhs.substr(pos, comma - pos));
      if (!name.empty()) rule.image_names.push_back(name);
      pos = comma == std::string::npos ? comma : comma + 1;
    }
    if (rule.video_name.empty() || rule.image_names.empty())
      throw SchemaError("alias rules line " + std::to_string(line_no) +
                        ": empty name");
    rules.push_back(std::move(rule));
  }
  return rules;
}

CategoryMap build_category_map(const std::map<int, std::string>& video_cats,
                               const std::map<int, std::string>& image_cats_pixel,
                               const std::map<int, std::string>& image_cats_box,
                               const std::vector<AliasRule>& alias_rules) {
  auto index = [](const std::map<int, std::string>& cats) {
    std::map<std::string, int> by_name;
    for (const auto& [id, name] : cats) by_name[lower(name)] = id;
    return by_name;
  };
  const auto pixel_by_name = index(image_cats_pixel);
  const auto box_by_name = index(image_cats_box);

  std::map<std::string, const AliasRule*> rules_by_name;
  for (const auto& r : alias_rules) rules_by_name[lower(r.video_name)] = &r;

  CategoryMap map;
  std::vector<std::string> uncovered;
  for (const auto& [vid, vname] : video_cats) {
    CategoryMapEntry entry;
    bool any_pixel = false;
    auto rule_it = rules_by_name.find(lower(vname));
    if (rule_it != rules_by_name.end()) {
      for (const auto& iname : rule_it->second->image_names) {
        auto pit = pixel_by_name.find(lower(iname));
        if (pit != pixel_by_name.end()) {
          entry.image_category_ids.insert(pit->second);
          any_pixel = true;
          continue;
        }
        auto bit = box_by_name.find(lower(iname));
        if (bit != box_by_name.end()) entry.image_category_ids.insert(bit->second);
      }
    } else {
      auto pit = pixel_by_name.find(lower(vname));
      if (pit != pixel_by_name.end()) {
        entry.image_category_ids.insert(pit->second);
        any_pixel = true;
      } else {
        auto bit = box_by_name.find(lower(vname));
        if (bit != box_by_name.end()) entry.image_category_ids.insert(bit->second);
      }
    }
    if (entry.image_category_ids.empty()) {
      uncovered.push_back(vname);
      continue;
    }
    entry.source = any_pixel ? CategorySource::kPixelCorpus : CategorySource::kBoxCorpus;
    map.entries[vid] = std::move(entry);
  }
  if (!uncovered.empty()) {
    std::string msg = "video categories with no image match:";
    for (const auto& n : uncovered) msg += " '" + n + "'";
    throw UncoveredCategory(msg);
  }
  return map;
}

CategoryStats dataset_stats(const ImageDataset& ds) {
  CategoryStats stats;
  stats.items = int(ds.samples.size());
  for (const auto& s : ds.samples) {
    std::set<int> cats_here;
    for (const auto& a : s.annotations) {
      stats.per_category[a.category_id].second += 1;
      stats.annotations += 1;
      cats_here.insert(a.category_id);
    }
    for (int c : cats_here) stats.per_category[c].first += 1;
  }
  stats.classes = int(stats.per_category.size());
  return stats;
}

CategoryStats dataset_stats(const VideoDataset& ds) {
  CategoryStats stats;
  stats.items = int(ds.videos.size());
  std::map<int, std::set<int>> videos_per_cat;
  for (const auto& t : ds.tracks) {
    stats.per_category[t.category_id].second += 1;
    stats.annotations += 1;
    videos_per_cat[t.category_id].insert(t.video_id);
  }
  for (auto& [cat, entry] : stats.per_category)
    entry.first = int(videos_per_cat[cat].size());
  stats.classes = int(stats.per_category.size());
  return stats;
}

BinaryMask rasterize_polygons(const std::vector<std::vector<double>>& polygons,
                              int height, int width) {
  BinaryMask mask(height, width);
  for (const auto& ring : polygons) {
    size_t n = ring.size() / 2;
    for (int r = 0; r < height; ++r) {
      double yc = r + 0.5;
      std::vector<double> xs;
      for (size_t i = 0; i < n; ++i) {
        double x1 = ring[2 * i], y1 = ring[2 * i + 1];
        double x2 = ring[2 * ((i + 1) % n)], y2 = ring[2 * ((i + 1) % n) + 1];
        if ((y1 <= yc && yc < y2) || (y2 <= yc && yc < y1))
          xs.push_back(x1 + (yc - y1) * (x2 - x1) / (y2 - y1));
      }
      std::sort(xs.begin(), xs.end());
      for (size_t i = 0; i + 1 < xs.size(); i += 2) {
        int c0 = std::max(0, int(std::ceil(xs[i] - 0.5)));
        int c1 = std::min(width - 1, int(std::floor(xs[i + 1] - 0.5 - 1e-12)));
        // half-open span: pixel centers in [xs[i], xs[i+1])
        for (int c = c0; c <= c1; ++c) {
          if (c + 0.5 >= xs[i] && c + 0.5 < xs[i + 1]) mask.set(r, c, 1);
        }
      }
    }
  }
  return mask;
}

}  // namespace pmvis
