#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "pmvis/errors.hpp"
#include "pmvis/mask.hpp"
#include "pmvis/rng.hpp"

using namespace pmvis;

namespace {

BinaryMask random_mask(SplitMix64& rng, int h, int w, double density) {
  BinaryMask m(h, w);
  for (auto& px : m.data) px = rng.next_bernoulli(density) ? 1 : 0;
  return m;
}

std::string fixture_path(const char* name) {
  return std::string(PMVIS_FIXTURES_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("rle roundtrip covers every 3x3 mask") {
  for (int bits = 0; bits < 512; ++bits) {
    BinaryMask m(3, 3);
    for (int i = 0; i < 9; ++i) m.data[i] = (bits >> i) & 1;
    RleMask rle = rle_encode(m);
    CHECK(rle_decode(rle) == m);
    CHECK(rle_area(rle) == mask_area(m));
  }
}

TEST_CASE("rle roundtrip on random masks") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    int h = 1 + int(rng.next_below(64));
    int w = 1 + int(rng.next_below(64));
    double density = rng.next_double();
    BinaryMask m = random_mask(rng, h, w, density);
    RleMask rle = rle_encode(m);
    BinaryMask back = rle_decode(rle);
    REQUIRE(back == m);
  }
}

TEST_CASE("rle encoding matches the golden corpus bit for bit") {
  std::ifstream in(fixture_path("rle_golden.json"));
  REQUIRE(in.good());
  nlohmann::json golden = nlohmann::json::parse(in);
  REQUIRE(golden.size() > 0);
  for (const auto& entry : golden) {
    int h = entry["size"][0], w = entry["size"][1];
    const std::string pixels = entry["pixels"];
    BinaryMask m(h, w);
    for (size_t i = 0; i < pixels.size(); ++i) m.data[i] = pixels[i] == '1';
    RleMask rle = rle_encode(m);
    CHECK(rle.counts == entry["counts"].get<std::string>());
    CHECK(rle_decode(rle) == m);
  }
}

TEST_CASE("rle runs interface is column-major starting with zeros") {
  // 2x2 with only the top-right pixel set: columns scan as 0,0,1,0.
  BinaryMask m(2, 2);
  m.set(0, 1, 1);
  RleMask rle = rle_encode(m);
  CHECK(rle_runs(rle) == std::vector<uint32_t>{2, 1, 1});
  CHECK(rle_from_runs({2, 1, 1}, 2, 2) == rle);
}

TEST_CASE("rle decode rejects malformed input") {
  CHECK_THROWS_AS(rle_decode(RleMask{2, 2, "\x01"}), MalformedRle);
  // Runs summing to 5 cannot tile a 2x2 grid.
  CHECK_THROWS_AS(rle_decode(rle_from_runs({5}, 2, 2)), MalformedRle);
  CHECK_THROWS_AS(rle_decode(rle_from_runs({1, 1}, 2, 2)), MalformedRle);
}

TEST_CASE("mask_iou basics") {
  BinaryMask a(4, 4), b(4, 4);
  CHECK(mask_iou(a, b) == 0.0);  // both empty
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 4; ++c) a.set(r, c, 1);  // top half
  for (int r = 1; r < 3; ++r)
    for (int c = 0; c < 4; ++c) b.set(r, c, 1);  // middle half
  CHECK(mask_iou(a, b) == doctest::Approx(4.0 / 12.0));
  CHECK(mask_iou(a, a) == 1.0);
  CHECK_THROWS_AS(mask_iou(a, BinaryMask(3, 4)), DimensionMismatch);
}

TEST_CASE("mask_to_box is tight and half-open") {
  BinaryMask m(6, 8);
  m.set(2, 3, 1);
  m.set(4, 6, 1);
  CHECK(mask_to_box(m) == Box{3, 2, 4, 3});
  CHECK(mask_to_box(BinaryMask(6, 8)) == Box{0, 0, 0, 0});
  CHECK(mask_to_box(BinaryMask(6, 8)).empty());
}

TEST_CASE("axis projections are per-axis maxima") {
  BinaryMask m(3, 4);
  m.set(0, 1, 1);
  m.set(2, 1, 1);
  m.set(2, 3, 1);
  auto [x_profile, y_profile] = axis_projections(m);
  CHECK(x_profile == std::vector<uint8_t>{0, 1, 0, 1});
  CHECK(y_profile == std::vector<uint8_t>{1, 0, 1});
}

TEST_CASE("translate clips at the borders") {
  BinaryMask m(3, 3);
  m.set(0, 0, 1);
  m.set(2, 2, 1);
  BinaryMask t = translate_mask(m, 1, 1);
  CHECK(mask_area(t) == 1);
  CHECK(t.at(1, 1) == 1);
  CHECK(translate_mask(m, 5, 0) == BinaryMask(3, 3));
}

TEST_CASE("centroid of a symmetric blob is its center") {
  BinaryMask m(5, 5);
  for (int r = 1; r <= 3; ++r)
    for (int c = 1; c <= 3; ++c) m.set(r, c, 1);
  auto [cx, cy] = mask_centroid(m);
  CHECK(cx == doctest::Approx(2.0));
  CHECK(cy == doctest::Approx(2.0));
  auto [ex, ey] = mask_centroid(BinaryMask(5, 5));
  CHECK(ex == 0.0);
  CHECK(ey == 0.0);
}

TEST_CASE("morphology: dilation grows, erosion shrinks, duality on interior") {
  BinaryMask m(7, 7);
  for (int r = 2; r <= 4; ++r)
    for (int c = 2; c <= 4; ++c) m.set(r, c, 1);
  BinaryMask grown = dilate_mask(m, 1);
  CHECK(mask_area(grown) == 25);
  CHECK(erode_mask(grown, 1) == m);
  BinaryMask shrunk = erode_mask(m, 1);
  CHECK(mask_area(shrunk) == 1);
  CHECK(shrunk.at(3, 3) == 1);
  CHECK(dilate_mask(m, 0) == m);
}

TEST_CASE("morphology roundtrip property on random blobs") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    BinaryMask m = random_mask(rng, 12, 12, 0.4);
    BinaryMask opened = dilate_mask(erode_mask(m, 1), 1);
    BinaryMask closed = erode_mask(dilate_mask(m, 1), 1);
    // Opening removes pixels everywhere; closing adds them, except at the
    // border where the zero-padded erosion can still eat pixels back.
    for (size_t i = 0; i < m.data.size(); ++i) CHECK(opened.data[i] <= m.data[i]);
    for (int r = 1; r < m.height - 1; ++r)
      for (int c = 1; c < m.width - 1; ++c) CHECK(closed.at(r, c) >= m.at(r, c));
  }
}
