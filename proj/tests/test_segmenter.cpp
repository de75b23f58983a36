#include <doctest.h>

#include <cmath>
#include <set>

#include "infoscribe/errors.hpp"
#include "infoscribe/pyramid.hpp"
#include "infoscribe/segmenter.hpp"
#include "testutil.hpp"

using namespace infoscribe;

namespace {

// Recompute stats independently of the library for consistency checks.
void check_stats_from_scratch(const LevelSegmentation& seg, const Raster& ref) {
  std::set<std::uint32_t> seen;
  std::int64_t total = 0;
  for (const RegionStat& s : seg.stats.regions) {
    REQUIRE(seen.insert(s.label).second);
    double sum = 0, sx = 0, sy = 0;
    std::int64_t count = 0;
    for (int y = 0; y < ref.height; ++y) {
      for (int x = 0; x < ref.width; ++x) {
        if (seg.labels.at(x, y) != s.label) continue;
        sum += ref.at(x, y);
        sx += x;
        sy += y;
        ++count;
      }
    }
    REQUIRE(count == s.pixel_count);
    CHECK(std::abs(s.mean_intensity - sum / count) < 1e-9);
    CHECK(std::abs(s.centroid_x - sx / count) < 1e-9);
    CHECK(std::abs(s.centroid_y - sy / count) < 1e-9);
    total += count;
  }
  CHECK(total == static_cast<std::int64_t>(ref.pixel_count()));
  // every pixel labeled with a live label
  for (std::uint32_t l : seg.labels.labels) {
    CHECK(l >= 1);
    CHECK(l < seg.labels.next_label);
    CHECK(seg.stats.find(l) != nullptr);
  }
}

}  // namespace

TEST_CASE("uniform image is one segment") {
  SegParams p;
  auto seg = segment_top(testutil::uniform_raster(4, 4, 50), p);
  REQUIRE(seg.stats.regions.size() == 1);
  CHECK(seg.stats.regions[0].label == 1);
  CHECK(seg.stats.regions[0].pixel_count == 16);
  CHECK(seg.stats.regions[0].mean_intensity == doctest::Approx(50.0));
}

TEST_CASE("well separated halves become two regions") {
  Raster r = testutil::uniform_raster(4, 4, 0);
  for (int y = 0; y < 4; ++y)
    for (int x = 2; x < 4; ++x) r.at(x, y) = 255;
  SegParams p;
  auto seg = segment_top(r, p);
  REQUIRE(seg.stats.regions.size() == 2);
  CHECK(seg.stats.regions[0].mean_intensity == doctest::Approx(0.0));
  CHECK(seg.stats.regions[1].mean_intensity == doctest::Approx(255.0));
  CHECK(seg.labels.at(0, 0) == 1);
  CHECK(seg.labels.at(3, 3) == 2);
}

TEST_CASE("ramp splits where the incremental mean drifts away") {
  // Replay of the admission rule on [0,10,20,30,40] with tau 12:
  // {0,10} mean 5 rejects 20; {20,30} mean 25 rejects 40; {40}.
  Raster r = testutil::make_raster(5, 1, {0, 10, 20, 30, 40});
  SegParams p;
  auto seg = segment_top(r, p);
  const auto oracle = testutil::ramp_segmentation_oracle(r.pixels, p.tau_seg);
  CHECK(seg.labels.labels == oracle);
  CHECK(seg.labels.labels == std::vector<std::uint32_t>{1, 1, 2, 2, 3});
}

TEST_CASE("zero tolerance isolates every distinct pixel") {
  Raster r = testutil::make_raster(2, 2, {1, 2, 3, 4});
  SegParams p;
  p.tau_seg = 0;
  auto seg = segment_top(r, p);
  CHECK(seg.stats.regions.size() == 4);
  CHECK(seg.labels.labels == std::vector<std::uint32_t>{1, 2, 3, 4});
}

TEST_CASE("segment_top agrees with the row oracle on sampled ramps") {
  SegParams p;
  for (int start = 0; start <= 250; start += 30) {
    for (int step : {-40, -10, 0, 10, 20, 50}) {
      std::vector<std::uint8_t> v;
      for (int i = 0, x = start; i < 7; ++i, x += step) {
        if (x < 0 || x > 255) break;
        v.push_back(static_cast<std::uint8_t>(x));
      }
      if (v.empty()) continue;
      Raster r;
      r.width = static_cast<int>(v.size());
      r.height = 1;
      r.pixels = v;
      auto seg = segment_top(r, p);
      CHECK(seg.labels.labels == testutil::ramp_segmentation_oracle(v, p.tau_seg));
    }
  }
}

TEST_CASE("perfect inheritance leaves the map untouched") {
  SegParams p;
  auto coarse = segment_top(testutil::uniform_raster(1, 1, 50), p);
  auto fine = expand_level(coarse, testutil::uniform_raster(2, 2, 50), p);
  CHECK(fine.labels.labels == std::vector<std::uint32_t>{1, 1, 1, 1});
  REQUIRE(fine.stats.regions.size() == 1);
  CHECK(fine.stats.regions[0].mean_intensity == doctest::Approx(50.0));
}

TEST_CASE("fully deviant expansion births one region per intensity plateau") {
  // Hand trace: coarse 1x1 mean 127 over [0,0,255,255] (rows [0,0] and
  // [255,255]), tau_refine 12, min_seed 1. Every pixel deviates, no region
  // offers an admissible mean, and the similarity-linked components are the
  // two constant rows.
  SegParams p;
  p.min_seed = 1;
  LevelSegmentation coarse;
  coarse.labels.width = 1;
  coarse.labels.height = 1;
  coarse.labels.labels = {1};
  coarse.labels.next_label = 2;
  coarse.stats.regions = {{1, 1, 127.0, 0.0, 0.0}};

  Raster ref = testutil::make_raster(2, 2, {0, 0, 255, 255});
  ExpandDiag diag;
  auto fine = expand_level(coarse, ref, p, &diag);

  CHECK(fine.labels.labels == std::vector<std::uint32_t>{2, 2, 3, 3});
  REQUIRE(fine.stats.regions.size() == 2);
  CHECK(fine.stats.regions[0].label == 2);
  CHECK(fine.stats.regions[0].mean_intensity == doctest::Approx(0.0));
  CHECK(fine.stats.regions[1].label == 3);
  CHECK(fine.stats.regions[1].mean_intensity == doctest::Approx(255.0));
  CHECK(diag.seeded_regions == 2);
}

TEST_CASE("infinite tolerance reduces expansion to nearest-neighbor upscale") {
  SegParams p;
  p.tau_refine = 255;
  for (std::uint32_t seed = 0; seed < 8; ++seed) {
    const int cw = 2 + seed % 4, ch = 2 + (seed / 2) % 3;
    Raster coarse_img = testutil::random_raster(cw, ch, 40 + seed);
    auto coarse = segment_top(coarse_img, p);
    Raster ref = testutil::random_raster(cw * 2, ch * 2, 90 + seed);
    auto fine = expand_level(coarse, ref, p);
    for (int y = 0; y < ref.height; ++y)
      for (int x = 0; x < ref.width; ++x)
        CHECK(fine.labels.at(x, y) == coarse.labels.at(x / 2, y / 2));
  }
}

TEST_CASE("expansion rejects dimension mismatches") {
  SegParams p;
  auto coarse = segment_top(testutil::uniform_raster(4, 4, 9), p);
  CHECK_THROWS_AS(expand_level(coarse, testutil::uniform_raster(9, 9, 9), p),
                  DimensionMismatch);
  CHECK_THROWS_AS(expand_level(coarse, testutil::uniform_raster(4, 4, 9), p),
                  DimensionMismatch);
  // both 2w and 2w-1 are valid halving preimages
  CHECK_NOTHROW(expand_level(coarse, testutil::uniform_raster(8, 7, 9), p));
  CHECK_NOTHROW(expand_level(coarse, testutil::uniform_raster(7, 8, 9), p));
}

TEST_CASE("two-blob 8x8 descends to exact blob geometry") {
  // Quadrant blobs aligned to the 2-level pyramid (top_max_pixels = 4).
  Raster r = testutil::uniform_raster(8, 8, 40);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) r.at(x, y) = 200;
  for (int y = 4; y < 8; ++y)
    for (int x = 4; x < 8; ++x) r.at(x, y) = 120;

  SegParams p;
  p.top_max_pixels = 4;
  auto levels = extract_segments(r, p);
  REQUIRE(levels.size() == 3);
  const auto& level0 = levels.back();
  CHECK(testutil::canonical_relabel(level0.labels.labels) ==
        testutil::canonical_relabel(testutil::connected_components_oracle(r)));
}

TEST_CASE("uniform image stays one region at every level") {
  SegParams p;
  auto levels = extract_segments(testutil::uniform_raster(64, 64, 77), p);
  REQUIRE(levels.size() == 4);
  for (const auto& seg : levels) {
    CHECK(seg.stats.regions.size() == 1);
    check_stats_from_scratch(seg, testutil::uniform_raster(seg.labels.width,
                                                           seg.labels.height, 77));
  }
}

TEST_CASE("bright square on dark ground tracks through all levels") {
  Raster r = testutil::uniform_raster(64, 64, 20);
  for (int y = 16; y < 32; ++y)
    for (int x = 16; x < 32; ++x) r.at(x, y) = 220;
  SegParams p;
  auto levels = extract_segments(r, p);
  for (const auto& seg : levels) CHECK(seg.stats.regions.size() == 2);
  // level 0 area within +-8 of the true 256
  const auto& level0 = levels.back();
  for (const RegionStat& s : level0.stats.regions) {
    if (s.mean_intensity > 120) {
      CHECK(s.pixel_count >= 248);
      CHECK(s.pixel_count <= 264);
    }
  }
}

TEST_CASE("degenerate 1x1 pipeline") {
  SegParams p;
  auto levels = extract_segments(testutil::uniform_raster(1, 1, 5), p);
  REQUIRE(levels.size() == 1);
  CHECK(levels[0].stats.regions.size() == 1);
  CHECK(levels[0].stats.regions[0].pixel_count == 1);
}

TEST_CASE("partition, stats consistency and determinism on random images") {
  SegParams p;
  for (std::uint32_t seed : {11u, 12u, 13u}) {
    Raster r = testutil::smoothed_noise(40 + seed % 17, 36 + seed % 13, seed);
    Pyramid pyr = build_pyramid(r, p.top_max_pixels);
    auto levels = extract_segments(r, p);
    REQUIRE(static_cast<int>(levels.size()) == pyr.level_count());
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const Raster& ref = pyr.levels[pyr.level_count() - 1 - i];
      check_stats_from_scratch(levels[i], ref);
    }
    auto again = extract_segments(r, p);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      CHECK(levels[i].labels.labels == again[i].labels.labels);
      CHECK(levels[i].labels.next_label == again[i].labels.next_label);
    }
  }
}

TEST_CASE("deviant count never grows across refinement passes") {
  SegParams p;
  for (std::uint32_t seed : {21u, 22u, 23u, 24u}) {
    Raster r = testutil::smoothed_noise(64, 64, seed);
    Pyramid pyr = build_pyramid(r, p.top_max_pixels);
    auto seg = segment_top(pyr.top(), p);
    for (int k = pyr.level_count() - 2; k >= 0; --k) {
      ExpandDiag diag;
      seg = expand_level(seg, pyr.levels[k], p, &diag);
      for (std::size_t i = 1; i < diag.deviant_per_pass.size(); ++i)
        CHECK(diag.deviant_per_pass[i] <= diag.deviant_per_pass[i - 1]);
    }
  }
}

TEST_CASE("piecewise-constant images recover ground truth exactly") {
  SegParams p;
  // A slice of the corpus; the acceptance suite runs all 50.
  auto corpus = testutil::piecewise_corpus();
  REQUIRE(corpus.size() == 50);
  for (std::size_t i = 0; i < corpus.size(); i += 10) {
    const Raster& img = corpus[i];
    auto levels = extract_segments(img, p);
    const auto& level0 = levels.back();
    CHECK(testutil::canonical_relabel(level0.labels.labels) ==
          testutil::canonical_relabel(testutil::connected_components_oracle(img)));
  }
}
