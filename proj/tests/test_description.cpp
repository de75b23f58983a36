#include <doctest.h>

#include <fstream>
#include <sstream>

#include "infoscribe/description.hpp"
#include "infoscribe/errors.hpp"
#include "infoscribe/pyramid.hpp"
#include "testutil.hpp"

using namespace infoscribe;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("uniform image describes to one region and one run per level") {
  ImageDescription d = describe(testutil::uniform_raster(16, 16, 99));
  REQUIRE(d.levels.size() == 2);
  for (const auto& lv : d.levels) {
    CHECK(lv.regions.size() == 1);
    CHECK(lv.support.runs.size() == 1);
    CHECK(lv.support.runs[0].second ==
          static_cast<std::int64_t>(lv.width) * lv.height);
  }
}

TEST_CASE("two-blob scene has three level-0 descriptors") {
  ImageDescription d = describe(testutil::two_blob_64());
  REQUIRE(d.levels.back().level == 0);
  CHECK(d.levels.back().regions.size() == 3);
}

TEST_CASE("reconstruct rounds region means") {
  ImageDescription d;
  d.meta.width = 3;
  d.meta.height = 3;
  LevelDescription lv;
  lv.level = 0;
  lv.width = 3;
  lv.height = 3;
  RegionDescriptor rd;
  rd.label = 1;
  rd.area = 9;
  rd.area_fraction = 1.0;
  rd.centroid_x = rd.centroid_y = 0.5;
  rd.mean_intensity = 50.4;
  lv.regions.push_back(rd);
  lv.support.runs = {{1, 9}};
  d.levels.push_back(lv);

  CHECK(reconstruct(d, 0) == testutil::uniform_raster(3, 3, 50));
  CHECK_THROWS_AS(reconstruct(d, 1), UnknownLevel);
}

TEST_CASE("piecewise-constant inputs reconstruct exactly at level 0") {
  auto corpus = testutil::piecewise_corpus();
  for (std::size_t i = 3; i < corpus.size(); i += 12) {
    ImageDescription d = describe(corpus[i]);
    CHECK(reconstruct(d, 0) == corpus[i]);
  }
}

TEST_CASE("block-aligned scenes reconstruct exactly at every level") {
  // Borders on multiples of 8 keep every pyramid level free of mixed
  // pixels, so reconstruction is exact all the way up.
  const Raster img = testutil::two_blob_64();
  ImageDescription d = describe(img);
  Pyramid pyr = build_pyramid(img, d.meta.params.top_max_pixels);
  for (const auto& lv : d.levels) CHECK(reconstruct(d, lv.level) == pyr.levels[lv.level]);
}

TEST_CASE("describe is idempotent through reconstruction on piecewise inputs") {
  auto corpus = testutil::piecewise_corpus();
  for (std::size_t i = 5; i < corpus.size(); i += 17) {
    ImageDescription d = describe(corpus[i]);
    ImageDescription d2 = describe(reconstruct(d, 0));
    CHECK(d == d2);
    CHECK(serialize(d) == serialize(d2));
  }
}

TEST_CASE("serialization is canonical and round-trips") {
  ImageDescription d = describe(testutil::two_blob_64());
  const std::string a = serialize(d);
  const std::string b = serialize(d);
  CHECK(a == b);
  ImageDescription back = deserialize(a);
  CHECK(back == d);
  CHECK(serialize(back) == a);
}

TEST_CASE("natural-like images round-trip through the file format") {
  for (std::uint32_t seed : {51u, 52u}) {
    ImageDescription d = describe(testutil::smoothed_noise(96, 80, seed));
    attach_density(d);
    ImageDescription back = deserialize(serialize(d));
    CHECK(back == d);
    CHECK(serialize(back) == serialize(d));
  }
}

TEST_CASE("golden description bytes stay frozen") {
  ImageDescription d = describe(testutil::two_blob_64());
  const std::string golden = read_file(std::string(INFOSCRIBE_GOLDEN_DIR) +
                                       "/twoblob.pid.json");
  CHECK(serialize(d) == golden);
}

TEST_CASE("deserialize rejects malformed documents") {
  ImageDescription d = describe(testutil::uniform_raster(8, 8, 10));
  const std::string good = serialize(d);

  CHECK_THROWS_AS(deserialize(good.substr(0, good.size() / 2)), SchemaError);
  CHECK_THROWS_AS(deserialize("[]"), SchemaError);
  CHECK_THROWS_AS(deserialize("{\"version\":\"pid-0\"}"), VersionError);

  // tampered run length: sums no longer match
  std::string tampered = good;
  const std::string runs = "\"support\":[[1,64]]";
  REQUIRE(tampered.find(runs) != std::string::npos);
  tampered.replace(tampered.find(runs), runs.size(), "\"support\":[[1,63]]");
  CHECK_THROWS_AS(deserialize(tampered), InvariantViolation);

  // tampered area fraction
  std::string frac = good;
  const std::string af = "\"area_fraction\":1.000000";
  REQUIRE(frac.find(af) != std::string::npos);
  frac.replace(frac.find(af), af.size(), "\"area_fraction\":0.900000");
  CHECK_THROWS_AS(deserialize(frac), InvariantViolation);
}

TEST_CASE("degenerate 1x1 image describes, serializes and reconstructs") {
  Raster r = testutil::uniform_raster(1, 1, 42);
  ImageDescription d = describe(r);
  REQUIRE(d.levels.size() == 1);
  CHECK(d.levels[0].regions.size() == 1);
  CHECK(!d.levels[0].regions[0].parent.has_value());
  CHECK(deserialize(serialize(d)) == d);
  CHECK(reconstruct(d, 0) == r);
}

TEST_CASE("reconstruct succeeds at every level of any valid description") {
  for (std::uint32_t seed : {61u, 62u}) {
    ImageDescription d = describe(testutil::smoothed_noise(70, 50, seed));
    for (const auto& lv : d.levels) {
      Raster r = reconstruct(d, lv.level);
      CHECK(r.width == lv.width);
      CHECK(r.height == lv.height);
    }
  }
}

TEST_CASE("density profile is positive and decreases for uniform images") {
  ImageDescription d = describe(testutil::uniform_raster(64, 64, 5));
  auto prof = density_profile(d);
  REQUIRE(prof.size() == d.levels.size());
  for (std::size_t i = 0; i < prof.size(); ++i) {
    CHECK(prof[i].density > 0.0);
    CHECK(prof[i].bytes > 0);
    CHECK(prof[i].level == d.levels[i].level);
  }
  // top -> bottom order means pixel counts grow and density must fall
  for (std::size_t i = 1; i < prof.size(); ++i) CHECK(prof[i].density < prof[i - 1].density);
}

TEST_CASE("attached density survives the file format") {
  ImageDescription d = describe(testutil::checkerboard(16));
  attach_density(d);
  REQUIRE(d.density.has_value());
  ImageDescription back = deserialize(serialize(d));
  REQUIRE(back.density.has_value());
  CHECK(*back.density == *d.density);
}
