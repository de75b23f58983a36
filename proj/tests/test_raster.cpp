#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "infoscribe/errors.hpp"
#include "infoscribe/raster.hpp"
#include "testutil.hpp"

using namespace infoscribe;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& header,
                                   std::initializer_list<int> payload) {
  std::vector<std::uint8_t> b(header.begin(), header.end());
  for (int v : payload) b.push_back(static_cast<std::uint8_t>(v));
  return b;
}

}  // namespace

TEST_CASE("P5 pixels pass through unchanged") {
  auto b = bytes_of("P5 2 2 255 ", {0, 64, 128, 255});
  Raster r = load_image(b);
  CHECK(r.width == 2);
  CHECK(r.height == 2);
  CHECK(r.pixels == std::vector<std::uint8_t>{0, 64, 128, 255});
}

TEST_CASE("P6 white stays white") {
  auto b = bytes_of("P6 1 1 255 ", {255, 255, 255});
  Raster r = load_image(b);
  CHECK(r.pixels == std::vector<std::uint8_t>{255});
}

TEST_CASE("P6 luminance follows the BT.601 formula") {
  // Oracle: evaluate round(0.299*R + 0.587*G + 0.114*B) directly.
  const int expected = static_cast<int>(std::lround(0.299 * 200 + 0.587 * 100 + 0.114 * 50));
  CHECK(expected == 124);
  auto b = bytes_of("P6 1 1 255 ", {200, 100, 50});
  Raster r = load_image(b);
  CHECK(r.pixels[0] == expected);
}

TEST_CASE("header errors") {
  auto p4 = bytes_of("P4 2 2 255 ", {0, 0, 0, 0});
  CHECK_THROWS_AS(load_image(p4), MalformedHeader);

  auto bad_maxval = bytes_of("P5 2 2 65535 ", {0, 0, 0, 0});
  CHECK_THROWS_AS(load_image(bad_maxval), MalformedHeader);

  auto no_dims = bytes_of("P5 ", {});
  CHECK_THROWS_AS(load_image(no_dims), MalformedHeader);

  auto zero_dim = bytes_of("P5 0 2 255 ", {});
  CHECK_THROWS_AS(load_image(zero_dim), MalformedHeader);

  auto garbage_dim = bytes_of("P5 2x 2 255 ", {0, 0, 0, 0});
  CHECK_THROWS_AS(load_image(garbage_dim), MalformedHeader);
}

TEST_CASE("truncated payload detected") {
  auto b = bytes_of("P5 2 2 255 ", {0, 64, 128});
  CHECK_THROWS_AS(load_image(b), TruncatedPayload);
  auto b6 = bytes_of("P6 2 1 255 ", {1, 2, 3, 4, 5});
  CHECK_THROWS_AS(load_image(b6), TruncatedPayload);
}

TEST_CASE("header comments and whitespace runs are tolerated") {
  std::string header = "P5\n# a comment\n  2\t2\n# another\n255\n";
  auto b = bytes_of(header, {9, 8, 7, 6});
  Raster r = load_image(b);
  CHECK(r.width == 2);
  CHECK(r.pixels == std::vector<std::uint8_t>{9, 8, 7, 6});
}

TEST_CASE("save emits the documented smallest raster") {
  Raster r = testutil::make_raster(1, 1, {7});
  auto b = save_image(r);
  const std::string expect_header = "P5\n1 1\n255\n";
  REQUIRE(b.size() == expect_header.size() + 1);
  CHECK(std::equal(expect_header.begin(), expect_header.end(), b.begin()));
  CHECK(b.back() == 7);
}

TEST_CASE("save keeps row-major payload order") {
  Raster r = testutil::make_raster(2, 1, {0, 255});
  auto b = save_image(r);
  CHECK(b[b.size() - 2] == 0);
  CHECK(b[b.size() - 1] == 255);
}

TEST_CASE("round-trip identity on random rasters") {
  for (std::uint32_t seed : {1u, 2u, 3u, 4u, 5u}) {
    Raster r = testutil::random_raster(16, 16, seed);
    CHECK(load_image(save_image(r)) == r);
  }
  // degenerate shapes too
  CHECK(load_image(save_image(testutil::random_raster(1, 37, 9))) ==
        testutil::random_raster(1, 37, 9));
  CHECK(load_image(save_image(testutil::random_raster(37, 1, 10))) ==
        testutil::random_raster(37, 1, 10));
}

TEST_CASE("grayscale conversion is position-independent") {
  // Converting a shuffled image equals shuffling the converted image.
  std::mt19937 rng(77);
  const int n = 32;
  std::vector<std::array<std::uint8_t, 3>> colors(n);
  for (auto& c : colors)
    c = {static_cast<std::uint8_t>(rng() % 256), static_cast<std::uint8_t>(rng() % 256),
         static_cast<std::uint8_t>(rng() % 256)};

  auto to_raster = [](const std::vector<std::array<std::uint8_t, 3>>& cs) {
    std::vector<std::uint8_t> b;
    std::string header = "P6 " + std::to_string(cs.size()) + " 1 255 ";
    b.assign(header.begin(), header.end());
    for (const auto& c : cs) {
      b.push_back(c[0]);
      b.push_back(c[1]);
      b.push_back(c[2]);
    }
    return load_image(b);
  };

  Raster before = to_raster(colors);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<std::array<std::uint8_t, 3>> shuffled(n);
  for (int i = 0; i < n; ++i) shuffled[i] = colors[perm[i]];
  Raster after = to_raster(shuffled);

  for (int i = 0; i < n; ++i) CHECK(after.pixels[i] == before.pixels[perm[i]]);
}
