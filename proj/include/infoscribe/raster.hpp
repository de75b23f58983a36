#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace infoscribe {

// 8-bit grayscale pixel grid, row-major. Immutable by convention once built:
// every pipeline stage takes rasters by const reference and returns new ones.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // size == width * height

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }

  bool operator==(const Raster&) const = default;
};

// Parses a binary PGM ("P5") or binary PPM ("P6"), maxval 255 only.
// Color collapses to gray via round(0.299*R + 0.587*G + 0.114*B).
// Throws MalformedHeader or TruncatedPayload.
Raster load_image(std::span<const std::uint8_t> bytes);

// Emits a binary PGM: "P5\n<w> <h>\n255\n" followed by the row-major payload.
// load_image(save_image(r)) == r, bit-exact.
std::vector<std::uint8_t> save_image(const Raster& r);

// File conveniences for the CLI. Throw IoError on open/write failure.
Raster load_image_file(const std::string& path);
void save_image_file(const Raster& r, const std::string& path);

}  // namespace infoscribe
