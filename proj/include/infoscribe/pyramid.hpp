#pragma once

#include <vector>

#include "infoscribe/raster.hpp"

namespace infoscribe {

// Level stack built by repeated 4-to-1 block averaging. levels[0] is the
// original image, levels.back() the top with at most top_max_pixels pixels.
struct Pyramid {
  std::vector<Raster> levels;
  int top_max_pixels = 100;

  int level_count() const { return static_cast<int>(levels.size()); }
  const Raster& top() const { return levels.back(); }
};

// One halving step: output dims (ceil(w/2), ceil(h/2)); each output pixel is
// floor((a+b+c+d+2)/4) over its 2x2 block (round-half-up integer mean). Odd
// right/bottom edges are padded by replicating the last column/row.
Raster squeeze_once(const Raster& r);

// Squeezes until width*height <= top_max_pixels, keeping every level.
Pyramid build_pyramid(const Raster& r, int top_max_pixels = 100);

}  // namespace infoscribe
