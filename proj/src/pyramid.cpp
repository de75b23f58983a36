#include "infoscribe/pyramid.hpp"

namespace infoscribe {

Raster squeeze_once(const Raster& r) {
  Raster out;
  out.width = (r.width + 1) / 2;
  out.height = (r.height + 1) / 2;
  out.pixels.resize(out.pixel_count());
  for (int oy = 0; oy < out.height; ++oy) {
    int y0 = 2 * oy;
    int y1 = (y0 + 1 < r.height) ? y0 + 1 : y0;  // replicate last row
    for (int ox = 0; ox < out.width; ++ox) {
      int x0 = 2 * ox;
      int x1 = (x0 + 1 < r.width) ? x0 + 1 : x0;  // replicate last column
      int sum = r.at(x0, y0) + r.at(x1, y0) + r.at(x0, y1) + r.at(x1, y1);
      out.at(ox, oy) = static_cast<std::uint8_t>((sum + 2) / 4);
    }
  }
  return out;
}

Pyramid build_pyramid(const Raster& r, int top_max_pixels) {
  Pyramid pyr;
  pyr.top_max_pixels = top_max_pixels;
  pyr.levels.push_back(r);
  while (pyr.levels.back().pixel_count() > static_cast<std::size_t>(top_max_pixels) &&
         pyr.levels.back().pixel_count() > 1) {
    pyr.levels.push_back(squeeze_once(pyr.levels.back()));
  }
  return pyr;
}

}  // namespace infoscribe
