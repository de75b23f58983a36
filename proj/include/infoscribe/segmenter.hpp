#pragma once

#include <cstdint>
#include <vector>

#include "infoscribe/raster.hpp"

namespace infoscribe {

// Tolerances for the top segmentation and the descent refinement. Defaults
// are tuned for desk-scale test images; every knob is exposed through the
// CLI and the config file.
struct SegParams {
  double tau_seg = 12.0;       // admission tolerance for top-level growing
  double tau_refine = 12.0;    // deviation threshold during expansion
  int min_seed = 4;            // minimum pixel count for a newborn region
  int max_refine_passes = 5;   // refinement iteration cap per level
  int top_max_pixels = 100;    // pyramid stop condition

  bool operator==(const SegParams&) const = default;
};

// Per-pixel region ids, row-major, ids >= 1. next_label is the smallest
// unused id; ids present are a subset of [1, next_label) and may have gaps
// when a coarse region loses all of its pixels during descent.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> labels;
  std::uint32_t next_label = 1;

  std::uint32_t at(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint32_t& at(int x, int y) {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
};

struct RegionStat {
  std::uint32_t label = 0;
  std::int64_t pixel_count = 0;
  double mean_intensity = 0.0;  // exact arithmetic mean over the level raster
  double centroid_x = 0.0;      // mean pixel index, not normalized
  double centroid_y = 0.0;
};

// Live regions only, ascending by label.
struct RegionStats {
  std::vector<RegionStat> regions;

  const RegionStat* find(std::uint32_t label) const;
};

struct LevelSegmentation {
  LabelMap labels;
  RegionStats stats;
};

// Optional observability for expand_level, used by property tests.
struct ExpandDiag {
  std::vector<int> deviant_per_pass;  // deviant count before each pass
  int seeded_regions = 0;
  int forced_components = 0;
};

// Deterministic incremental-mean region growing. Scans row-major; each
// unlabeled pixel seeds a region; grows breadth-first over 4-neighbors in
// the fixed order up, left, right, down; a pixel joins when its intensity is
// within tau_seg of the region's running mean, and the mean updates on each
// admission. Labels are issued in seed order starting at 1.
LevelSegmentation segment_top(const Raster& r, const SegParams& p);

// One descent step: nearest-neighbor 2x upscale of the coarse labels, deviant
// marking against ref, bounded refinement passes, seeding of newly emerging
// regions, forced merge of sub-min_seed leftovers, exact stats from ref.
// Throws DimensionMismatch unless coarse dims == ceil-halved ref dims.
LevelSegmentation expand_level(const LevelSegmentation& coarse, const Raster& ref,
                               const SegParams& p, ExpandDiag* diag = nullptr);

// Full pipeline for one image: build the pyramid, segment the top, expand
// down every level. Result is ordered top -> level 0.
std::vector<LevelSegmentation> extract_segments(const Raster& r, const SegParams& p);

}  // namespace infoscribe
