#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "infoscribe/raster.hpp"
#include "infoscribe/registry.hpp"
#include "infoscribe/segmenter.hpp"

namespace infoscribe {

// Run-length encoding of a label map over the flattened row-major pixel
// sequence; runs may cross row boundaries. Run lengths sum to width*height
// and no two consecutive runs share a label.
struct RegionSupport {
  std::vector<std::pair<std::uint32_t, std::int64_t>> runs;

  bool operator==(const RegionSupport&) const = default;
};

struct LevelDescription {
  int level = 0;  // pyramid level index, 0 = original image
  int width = 0;
  int height = 0;
  std::vector<RegionDescriptor> regions;  // ascending label
  RegionSupport support;

  bool operator==(const LevelDescription&) const = default;
};

struct DescriptionMeta {
  int width = 0;   // original image dims
  int height = 0;
  SegParams params;
  double centroid_gap = 0.1;

  bool operator==(const DescriptionMeta&) const = default;
};

// The pipeline's central product: enough attributes to reason about the
// image and enough geometry to repaint it, level by level.
struct ImageDescription {
  DescriptionMeta meta;
  std::vector<LevelDescription> levels;  // ordered top -> level 0
  std::optional<std::vector<double>> density;  // per level, same order

  bool operator==(const ImageDescription&) const = default;
};

// Runs the full extraction pipeline and registers every level.
ImageDescription describe(const Raster& r, const SegParams& p = {},
                          const RelationParams& rp = {});

// Paints each pixel with round(mean_intensity) of its region per the
// support. Throws UnknownLevel.
Raster reconstruct(const ImageDescription& d, int level = 0);

// Canonical UTF-8 JSON: fixed key order, 6-decimal reals, no insignificant
// whitespace. Equal descriptions serialize to identical bytes.
std::string serialize(const ImageDescription& d);

// Parses and validates every structural invariant before returning.
// Throws SchemaError, VersionError or InvariantViolation.
ImageDescription deserialize(std::string_view text);

struct DensityEntry {
  int level = 0;
  int width = 0;
  int height = 0;
  std::size_t bytes = 0;  // canonical bytes of the level's regions + support
  double density = 0.0;   // bytes per pixel
};

// Description quantity per pixel at each scale, ordered top -> bottom.
std::vector<DensityEntry> density_profile(const ImageDescription& d);

// Computes the profile and stores the per-level densities on the description.
void attach_density(ImageDescription& d);

inline constexpr std::string_view kDescriptionFormatVersion = "pid-1";

}  // namespace infoscribe
