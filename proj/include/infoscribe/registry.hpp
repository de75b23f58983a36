#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "infoscribe/segmenter.hpp"

namespace infoscribe {

enum class RelationKind {
  sub_part_of,  // to the parent region one level above
  adjacent_to,  // shares at least one pixel border edge
  left_of,
  above,
  contains,
};

std::string_view relation_kind_name(RelationKind k);
std::optional<RelationKind> relation_kind_from_name(std::string_view name);

struct Relation {
  RelationKind kind;
  std::uint32_t target = 0;  // label at the same level; level above for sub_part_of
  double strength = 1.0;     // (0,1]

  bool operator==(const Relation&) const = default;
};

// Simplified object attributes registered for every region at every level.
// Reals are stored at the canonical serialization precision (6 decimals).
struct RegionDescriptor {
  int level = 0;  // pyramid level index, 0 = original image
  std::uint32_t label = 0;
  std::int64_t area = 0;
  double area_fraction = 0.0;               // area / level pixel count
  double centroid_x = 0.0, centroid_y = 0.0;  // pixel-center convention, [0,1]
  double mean_intensity = 0.0;
  std::optional<std::uint32_t> parent;  // absent only at the top level
  std::vector<Relation> relations;

  bool operator==(const RegionDescriptor&) const = default;
};

// Geometry knobs for the directional predicates; the centroid gap is the
// minimum normalized offset before left_of/above fire.
struct RelationParams {
  double centroid_gap = 0.1;
};

// One descriptor per live label, ascending. coarse_lm must be the label map
// one level up for every non-top level; parent is the coarse label covering
// the majority of the region under the floor(x/2),floor(y/2) projection
// (ties to the lowest label), recorded both as parent and as a sub_part_of
// relation whose strength is the covered fraction.
std::vector<RegionDescriptor> register_level(int level_index, const LabelMap& lm,
                                             const RegionStats& rs,
                                             const LabelMap* coarse_lm);

// Fills same-level relations. adjacent_to fires on any shared border edge
// with strength shared/perimeter of the smaller region; left_of, above and
// contains are evaluated between adjacent pairs only.
void compute_relations(std::vector<RegionDescriptor>& descriptors, const LabelMap& lm,
                       const RelationParams& rp = {});

}  // namespace infoscribe
