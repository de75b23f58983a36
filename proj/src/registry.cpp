#include "infoscribe/registry.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "canon.hpp"

namespace infoscribe {

std::string_view relation_kind_name(RelationKind k) {
  switch (k) {
    case RelationKind::sub_part_of: return "sub_part_of";
    case RelationKind::adjacent_to: return "adjacent_to";
    case RelationKind::left_of: return "left_of";
    case RelationKind::above: return "above";
    case RelationKind::contains: return "contains";
  }
  return "?";
}

std::optional<RelationKind> relation_kind_from_name(std::string_view name) {
  if (name == "sub_part_of") return RelationKind::sub_part_of;
  if (name == "adjacent_to") return RelationKind::adjacent_to;
  if (name == "left_of") return RelationKind::left_of;
  if (name == "above") return RelationKind::above;
  if (name == "contains") return RelationKind::contains;
  return std::nullopt;
}

namespace {

int kind_rank(RelationKind k) {
  switch (k) {
    case RelationKind::sub_part_of: return 0;
    case RelationKind::adjacent_to: return 1;
    case RelationKind::left_of: return 2;
    case RelationKind::above: return 3;
    case RelationKind::contains: return 4;
  }
  return 5;
}

// Canonical relation order: sub_part_of first, then by target, then kind.
void sort_relations(std::vector<Relation>& rel) {
  std::stable_sort(rel.begin(), rel.end(), [](const Relation& a, const Relation& b) {
    const int ap = a.kind == RelationKind::sub_part_of ? 0 : 1;
    const int bp = b.kind == RelationKind::sub_part_of ? 0 : 1;
    if (ap != bp) return ap < bp;
    if (a.target != b.target) return a.target < b.target;
    return kind_rank(a.kind) < kind_rank(b.kind);
  });
}

struct BBox {
  int min_x = 0, min_y = 0, max_x = -1, max_y = -1;
  bool strictly_inside(const BBox& outer) const {
    return outer.min_x < min_x && max_x < outer.max_x && outer.min_y < min_y &&
           max_y < outer.max_y;
  }
  std::int64_t area() const {
    return static_cast<std::int64_t>(max_x - min_x + 1) * (max_y - min_y + 1);
  }
};

}  // namespace

std::vector<RegionDescriptor> register_level(int level_index, const LabelMap& lm,
                                             const RegionStats& rs,
                                             const LabelMap* coarse_lm) {
  const int w = lm.width;
  const int h = lm.height;
  const double pixel_total = static_cast<double>(w) * h;

  // Parent vote: how many pixels of each region project onto each coarse label.
  std::map<std::uint32_t, std::map<std::uint32_t, std::int64_t>> votes;
  if (coarse_lm) {
    std::size_t idx = 0;
    for (int y = 0; y < h; ++y) {
      const std::uint32_t* crow =
          coarse_lm->labels.data() + static_cast<std::size_t>(y / 2) * coarse_lm->width;
      for (int x = 0; x < w; ++x, ++idx) ++votes[lm.labels[idx]][crow[x / 2]];
    }
  }

  std::vector<RegionDescriptor> out;
  out.reserve(rs.regions.size());
  for (const RegionStat& s : rs.regions) {
    RegionDescriptor d;
    d.level = level_index;
    d.label = s.label;
    d.area = s.pixel_count;
    d.area_fraction = canon::positive6(s.pixel_count / pixel_total);
    d.centroid_x = canon::quantize6((s.centroid_x + 0.5) / w);
    d.centroid_y = canon::quantize6((s.centroid_y + 0.5) / h);
    d.mean_intensity = canon::quantize6(s.mean_intensity);
    if (coarse_lm) {
      const auto& vote = votes[s.label];
      std::uint32_t best = 0;
      std::int64_t best_count = -1;
      for (const auto& [cl, cnt] : vote) {
        if (cnt > best_count) {  // map iteration is ascending, ties keep lowest
          best = cl;
          best_count = cnt;
        }
      }
      d.parent = best;
      d.relations.push_back(Relation{RelationKind::sub_part_of, best,
                                     canon::positive6(static_cast<double>(best_count) /
                                                      static_cast<double>(s.pixel_count))});
    }
    out.push_back(std::move(d));
  }
  return out;
}

void compute_relations(std::vector<RegionDescriptor>& descriptors, const LabelMap& lm,
                       const RelationParams& rp) {
  const int w = lm.width;
  const int h = lm.height;

  // Shared border edges per label pair and total contact edges per label
  // (edges against other regions; the image boundary does not count).
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::int64_t> shared;
  std::map<std::uint32_t, std::int64_t> contact;
  std::map<std::uint32_t, BBox> bbox;

  std::size_t idx = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x, ++idx) {
      const std::uint32_t a = lm.labels[idx];
      BBox& bb = bbox.try_emplace(a, BBox{x, y, x, y}).first->second;
      bb.min_x = std::min(bb.min_x, x);
      bb.min_y = std::min(bb.min_y, y);
      bb.max_x = std::max(bb.max_x, x);
      bb.max_y = std::max(bb.max_y, y);
      if (x + 1 < w) {
        const std::uint32_t b = lm.labels[idx + 1];
        if (a != b) {
          ++shared[{std::min(a, b), std::max(a, b)}];
          ++contact[a];
          ++contact[b];
        }
      }
      if (y + 1 < h) {
        const std::uint32_t b = lm.labels[idx + w];
        if (a != b) {
          ++shared[{std::min(a, b), std::max(a, b)}];
          ++contact[a];
          ++contact[b];
        }
      }
    }
  }

  std::map<std::uint32_t, RegionDescriptor*> by_label;
  for (RegionDescriptor& d : descriptors) by_label[d.label] = &d;

  for (const auto& [pair, edges] : shared) {
    RegionDescriptor* a = by_label.at(pair.first);
    RegionDescriptor* b = by_label.at(pair.second);

    // adjacent_to, both directions, one strength: shared edges over the
    // smaller region's contact perimeter (ties on area to the lower label).
    const RegionDescriptor* smaller = (a->area < b->area) ? a : (b->area < a->area) ? b : a;
    const double strength = canon::positive6(
        static_cast<double>(edges) / static_cast<double>(contact.at(smaller->label)));
    a->relations.push_back(Relation{RelationKind::adjacent_to, b->label, strength});
    b->relations.push_back(Relation{RelationKind::adjacent_to, a->label, strength});

    // Directional predicates for this adjacent pair, either direction.
    auto directional = [&](RegionDescriptor* from, RegionDescriptor* to) {
      const double dx = to->centroid_x - from->centroid_x;
      const double dy = to->centroid_y - from->centroid_y;
      if (dx > rp.centroid_gap && std::abs(dy) <= std::abs(dx))
        from->relations.push_back(Relation{RelationKind::left_of, to->label, 1.0});
      if (dy > rp.centroid_gap && std::abs(dx) < std::abs(dy))
        from->relations.push_back(Relation{RelationKind::above, to->label, 1.0});
    };
    directional(a, b);
    directional(b, a);

    // contains: strict bounding-box nesting between adjacent regions.
    auto containment = [&](RegionDescriptor* outer, RegionDescriptor* inner) {
      const BBox& ob = bbox.at(outer->label);
      const BBox& ib = bbox.at(inner->label);
      if (ib.strictly_inside(ob)) {
        outer->relations.push_back(Relation{
            RelationKind::contains, inner->label,
            canon::positive6(static_cast<double>(inner->area) /
                             static_cast<double>(ob.area()))});
      }
    };
    containment(a, b);
    containment(b, a);
  }

  for (RegionDescriptor& d : descriptors) sort_relations(d.relations);
}

}  // namespace infoscribe
