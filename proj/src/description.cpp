#include "infoscribe/description.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "canon.hpp"
#include "infoscribe/errors.hpp"
#include "infoscribe/pyramid.hpp"

namespace infoscribe {

namespace {

RegionSupport rle_encode(const LabelMap& lm) {
  RegionSupport sup;
  if (lm.labels.empty()) return sup;
  std::uint32_t cur = lm.labels[0];
  std::int64_t len = 1;
  for (std::size_t i = 1; i < lm.labels.size(); ++i) {
    if (lm.labels[i] == cur) {
      ++len;
    } else {
      sup.runs.emplace_back(cur, len);
      cur = lm.labels[i];
      len = 1;
    }
  }
  sup.runs.emplace_back(cur, len);
  return sup;
}

void append_region(std::string& out, const RegionDescriptor& d, bool top_level) {
  out += "{\"label\":";
  out += std::to_string(d.label);
  out += ",\"area\":";
  out += std::to_string(d.area);
  out += ",\"area_fraction\":";
  out += canon::real6(d.area_fraction);
  out += ",\"centroid\":[";
  out += canon::real6(d.centroid_x);
  out += ',';
  out += canon::real6(d.centroid_y);
  out += "],\"mean_intensity\":";
  out += canon::real6(d.mean_intensity);
  if (!top_level) {
    out += ",\"parent\":";
    out += std::to_string(d.parent.value());
  }
  out += ",\"relations\":[";
  for (std::size_t i = 0; i < d.relations.size(); ++i) {
    if (i) out += ',';
    const Relation& r = d.relations[i];
    out += "{\"kind\":\"";
    out += relation_kind_name(r.kind);
    out += "\",\"target\":";
    out += std::to_string(r.target);
    out += ",\"strength\":";
    out += canon::real6(r.strength);
    out += '}';
  }
  out += "]}";
}

void append_regions(std::string& out, const LevelDescription& lv, bool top_level) {
  out += '[';
  for (std::size_t i = 0; i < lv.regions.size(); ++i) {
    if (i) out += ',';
    append_region(out, lv.regions[i], top_level);
  }
  out += ']';
}

void append_support(std::string& out, const LevelDescription& lv) {
  out += '[';
  for (std::size_t i = 0; i < lv.support.runs.size(); ++i) {
    if (i) out += ',';
    out += '[';
    out += std::to_string(lv.support.runs[i].first);
    out += ',';
    out += std::to_string(lv.support.runs[i].second);
    out += ']';
  }
  out += ']';
}

// The level sequence the params imply for given original dims; mirrors
// build_pyramid's stop rule.
std::vector<std::pair<int, int>> implied_level_dims(int w, int h, int top_max_pixels) {
  std::vector<std::pair<int, int>> dims{{w, h}};
  while (static_cast<std::int64_t>(dims.back().first) * dims.back().second >
             top_max_pixels &&
         static_cast<std::int64_t>(dims.back().first) * dims.back().second > 1) {
    dims.emplace_back((dims.back().first + 1) / 2, (dims.back().second + 1) / 2);
  }
  return dims;
}

// ---- deserialization helpers ----

using json = nlohmann::json;

const json& require_key(const json& obj, const char* key, const char* where) {
  if (!obj.is_object())
    throw SchemaError(std::string(where) + " is not an object");
  auto it = obj.find(key);
  if (it == obj.end())
    throw SchemaError(std::string(where) + " is missing '" + key + "'");
  return *it;
}

std::int64_t as_int(const json& v, const char* what) {
  if (!v.is_number_integer())
    throw SchemaError(std::string(what) + " must be an integer");
  return v.get<std::int64_t>();
}

double as_real(const json& v, const char* what) {
  if (!v.is_number())
    throw SchemaError(std::string(what) + " must be a number");
  return v.get<double>();
}

std::string as_string(const json& v, const char* what) {
  if (!v.is_string())
    throw SchemaError(std::string(what) + " must be a string");
  return v.get<std::string>();
}

std::uint32_t as_label(const json& v, const char* what) {
  const std::int64_t x = as_int(v, what);
  if (x < 1 || x > 0xffffffffLL)
    throw InvariantViolation(std::string(what) + " out of range");
  return static_cast<std::uint32_t>(x);
}

}  // namespace

ImageDescription describe(const Raster& r, const SegParams& p, const RelationParams& rp) {
  std::vector<LevelSegmentation> segs = extract_segments(r, p);
  const int n = static_cast<int>(segs.size());

  ImageDescription d;
  d.meta.width = r.width;
  d.meta.height = r.height;
  d.meta.params = p;
  d.meta.centroid_gap = rp.centroid_gap;
  d.levels.resize(n);
  for (int i = 0; i < n; ++i) {
    LevelDescription& lv = d.levels[i];
    lv.level = n - 1 - i;
    lv.width = segs[i].labels.width;
    lv.height = segs[i].labels.height;
    const LabelMap* coarse = (i > 0) ? &segs[i - 1].labels : nullptr;
    lv.regions = register_level(lv.level, segs[i].labels, segs[i].stats, coarse);
    compute_relations(lv.regions, segs[i].labels, rp);
    lv.support = rle_encode(segs[i].labels);
  }
  return d;
}

Raster reconstruct(const ImageDescription& d, int level) {
  const LevelDescription* lv = nullptr;
  for (const LevelDescription& l : d.levels)
    if (l.level == level) lv = &l;
  if (!lv)
    throw UnknownLevel("description has no level " + std::to_string(level));

  std::map<std::uint32_t, std::uint8_t> paint;
  for (const RegionDescriptor& r : lv->regions) {
    long v = std::lround(r.mean_intensity);
    paint[r.label] = static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
  }

  Raster out;
  out.width = lv->width;
  out.height = lv->height;
  out.pixels.reserve(out.pixel_count());
  for (const auto& [label, len] : lv->support.runs)
    out.pixels.insert(out.pixels.end(), static_cast<std::size_t>(len), paint.at(label));
  return out;
}

std::string serialize(const ImageDescription& d) {
  std::string out;
  out.reserve(4096);
  out += "{\"version\":\"";
  out += kDescriptionFormatVersion;
  out += "\",\"meta\":{\"width\":";
  out += std::to_string(d.meta.width);
  out += ",\"height\":";
  out += std::to_string(d.meta.height);
  out += ",\"params\":{\"tau_seg\":";
  out += canon::real6(d.meta.params.tau_seg);
  out += ",\"tau_refine\":";
  out += canon::real6(d.meta.params.tau_refine);
  out += ",\"min_seed\":";
  out += std::to_string(d.meta.params.min_seed);
  out += ",\"max_refine_passes\":";
  out += std::to_string(d.meta.params.max_refine_passes);
  out += ",\"top_max_pixels\":";
  out += std::to_string(d.meta.params.top_max_pixels);
  out += ",\"centroid_gap\":";
  out += canon::real6(d.meta.centroid_gap);
  out += "}},\"levels\":[";
  const int n = static_cast<int>(d.levels.size());
  for (int i = 0; i < n; ++i) {
    if (i) out += ',';
    const LevelDescription& lv = d.levels[i];
    out += "{\"level\":";
    out += std::to_string(lv.level);
    out += ",\"width\":";
    out += std::to_string(lv.width);
    out += ",\"height\":";
    out += std::to_string(lv.height);
    out += ",\"regions\":";
    append_regions(out, lv, i == 0);
    out += ",\"support\":";
    append_support(out, lv);
    out += '}';
  }
  out += ']';
  if (d.density) {
    out += ",\"density\":[";
    for (std::size_t i = 0; i < d.density->size(); ++i) {
      if (i) out += ',';
      out += canon::real6((*d.density)[i]);
    }
    out += ']';
  }
  out += '}';
  return out;
}

ImageDescription deserialize(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("top level must be an object");

  const std::string version = as_string(require_key(doc, "version", "document"), "version");
  if (version != kDescriptionFormatVersion)
    throw VersionError("unsupported description version '" + version + "'");

  ImageDescription d;
  const json& meta = require_key(doc, "meta", "document");
  d.meta.width = static_cast<int>(as_int(require_key(meta, "width", "meta"), "meta.width"));
  d.meta.height = static_cast<int>(as_int(require_key(meta, "height", "meta"), "meta.height"));
  if (d.meta.width < 1 || d.meta.height < 1)
    throw InvariantViolation("meta dims must be positive");
  if (d.meta.width > (1 << 20) || d.meta.height > (1 << 20) ||
      static_cast<std::int64_t>(d.meta.width) * d.meta.height > (1LL << 28))
    throw InvariantViolation("meta dims unreasonably large");

  const json& params = require_key(meta, "params", "meta");
  d.meta.params.tau_seg = as_real(require_key(params, "tau_seg", "params"), "tau_seg");
  d.meta.params.tau_refine = as_real(require_key(params, "tau_refine", "params"), "tau_refine");
  d.meta.params.min_seed =
      static_cast<int>(as_int(require_key(params, "min_seed", "params"), "min_seed"));
  d.meta.params.max_refine_passes = static_cast<int>(
      as_int(require_key(params, "max_refine_passes", "params"), "max_refine_passes"));
  d.meta.params.top_max_pixels = static_cast<int>(
      as_int(require_key(params, "top_max_pixels", "params"), "top_max_pixels"));
  d.meta.centroid_gap = as_real(require_key(params, "centroid_gap", "params"), "centroid_gap");
  if (d.meta.params.tau_seg < 0 || d.meta.params.tau_refine < 0 ||
      d.meta.params.min_seed < 1 || d.meta.params.max_refine_passes < 1 ||
      d.meta.params.top_max_pixels < 1)
    throw InvariantViolation("params out of range");

  const std::vector<std::pair<int, int>> implied =
      implied_level_dims(d.meta.width, d.meta.height, d.meta.params.top_max_pixels);

  const json& levels = require_key(doc, "levels", "document");
  if (!levels.is_array() || levels.empty())
    throw SchemaError("levels must be a non-empty array");
  const int n = static_cast<int>(levels.size());
  if (n != static_cast<int>(implied.size()))
    throw InvariantViolation("level count " + std::to_string(n) +
                             " does not match the pyramid implied by dims and params (" +
                             std::to_string(implied.size()) + ")");

  for (int i = 0; i < n; ++i) {
    const json& jl = levels[i];
    LevelDescription lv;
    lv.level = static_cast<int>(as_int(require_key(jl, "level", "level entry"), "level"));
    lv.width = static_cast<int>(as_int(require_key(jl, "width", "level entry"), "width"));
    lv.height = static_cast<int>(as_int(require_key(jl, "height", "level entry"), "height"));
    if (lv.level != n - 1 - i)
      throw InvariantViolation("level indices must descend from top to 0");
    if (lv.width != implied[lv.level].first || lv.height != implied[lv.level].second)
      throw InvariantViolation("level " + std::to_string(lv.level) +
                               " dims do not follow the halving law");
    const double pixel_total = static_cast<double>(lv.width) * lv.height;

    const json& regions = require_key(jl, "regions", "level entry");
    if (!regions.is_array() || regions.empty())
      throw SchemaError("regions must be a non-empty array");
    std::uint32_t prev_label = 0;
    std::map<std::uint32_t, std::int64_t> area_by_label;
    for (const json& jr : regions) {
      RegionDescriptor rd;
      rd.level = lv.level;
      rd.label = as_label(require_key(jr, "label", "region"), "region.label");
      rd.area = as_int(require_key(jr, "area", "region"), "region.area");
      rd.area_fraction =
          as_real(require_key(jr, "area_fraction", "region"), "region.area_fraction");
      const json& cj = require_key(jr, "centroid", "region");
      if (!cj.is_array() || cj.size() != 2)
        throw SchemaError("region.centroid must be a 2-element array");
      rd.centroid_x = as_real(cj[0], "centroid.x");
      rd.centroid_y = as_real(cj[1], "centroid.y");
      rd.mean_intensity =
          as_real(require_key(jr, "mean_intensity", "region"), "region.mean_intensity");

      if (rd.label <= prev_label)
        throw InvariantViolation("region labels must be ascending and >= 1");
      prev_label = rd.label;
      if (rd.area < 1) throw InvariantViolation("region area must be >= 1");
      if (std::abs(rd.area_fraction - rd.area / pixel_total) > 1e-6)
        throw InvariantViolation("area_fraction inconsistent with area");
      if (rd.centroid_x < 0 || rd.centroid_x > 1 || rd.centroid_y < 0 || rd.centroid_y > 1)
        throw InvariantViolation("centroid out of [0,1]");
      if (rd.mean_intensity < 0 || rd.mean_intensity > 255)
        throw InvariantViolation("mean_intensity out of [0,255]");

      if (i == 0) {
        if (jr.contains("parent"))
          throw InvariantViolation("top level regions cannot have a parent");
      } else {
        rd.parent = as_label(require_key(jr, "parent", "region"), "region.parent");
      }

      const json& rels = require_key(jr, "relations", "region");
      if (!rels.is_array()) throw SchemaError("region.relations must be an array");
      for (const json& jrel : rels) {
        Relation rel;
        auto kind = relation_kind_from_name(
            as_string(require_key(jrel, "kind", "relation"), "relation.kind"));
        if (!kind) throw SchemaError("unknown relation kind");
        rel.kind = *kind;
        rel.target = as_label(require_key(jrel, "target", "relation"), "relation.target");
        rel.strength = as_real(require_key(jrel, "strength", "relation"), "relation.strength");
        if (rel.strength <= 0 || rel.strength > 1)
          throw InvariantViolation("relation strength out of (0,1]");
        rd.relations.push_back(rel);
      }
      area_by_label[rd.label] = rd.area;
      lv.regions.push_back(std::move(rd));
    }

    const json& support = require_key(jl, "support", "level entry");
    if (!support.is_array() || support.empty())
      throw SchemaError("support must be a non-empty array");
    std::int64_t total = 0;
    std::uint32_t prev_run_label = 0;
    std::map<std::uint32_t, std::int64_t> run_total;
    for (const json& jrun : support) {
      if (!jrun.is_array() || jrun.size() != 2)
        throw SchemaError("support runs must be [label, length] pairs");
      const std::uint32_t label = as_label(jrun[0], "run label");
      const std::int64_t len = as_int(jrun[1], "run length");
      if (len < 1) throw InvariantViolation("run length must be >= 1");
      if (label == prev_run_label)
        throw InvariantViolation("consecutive runs share a label");
      prev_run_label = label;
      total += len;
      run_total[label] += len;
      lv.support.runs.emplace_back(label, len);
    }
    if (total != static_cast<std::int64_t>(lv.width) * lv.height)
      throw InvariantViolation("support runs sum to " + std::to_string(total) +
                               ", expected " +
                               std::to_string(static_cast<std::int64_t>(lv.width) * lv.height));
    if (run_total.size() != area_by_label.size())
      throw InvariantViolation("support labels do not match region labels");
    for (const auto& [label, area] : area_by_label) {
      auto it = run_total.find(label);
      if (it == run_total.end() || it->second != area)
        throw InvariantViolation("support footprint disagrees with region area for label " +
                                 std::to_string(label));
    }

    d.levels.push_back(std::move(lv));
  }

  // Cross-level checks: relation targets must resolve.
  for (int i = 0; i < n; ++i) {
    const LevelDescription& lv = d.levels[i];
    std::set<std::uint32_t> here;
    for (const RegionDescriptor& rd : lv.regions) here.insert(rd.label);
    std::set<std::uint32_t> up;
    if (i > 0)
      for (const RegionDescriptor& rd : d.levels[i - 1].regions) up.insert(rd.label);
    for (const RegionDescriptor& rd : lv.regions) {
      if (rd.parent && !up.count(*rd.parent))
        throw InvariantViolation("parent label missing at level above");
      for (const Relation& rel : rd.relations) {
        if (rel.kind == RelationKind::sub_part_of) {
          if (i == 0 || !up.count(rel.target))
            throw InvariantViolation("sub_part_of target missing at level above");
        } else if (!here.count(rel.target) || rel.target == rd.label) {
          throw InvariantViolation("relation target missing at this level");
        }
      }
    }
  }

  if (doc.contains("density")) {
    const json& jd = doc["density"];
    if (!jd.is_array() || static_cast<int>(jd.size()) != n)
      throw SchemaError("density must be an array with one entry per level");
    std::vector<double> dens;
    for (const json& v : jd) {
      const double x = as_real(v, "density value");
      if (x <= 0) throw InvariantViolation("density values must be positive");
      dens.push_back(x);
    }
    d.density = std::move(dens);
  }

  return d;
}

std::vector<DensityEntry> density_profile(const ImageDescription& d) {
  std::vector<DensityEntry> out;
  out.reserve(d.levels.size());
  for (std::size_t i = 0; i < d.levels.size(); ++i) {
    const LevelDescription& lv = d.levels[i];
    std::string bytes;
    append_regions(bytes, lv, i == 0);
    append_support(bytes, lv);
    DensityEntry e;
    e.level = lv.level;
    e.width = lv.width;
    e.height = lv.height;
    e.bytes = bytes.size();
    e.density = static_cast<double>(e.bytes) /
                (static_cast<double>(lv.width) * lv.height);
    out.push_back(e);
  }
  return out;
}

void attach_density(ImageDescription& d) {
  std::vector<double> dens;
  for (const DensityEntry& e : density_profile(d)) dens.push_back(canon::quantize6(e.density));
  d.density = std::move(dens);
}

}  // namespace infoscribe
