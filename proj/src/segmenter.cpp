#include "infoscribe/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "infoscribe/errors.hpp"
#include "infoscribe/pyramid.hpp"

namespace infoscribe {

namespace {

// Exact per-region statistics from the level raster. One pass, ascending
// label order in the output, dead labels skipped.
RegionStats compute_stats(const LabelMap& lm, const Raster& ref) {
  std::vector<std::int64_t> count(lm.next_label, 0);
  std::vector<double> sum_v(lm.next_label, 0.0);
  std::vector<double> sum_x(lm.next_label, 0.0);
  std::vector<double> sum_y(lm.next_label, 0.0);
  std::size_t idx = 0;
  for (int y = 0; y < lm.height; ++y) {
    for (int x = 0; x < lm.width; ++x, ++idx) {
      std::uint32_t l = lm.labels[idx];
      ++count[l];
      sum_v[l] += ref.pixels[idx];
      sum_x[l] += x;
      sum_y[l] += y;
    }
  }
  RegionStats rs;
  for (std::uint32_t l = 1; l < lm.next_label; ++l) {
    if (count[l] == 0) continue;
    RegionStat s;
    s.label = l;
    s.pixel_count = count[l];
    s.mean_intensity = sum_v[l] / count[l];
    s.centroid_x = sum_x[l] / count[l];
    s.centroid_y = sum_y[l] / count[l];
    rs.regions.push_back(s);
  }
  return rs;
}

}  // namespace

const RegionStat* RegionStats::find(std::uint32_t label) const {
  auto it = std::lower_bound(regions.begin(), regions.end(), label,
                             [](const RegionStat& s, std::uint32_t l) { return s.label < l; });
  if (it == regions.end() || it->label != label) return nullptr;
  return &*it;
}

LevelSegmentation segment_top(const Raster& r, const SegParams& p) {
  const int w = r.width;
  const int h = r.height;
  const std::size_t n = r.pixel_count();

  LabelMap lm;
  lm.width = w;
  lm.height = h;
  lm.labels.assign(n, 0);

  std::uint32_t next = 1;
  std::vector<std::size_t> queue;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (lm.labels[seed] != 0) continue;
    const std::uint32_t label = next++;
    lm.labels[seed] = label;
    double sum = r.pixels[seed];
    std::int64_t count = 1;
    queue.clear();
    queue.push_back(seed);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t idx = queue[head];
      const int x = static_cast<int>(idx % w);
      const int y = static_cast<int>(idx / w);
      // Fixed visit order: up, left, right, down.
      const std::ptrdiff_t nb[4] = {
          y > 0 ? static_cast<std::ptrdiff_t>(idx) - w : -1,
          x > 0 ? static_cast<std::ptrdiff_t>(idx) - 1 : -1,
          x + 1 < w ? static_cast<std::ptrdiff_t>(idx) + 1 : -1,
          y + 1 < h ? static_cast<std::ptrdiff_t>(idx) + w : -1,
      };
      for (int j = 0; j < 4; ++j) {
        if (nb[j] < 0) continue;
        const std::size_t ni = static_cast<std::size_t>(nb[j]);
        if (lm.labels[ni] != 0) continue;
        const double mean = sum / static_cast<double>(count);
        if (std::abs(r.pixels[ni] - mean) <= p.tau_seg) {
          lm.labels[ni] = label;
          sum += r.pixels[ni];
          ++count;
          queue.push_back(ni);
        }
      }
    }
  }
  lm.next_label = next;

  LevelSegmentation out;
  out.stats = compute_stats(lm, r);
  out.labels = std::move(lm);
  return out;
}

LevelSegmentation expand_level(const LevelSegmentation& coarse, const Raster& ref,
                               const SegParams& p, ExpandDiag* diag) {
  const int w = ref.width;
  const int h = ref.height;
  const int cw = coarse.labels.width;
  const int ch = coarse.labels.height;
  if ((w + 1) / 2 != cw || (h + 1) / 2 != ch)
    throw DimensionMismatch("ref " + std::to_string(w) + "x" + std::to_string(h) +
                            " is not the halving preimage of coarse " + std::to_string(cw) +
                            "x" + std::to_string(ch));

  const std::size_t n = ref.pixel_count();
  LabelMap lm;
  lm.width = w;
  lm.height = h;
  lm.labels.resize(n);
  std::uint32_t next = coarse.labels.next_label;

  // Step 1: nearest-neighbor upscale of the coarse labels.
  for (int y = 0; y < h; ++y) {
    const std::uint32_t* crow = coarse.labels.labels.data() +
                                static_cast<std::size_t>(y / 2) * cw;
    std::uint32_t* row = lm.labels.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) row[x] = crow[x / 2];
  }

  // Region means, seeded from the coarse stats for the first pass.
  std::vector<double> mean(next, 0.0);
  std::vector<double> msum(next, 0.0);
  std::vector<std::int64_t> mcount(next, 0);
  for (const RegionStat& s : coarse.stats.regions) mean[s.label] = s.mean_intensity;

  // Step 2: a pixel is deviant when its ref intensity strays from the
  // inherited region mean by more than tau_refine.
  std::vector<std::uint8_t> deviant(n, 0);
  std::size_t deviant_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(ref.pixels[i] - mean[lm.labels[i]]) > p.tau_refine) {
      deviant[i] = 1;
      ++deviant_count;
    }
  }

  auto recompute_means = [&]() {
    std::fill(msum.begin(), msum.end(), 0.0);
    std::fill(mcount.begin(), mcount.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (deviant[i]) continue;
      msum[lm.labels[i]] += ref.pixels[i];
      ++mcount[lm.labels[i]];
    }
    for (std::uint32_t l = 1; l < next; ++l)
      if (mcount[l] > 0) mean[l] = msum[l] / static_cast<double>(mcount[l]);
  };

  // Step 3: refinement passes. Adoption is visible immediately within a
  // pass; means are frozen per pass and recomputed from ref between passes.
  for (int pass = 0; pass < p.max_refine_passes && deviant_count > 0; ++pass) {
    if (diag) diag->deviant_per_pass.push_back(static_cast<int>(deviant_count));
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!deviant[i]) continue;
      const int x = static_cast<int>(i % w);
      const int y = static_cast<int>(i / w);
      const std::ptrdiff_t nb[4] = {
          y > 0 ? static_cast<std::ptrdiff_t>(i) - w : -1,
          x > 0 ? static_cast<std::ptrdiff_t>(i) - 1 : -1,
          x + 1 < w ? static_cast<std::ptrdiff_t>(i) + 1 : -1,
          y + 1 < h ? static_cast<std::ptrdiff_t>(i) + w : -1,
      };
      double best_d = std::numeric_limits<double>::infinity();
      std::uint32_t best_label = 0;
      for (int j = 0; j < 4; ++j) {
        if (nb[j] < 0) continue;
        const std::size_t ni = static_cast<std::size_t>(nb[j]);
        if (deviant[ni]) continue;
        const std::uint32_t l = lm.labels[ni];
        const double d = std::abs(ref.pixels[i] - mean[l]);
        if (d < best_d || (d == best_d && l < best_label)) {
          best_d = d;
          best_label = l;
        }
      }
      if (best_label != 0 && best_d <= p.tau_refine) {
        lm.labels[i] = best_label;
        deviant[i] = 0;
        --deviant_count;
        changed = true;
      }
    }
    if (!changed) break;
    recompute_means();
  }

  // Step 4a: group still-deviant pixels into components. Two 4-adjacent
  // deviant pixels are linked only when their ref intensities are within
  // tau_refine, so intensity steps larger than the tolerance split seeds.
  std::vector<std::vector<std::size_t>> components;
  if (deviant_count > 0) {
    std::vector<std::uint8_t> visited(n, 0);
    std::vector<std::size_t> queue;
    for (std::size_t start = 0; start < n; ++start) {
      if (!deviant[start] || visited[start]) continue;
      visited[start] = 1;
      queue.clear();
      queue.push_back(start);
      std::vector<std::size_t> comp;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        const std::size_t i = queue[head];
        comp.push_back(i);
        const int x = static_cast<int>(i % w);
        const int y = static_cast<int>(i / w);
        const std::ptrdiff_t nb[4] = {
            y > 0 ? static_cast<std::ptrdiff_t>(i) - w : -1,
            x > 0 ? static_cast<std::ptrdiff_t>(i) - 1 : -1,
            x + 1 < w ? static_cast<std::ptrdiff_t>(i) + 1 : -1,
            y + 1 < h ? static_cast<std::ptrdiff_t>(i) + w : -1,
        };
        for (int j = 0; j < 4; ++j) {
          if (nb[j] < 0) continue;
          const std::size_t ni = static_cast<std::size_t>(nb[j]);
          if (!deviant[ni] || visited[ni]) continue;
          if (std::abs(static_cast<int>(ref.pixels[i]) - static_cast<int>(ref.pixels[ni])) <=
              p.tau_refine) {
            visited[ni] = 1;
            queue.push_back(ni);
          }
        }
      }
      components.push_back(std::move(comp));
    }
  }

  // Step 4b: components large enough become new regions, in discovery order.
  std::vector<const std::vector<std::size_t>*> small;
  for (const auto& comp : components) {
    if (comp.size() >= static_cast<std::size_t>(p.min_seed)) {
      const std::uint32_t label = next++;
      mean.push_back(0.0);
      msum.push_back(0.0);
      mcount.push_back(0);
      for (std::size_t i : comp) {
        lm.labels[i] = label;
        deviant[i] = 0;
      }
      if (diag) ++diag->seeded_regions;
    } else {
      small.push_back(&comp);
    }
  }
  recompute_means();

  // Step 4c: sub-min_seed components are force-assigned to the adjacent
  // region with the nearest mean so the partition stays total. Means are
  // maintained incrementally so later components see earlier assignments.
  for (const auto* compp : small) {
    const auto& comp = *compp;
    double vsum = 0.0;
    for (std::size_t i : comp) vsum += ref.pixels[i];
    const double comp_mean = vsum / static_cast<double>(comp.size());

    double best_d = std::numeric_limits<double>::infinity();
    std::uint32_t best_label = 0;
    for (std::size_t i : comp) {
      const int x = static_cast<int>(i % w);
      const int y = static_cast<int>(i / w);
      const std::ptrdiff_t nb[4] = {
          y > 0 ? static_cast<std::ptrdiff_t>(i) - w : -1,
          x > 0 ? static_cast<std::ptrdiff_t>(i) - 1 : -1,
          x + 1 < w ? static_cast<std::ptrdiff_t>(i) + 1 : -1,
          y + 1 < h ? static_cast<std::ptrdiff_t>(i) + w : -1,
      };
      for (int j = 0; j < 4; ++j) {
        if (nb[j] < 0) continue;
        const std::size_t ni = static_cast<std::size_t>(nb[j]);
        if (deviant[ni]) continue;
        const std::uint32_t l = lm.labels[ni];
        if (mcount[l] == 0) continue;
        const double d = std::abs(comp_mean - mean[l]);
        if (d < best_d || (d == best_d && l < best_label)) {
          best_d = d;
          best_label = l;
        }
      }
    }
    if (best_label == 0) {
      // No assigned region touches this component (fully deviant level);
      // promote it so every pixel still ends up labeled.
      best_label = next++;
      mean.push_back(0.0);
      msum.push_back(0.0);
      mcount.push_back(0);
    }
    for (std::size_t i : comp) {
      lm.labels[i] = best_label;
      deviant[i] = 0;
      msum[best_label] += ref.pixels[i];
      ++mcount[best_label];
    }
    mean[best_label] = msum[best_label] / static_cast<double>(mcount[best_label]);
    if (diag) ++diag->forced_components;
  }

  // Step 4d: adjacent regions whose exact means coincide at the stored
  // attribute resolution describe the same content; fold them into the
  // lowest label. Without this, a constant patch that reached the top as
  // two fragments would stay split forever (neither side ever deviates).
  {
    std::fill(msum.begin(), msum.end(), 0.0);
    std::fill(mcount.begin(), mcount.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      msum[lm.labels[i]] += ref.pixels[i];
      ++mcount[lm.labels[i]];
    }
    for (std::uint32_t l = 1; l < next; ++l)
      if (mcount[l] > 0) mean[l] = msum[l] / static_cast<double>(mcount[l]);

    std::vector<std::uint32_t> root(next);
    for (std::uint32_t l = 0; l < next; ++l) root[l] = l;
    auto find = [&](std::uint32_t l) {
      while (root[l] != l) {
        root[l] = root[root[l]];
        l = root[l];
      }
      return l;
    };
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int x = static_cast<int>(i % w);
      const std::uint32_t a = lm.labels[i];
      if (x + 1 < w) {
        const std::uint32_t b = lm.labels[i + 1];
        if (a != b && std::abs(mean[a] - mean[b]) <= 1e-6) {
          const std::uint32_t ra = find(a), rb = find(b);
          if (ra != rb) {
            root[std::max(ra, rb)] = std::min(ra, rb);
            any = true;
          }
        }
      }
      if (i + w < n) {
        const std::uint32_t b = lm.labels[i + w];
        if (a != b && std::abs(mean[a] - mean[b]) <= 1e-6) {
          const std::uint32_t ra = find(a), rb = find(b);
          if (ra != rb) {
            root[std::max(ra, rb)] = std::min(ra, rb);
            any = true;
          }
        }
      }
    }
    if (any)
      for (std::size_t i = 0; i < n; ++i) lm.labels[i] = find(lm.labels[i]);
  }

  lm.next_label = next;

  // Step 5: exact stats from ref.
  LevelSegmentation out;
  out.stats = compute_stats(lm, ref);
  out.labels = std::move(lm);
  return out;
}

std::vector<LevelSegmentation> extract_segments(const Raster& r, const SegParams& p) {
  Pyramid pyr = build_pyramid(r, p.top_max_pixels);
  std::vector<LevelSegmentation> out;
  out.reserve(pyr.levels.size());
  out.push_back(segment_top(pyr.top(), p));
  for (int k = pyr.level_count() - 2; k >= 0; --k)
    out.push_back(expand_level(out.back(), pyr.levels[k], p));
  return out;
}

}  // namespace infoscribe
