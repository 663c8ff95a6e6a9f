#include "altmap/labelgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "altmap/error.hpp"
#include "altmap/rng.hpp"

namespace altmap {

static std::vector<float> pixel_vector(const RasterStack& stack, int col, int row) {
  std::vector<float> v(stack.bands);
  for (int b = 0; b < stack.bands; ++b) v[b] = stack.at(col, row, b);
  return v;
}

SampleTable build_dataset(const RasterStack& stack,
                          const std::vector<std::pair<int, ClassMap>>& class_masks,
                          int background_count, std::uint64_t seed) {
  const std::size_t plane = static_cast<std::size_t>(stack.width) * stack.height;
  std::vector<std::uint8_t> taken(plane, 0);  // union of all masks
  SampleTable table;

  for (const auto& [cls, mask] : class_masks) {
    require(cls >= 1, "mask class must be >= 1");
    require(mask.width == stack.width && mask.height == stack.height,
            "mask dimensions do not match raster");
    for (int r = 0; r < stack.height; ++r) {
      for (int c = 0; c < stack.width; ++c) {
        if (mask.at(c, r) == 0) continue;
        const std::size_t i = static_cast<std::size_t>(r) * stack.width + c;
        require(!taken[i], "class masks overlap at pixel (" + std::to_string(c) + "," +
                               std::to_string(r) + ")");
        taken[i] = 1;
        if (stack.pixel_is_nodata(c, r)) continue;
        table.rows.push_back({c, r, cls, pixel_vector(stack, c, r)});
      }
    }
  }

  // Background candidates: >= 2 px Chebyshev distance from every masked pixel.
  std::vector<std::size_t> candidates;
  for (int r = 0; r < stack.height; ++r) {
    for (int c = 0; c < stack.width; ++c) {
      if (stack.pixel_is_nodata(c, r)) continue;
      bool clear = true;
      for (int dr = -2; dr <= 2 && clear; ++dr) {
        for (int dc = -2; dc <= 2 && clear; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || rr >= stack.height || cc < 0 || cc >= stack.width) continue;
          if (taken[static_cast<std::size_t>(rr) * stack.width + cc]) clear = false;
        }
      }
      if (clear) candidates.push_back(static_cast<std::size_t>(r) * stack.width + c);
    }
  }
  require(static_cast<int>(candidates.size()) >= background_count,
          "insufficient background pixels: need " + std::to_string(background_count) +
              ", have " + std::to_string(candidates.size()));

  Rng rng(derive_seed(seed, "background-sampling"));
  std::shuffle(candidates.begin(), candidates.end(), rng);
  candidates.resize(background_count);
  std::sort(candidates.begin(), candidates.end());
  for (std::size_t i : candidates) {
    const int c = static_cast<int>(i % stack.width);
    const int r = static_cast<int>(i / stack.width);
    table.rows.push_back({c, r, 0, pixel_vector(stack, c, r)});
  }
  table.validate();
  return table;
}

SampleTable samples_from_class_map(const RasterStack& stack, const ClassMap& map) {
  require(map.width == stack.width && map.height == stack.height,
          "class map dimensions do not match raster");
  SampleTable table;
  for (int r = 0; r < stack.height; ++r)
    for (int c = 0; c < stack.width; ++c)
      if (map.at(c, r) != 0 && !stack.pixel_is_nodata(c, r))
        table.rows.push_back({c, r, map.at(c, r), pixel_vector(stack, c, r)});
  return table;
}

DatasetSplit split_dataset(const SampleTable& table, double ratio, std::uint64_t seed) {
  require(ratio > 0.0 && ratio < 1.0, "split ratio must be in (0,1)");
  table.validate();

  std::vector<int> counts = table.class_counts();
  std::vector<std::vector<std::size_t>> by_class(counts.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    by_class[table.rows[i].class_label].push_back(i);
  for (std::size_t c = 0; c < by_class.size(); ++c)
    require(by_class[c].empty() || by_class[c].size() >= 2,
            "class " + std::to_string(c) + " has only one sample; cannot split");

  DatasetSplit split;
  split.seed = seed;
  split.ratio = ratio;
  Rng rng(derive_seed(seed, "train-test-split"));
  for (auto& idx : by_class) {
    if (idx.empty()) continue;
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t ntrain = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(ratio * static_cast<double>(idx.size()))), 1,
        idx.size() - 1);
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < ntrain ? split.train : split.test).rows.push_back(table.rows[idx[i]]);
  }
  return split;
}

}  // namespace altmap
