#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "altmap/raster.hpp"
#include "altmap/samples.hpp"

namespace altmap {

struct DatasetSplit {
  SampleTable train;
  SampleTable test;
  std::uint64_t seed = 0;
  double ratio = 0.7;
};

// One row per masked pixel with its band vector, plus a seeded uniform draw of
// `background_count` class-0 rows from pixels at least 2 px (dilation) away
// from every mask. Masks must be disjoint.
SampleTable build_dataset(const RasterStack& stack,
                          const std::vector<std::pair<int, ClassMap>>& class_masks,
                          int background_count, std::uint64_t seed);

// Labeled pixels of a class map turned into samples directly (no background
// sampling; the map's 0 pixels are ignored).
SampleTable samples_from_class_map(const RasterStack& stack, const ClassMap& map);

// Stratified 70/30-style split with a seeded shuffle per class.
DatasetSplit split_dataset(const SampleTable& table, double ratio, std::uint64_t seed);

}  // namespace altmap
