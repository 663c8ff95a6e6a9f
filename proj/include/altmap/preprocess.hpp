#pragma once

#include <string>
#include <vector>

#include "altmap/raster.hpp"

namespace altmap {

enum class ScalingMode { MinMax01, ZScore };

// Per-band rescaling statistics, fitted on training imagery only and reused
// verbatim at prediction time.
struct ScalingParams {
  ScalingMode mode = ScalingMode::MinMax01;
  // minmax: a=min, b=max; zscore: a=mean, b=stddev (population)
  std::vector<double> a;
  std::vector<double> b;

  std::string to_json() const;
  static ScalingParams from_json(const std::string& text);
};

// Square spectral-spatial neighborhood centered on a pixel, S odd,
// values S*S*bands row-major with channels last.
struct Patch {
  int col = 0;
  int row = 0;
  int size = 0;
  int bands = 0;
  std::vector<float> values;

  float at(int y, int x, int b) const {
    return values[(static_cast<std::size_t>(y) * size + x) * bands + b];
  }
};

RasterStack select_bands(const RasterStack& stack, const std::vector<int>& indices);
ScalingParams fit_scaling(const RasterStack& stack, ScalingMode mode);
RasterStack apply_scaling(const RasterStack& stack, const ScalingParams& params);
RasterStack resample_nearest(const RasterStack& stack, int factor);

// Reflect-101 padding at edges (edge pixel not duplicated).
Patch extract_patch(const RasterStack& stack, int col, int row, int size);

// Reflect-101 index into [0, n).
int reflect_index(int i, int n);

}  // namespace altmap
