#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "altmap/geometry.hpp"
#include "altmap/raster.hpp"

namespace altmap {

struct ZoneSpec {
  int class_label = 1;
  std::string shape = "disk";         // disk | polygon
  double cx = 0.0, cy = 0.0, radius = 0.0;  // disk params (pixel coordinates)
  std::vector<Point> ring;            // polygon params (pixel coordinates)
};

// Deterministic multispectral scene with planted zones: pixel spectrum is the
// zone mean (linearly blended over mixing_width px at borders) plus seeded
// Gaussian band noise. The truth map uses the crisp pre-blend geometry.
struct SceneSpec {
  int width = 256;
  int height = 256;
  int bands = 7;
  std::vector<std::vector<double>> class_means;  // [class][band], index 0 = background
  double noise_stddev = 0.01;
  double mixing_width = 0.0;
  bool smooth_noise = false;  // 3x3 box-smoothed noise option
  std::vector<ZoneSpec> zones;
  std::uint64_t seed = 0;

  std::string to_json() const;
  static SceneSpec from_json(const std::string& text);
  static SceneSpec from_file(const std::string& path);
};

struct Scene {
  RasterStack stack;
  ClassMap truth;
};

Scene generate_scene(const SceneSpec& spec);

}  // namespace altmap
