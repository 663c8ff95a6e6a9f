#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "altmap/raster.hpp"

namespace altmap {

using Rgb = std::array<std::uint8_t, 3>;
using Palette = std::map<int, Rgb>;

// 0 background, 1 argillic, 2 iron oxide, 3 propylitic.
Palette default_palette();

// Writes an 8-bit indexed PNG; every label present must have a palette entry.
void render_class_map(const ClassMap& map, const Palette& palette, const std::string& path);

struct DecodedImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;  // row-major
};

// Reads any 8-bit PNG back as RGB (palette expanded).
DecodedImage decode_png(const std::string& path);

}  // namespace altmap
