#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace altmap {

// Georeferenced multiband float grid, band-sequential (BSQ) row-major.
// transform = {origin-x, pixel-width, 0, origin-y, 0, -pixel-height}.
struct RasterStack {
  int width = 0;
  int height = 0;
  int bands = 0;
  std::vector<float> data;  // size width*height*bands
  std::array<double, 6> transform{0.0, 1.0, 0.0, 0.0, 0.0, -1.0};
  std::string crs;
  std::optional<float> nodata;

  std::size_t index(int col, int row, int band) const {
    return (static_cast<std::size_t>(band) * height + row) * width + col;
  }
  float at(int col, int row, int band) const { return data[index(col, row, band)]; }
  float& at(int col, int row, int band) { return data[index(col, row, band)]; }

  bool is_nodata(float v) const { return nodata && v == *nodata; }
  bool pixel_is_nodata(int col, int row) const {
    if (!nodata) return false;
    for (int b = 0; b < bands; ++b)
      if (at(col, row, b) == *nodata) return true;
    return false;
  }

  // Map coordinates of a pixel center.
  std::array<double, 2> pixel_center(int col, int row) const {
    return {transform[0] + (col + 0.5) * transform[1] + (row + 0.5) * transform[2],
            transform[3] + (col + 0.5) * transform[4] + (row + 0.5) * transform[5]};
  }

  void validate() const;  // throws Error on any invariant violation
};

// Per-pixel class labels; 0 is background/unclassified.
struct ClassMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;
  std::array<double, 6> transform{0.0, 1.0, 0.0, 0.0, 0.0, -1.0};
  std::string crs;

  std::uint8_t at(int col, int row) const { return labels[static_cast<std::size_t>(row) * width + col]; }
  std::uint8_t& at(int col, int row) { return labels[static_cast<std::size_t>(row) * width + col]; }
};

// Native format: <path>.hdr text header + <path>.bin little-endian float32 payload.
RasterStack read_stack(const std::string& path);
void write_stack(const RasterStack& stack, const std::string& path);

// ClassMap persisted as a single-band stack with integer-valued floats.
RasterStack class_map_to_raster(const ClassMap& map);
ClassMap class_map_from_raster(const RasterStack& stack);

}  // namespace altmap
