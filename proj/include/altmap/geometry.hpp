#pragma once

#include <array>
#include <string>
#include <vector>

#include "altmap/raster.hpp"

namespace altmap {

using Point = std::array<double, 2>;

struct Polygon {
  int class_label = 0;            // 1..C-1, 0 reserved for background
  std::vector<Point> ring;        // closed: first == last
};

struct PolygonSet {
  std::vector<Polygon> polygons;
};

// JSON format: {"polygons":[{"class":<int>,"ring":[[x,y],...]},...]}
PolygonSet read_polygons(const std::string& path);
void write_polygons(const PolygonSet& polys, const std::string& path);

// Even-odd rule on the open ring (last vertex dropped).
bool point_in_ring(const std::vector<Point>& ring, double x, double y);

// Pixel centers inside any ring of class c get label c. Overlaps between
// classes are resolved by `priority`: earlier entries win. An empty priority
// list defaults to the order classes first appear in the polygon set.
ClassMap rasterize_polygons(const PolygonSet& polys, const RasterStack& grid,
                            const std::vector<int>& priority = {});

}  // namespace altmap
