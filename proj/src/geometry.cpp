#include "altmap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include <json.hpp>

#include "altmap/error.hpp"

namespace altmap {

static void normalize_closure(Polygon& p) {
  require(p.ring.size() >= 3, "polygon ring needs at least 3 vertices");
  if (p.ring.front() != p.ring.back()) p.ring.push_back(p.ring.front());
  require(p.ring.size() >= 4, "polygon ring needs at least 3 distinct vertices");
}

PolygonSet read_polygons(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open polygon file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed polygon file " + path + ": " + e.what());
  }
  require(j.contains("polygons") && j["polygons"].is_array(),
          "polygon file must contain a \"polygons\" array");
  PolygonSet set;
  for (const auto& pj : j["polygons"]) {
    Polygon p;
    require(pj.contains("class") && pj.contains("ring"), "polygon entry needs class and ring");
    p.class_label = pj["class"].get<int>();
    require(p.class_label >= 1 && p.class_label <= 254,
            "polygon class must be in 1..254 (0 is reserved for background)");
    for (const auto& v : pj["ring"]) {
      require(v.is_array() && v.size() == 2, "ring vertex must be [x,y]");
      p.ring.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    normalize_closure(p);
    set.polygons.push_back(std::move(p));
  }
  return set;
}

void write_polygons(const PolygonSet& polys, const std::string& path) {
  nlohmann::json j;
  j["polygons"] = nlohmann::json::array();
  for (const auto& p : polys.polygons) {
    nlohmann::json pj;
    pj["class"] = p.class_label;
    pj["ring"] = nlohmann::json::array();
    for (const auto& v : p.ring) pj["ring"].push_back({v[0], v[1]});
    j["polygons"].push_back(pj);
  }
  std::ofstream out(path);
  require(out.good(), "cannot write polygon file: " + path);
  out << j.dump(2) << "\n";
}

bool point_in_ring(const std::vector<Point>& ring, double x, double y) {
  // Even-odd crossing count; orientation-independent.
  const std::size_t n = ring.size() - 1;  // closed ring, skip duplicate last vertex
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double xi = ring[i][0], yi = ring[i][1];
    const double xj = ring[j][0], yj = ring[j][1];
    if ((yi > y) != (yj > y)) {
      const double xint = xj + (y - yj) / (yi - yj) * (xi - xj);
      if (x < xint) inside = !inside;
    }
  }
  return inside;
}

ClassMap rasterize_polygons(const PolygonSet& polys, const RasterStack& grid,
                            const std::vector<int>& priority) {
  ClassMap map;
  map.width = grid.width;
  map.height = grid.height;
  map.transform = grid.transform;
  map.crs = grid.crs;
  map.labels.assign(static_cast<std::size_t>(grid.width) * grid.height, 0);

  std::vector<int> order = priority;
  if (order.empty()) {
    for (const auto& p : polys.polygons)
      if (std::find(order.begin(), order.end(), p.class_label) == order.end())
        order.push_back(p.class_label);
  }
  auto rank = [&](int cls) {
    auto it = std::find(order.begin(), order.end(), cls);
    return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
  };

  for (const auto& p : polys.polygons) {
    // Bounding box in map units, then clipped pixel range.
    double minx = std::numeric_limits<double>::max(), maxx = -minx;
    double miny = minx, maxy = -minx;
    for (const auto& v : p.ring) {
      minx = std::min(minx, v[0]); maxx = std::max(maxx, v[0]);
      miny = std::min(miny, v[1]); maxy = std::max(maxy, v[1]);
    }
    // Invert affine (no shear terms in this format).
    const double px = grid.transform[1], py = grid.transform[5];
    int c0 = static_cast<int>(std::floor((minx - grid.transform[0]) / px - 0.5));
    int c1 = static_cast<int>(std::ceil((maxx - grid.transform[0]) / px - 0.5));
    int r0 = static_cast<int>(std::floor((maxy - grid.transform[3]) / py - 0.5));
    int r1 = static_cast<int>(std::ceil((miny - grid.transform[3]) / py - 0.5));
    if (r0 > r1) std::swap(r0, r1);
    c0 = std::max(c0, 0); r0 = std::max(r0, 0);
    c1 = std::min(c1, grid.width - 1); r1 = std::min(r1, grid.height - 1);
    if (c0 > c1 || r0 > r1) {
      std::cerr << "warning: polygon of class " << p.class_label << " lies outside the grid\n";
      continue;
    }
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        auto [x, y] = grid.pixel_center(c, r);
        if (!point_in_ring(p.ring, x, y)) continue;
        std::uint8_t& cur = map.at(c, r);
        if (cur == 0 || rank(p.class_label) < rank(cur))
          cur = static_cast<std::uint8_t>(p.class_label);
      }
    }
  }
  return map;
}

}  // namespace altmap
