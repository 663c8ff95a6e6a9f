#include "altmap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "altmap/error.hpp"
#include "altmap/rng.hpp"

namespace altmap {

using nlohmann::json;

std::string SceneSpec::to_json() const {
  json j;
  j["width"] = width;
  j["height"] = height;
  j["bands"] = bands;
  j["class_means"] = class_means;
  j["noise_stddev"] = noise_stddev;
  j["mixing_width"] = mixing_width;
  j["smooth_noise"] = smooth_noise;
  j["seed"] = seed;
  j["zones"] = json::array();
  for (const auto& z : zones) {
    json zj;
    zj["class"] = z.class_label;
    zj["shape"] = z.shape;
    if (z.shape == "disk") {
      zj["cx"] = z.cx;
      zj["cy"] = z.cy;
      zj["radius"] = z.radius;
    } else {
      zj["ring"] = json::array();
      for (const auto& v : z.ring) zj["ring"].push_back({v[0], v[1]});
    }
    j["zones"].push_back(zj);
  }
  return j.dump(2);
}

SceneSpec SceneSpec::from_json(const std::string& text) {
  json j = json::parse(text);
  SceneSpec s;
  s.width = j.at("width").get<int>();
  s.height = j.at("height").get<int>();
  s.bands = j.at("bands").get<int>();
  s.class_means = j.at("class_means").get<std::vector<std::vector<double>>>();
  s.noise_stddev = j.at("noise_stddev").get<double>();
  s.mixing_width = j.value("mixing_width", 0.0);
  s.smooth_noise = j.value("smooth_noise", false);
  s.seed = j.value("seed", std::uint64_t{0});
  for (const auto& zj : j.at("zones")) {
    ZoneSpec z;
    z.class_label = zj.at("class").get<int>();
    z.shape = zj.at("shape").get<std::string>();
    if (z.shape == "disk") {
      z.cx = zj.at("cx").get<double>();
      z.cy = zj.at("cy").get<double>();
      z.radius = zj.at("radius").get<double>();
    } else if (z.shape == "polygon") {
      for (const auto& v : zj.at("ring")) z.ring.push_back({v[0].get<double>(), v[1].get<double>()});
    } else {
      throw Error("unknown zone shape: " + z.shape);
    }
    s.zones.push_back(std::move(z));
  }
  return s;
}

SceneSpec SceneSpec::from_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open scene spec: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

namespace {

// Signed inside distance in pixels (positive inside, negative outside).
double zone_signed_distance(const ZoneSpec& z, double x, double y) {
  if (z.shape == "disk") {
    return z.radius - std::hypot(x - z.cx, y - z.cy);
  }
  std::vector<Point> ring = z.ring;
  if (ring.front() != ring.back()) ring.push_back(ring.front());
  double dmin = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const double ax = ring[i][0], ay = ring[i][1];
    const double bx = ring[i + 1][0], by = ring[i + 1][1];
    const double vx = bx - ax, vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((x - ax) * vx + (y - ay) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    dmin = std::min(dmin, std::hypot(x - (ax + t * vx), y - (ay + t * vy)));
  }
  return point_in_ring(ring, x, y) ? dmin : -dmin;
}

}  // namespace

Scene generate_scene(const SceneSpec& spec) {
  require(spec.width > 0 && spec.height > 0 && spec.bands > 0, "bad scene dimensions");
  require(spec.noise_stddev >= 0.0, "noise stddev must be non-negative");
  require(!spec.class_means.empty(), "scene needs class means");
  for (const auto& mu : spec.class_means)
    require(static_cast<int>(mu.size()) == spec.bands, "class mean length must equal bands");
  for (std::size_t a = 0; a < spec.class_means.size(); ++a)
    for (std::size_t b = a + 1; b < spec.class_means.size(); ++b)
      require(spec.class_means[a] != spec.class_means[b],
              "class mean spectra must be pairwise distinct");
  for (const auto& z : spec.zones)
    require(z.class_label >= 1 && z.class_label < static_cast<int>(spec.class_means.size()),
            "zone class without a mean spectrum");

  Scene scene;
  scene.truth.width = spec.width;
  scene.truth.height = spec.height;
  scene.truth.labels.assign(static_cast<std::size_t>(spec.width) * spec.height, 0);
  scene.stack.width = spec.width;
  scene.stack.height = spec.height;
  scene.stack.bands = spec.bands;
  scene.stack.crs = "synthetic";
  scene.stack.data.assign(static_cast<std::size_t>(spec.width) * spec.height * spec.bands, 0.0f);

  const std::size_t plane = static_cast<std::size_t>(spec.width) * spec.height;
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      const double x = c + 0.5, y = r + 0.5;
      int zone_class = 0;
      double weight = 0.0;
      for (const auto& z : spec.zones) {
        const double d = zone_signed_distance(z, x, y);
        double w;
        if (spec.mixing_width > 0.0)
          w = std::clamp(d / spec.mixing_width + 0.5, 0.0, 1.0);
        else
          w = d > 0.0 ? 1.0 : 0.0;
        if (w <= 0.0) continue;
        if (zone_class != 0 && zone_class != z.class_label)
          throw Error("zones of different classes overlap at pixel (" + std::to_string(c) +
                      "," + std::to_string(r) + ")");
        zone_class = z.class_label;
        weight = std::max(weight, w);
        if (d > 0.0) scene.truth.at(c, r) = static_cast<std::uint8_t>(z.class_label);
      }
      const std::size_t i = static_cast<std::size_t>(r) * spec.width + c;
      const auto& bg = spec.class_means[0];
      for (int b = 0; b < spec.bands; ++b) {
        double v = bg[b];
        if (zone_class != 0)
          v = (1.0 - weight) * bg[b] + weight * spec.class_means[zone_class][b];
        scene.stack.data[b * plane + i] = static_cast<float>(v);
      }
    }
  }

  if (spec.noise_stddev > 0.0) {
    Rng rng(derive_seed(spec.seed, "scene-noise"));
    std::normal_distribution<double> gauss(0.0, spec.noise_stddev);
    std::vector<float> noise(plane);
    for (int b = 0; b < spec.bands; ++b) {
      for (std::size_t i = 0; i < plane; ++i) noise[i] = static_cast<float>(gauss(rng));
      if (spec.smooth_noise) {
        std::vector<float> sm(plane, 0.0f);
        for (int r = 0; r < spec.height; ++r)
          for (int c = 0; c < spec.width; ++c) {
            float acc = 0.0f;
            int n = 0;
            for (int dr = -1; dr <= 1; ++dr)
              for (int dc = -1; dc <= 1; ++dc) {
                const int rr = r + dr, cc = c + dc;
                if (rr < 0 || rr >= spec.height || cc < 0 || cc >= spec.width) continue;
                acc += noise[static_cast<std::size_t>(rr) * spec.width + cc];
                ++n;
              }
            sm[static_cast<std::size_t>(r) * spec.width + c] = acc / static_cast<float>(n);
          }
        noise.swap(sm);
      }
      for (std::size_t i = 0; i < plane; ++i) scene.stack.data[b * plane + i] += noise[i];
    }
  }
  return scene;
}

}  // namespace altmap
