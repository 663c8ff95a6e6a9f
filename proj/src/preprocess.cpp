#include "altmap/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "altmap/error.hpp"

namespace altmap {

std::string ScalingParams::to_json() const {
  nlohmann::json j;
  j["mode"] = mode == ScalingMode::MinMax01 ? "minmax01" : "zscore";
  j["a"] = a;
  j["b"] = b;
  return j.dump(2);
}

ScalingParams ScalingParams::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ScalingParams p;
  const std::string m = j.at("mode").get<std::string>();
  require(m == "minmax01" || m == "zscore", "unknown scaling mode: " + m);
  p.mode = m == "minmax01" ? ScalingMode::MinMax01 : ScalingMode::ZScore;
  p.a = j.at("a").get<std::vector<double>>();
  p.b = j.at("b").get<std::vector<double>>();
  require(p.a.size() == p.b.size(), "scaling params length mismatch");
  return p;
}

RasterStack select_bands(const RasterStack& stack, const std::vector<int>& indices) {
  std::set<int> seen;
  for (int i : indices) {
    require(i >= 0 && i < stack.bands, "band index out of range: " + std::to_string(i));
    require(seen.insert(i).second, "duplicate band index: " + std::to_string(i));
  }
  RasterStack out = stack;
  out.bands = static_cast<int>(indices.size());
  out.data.resize(static_cast<std::size_t>(out.width) * out.height * out.bands);
  const std::size_t plane = static_cast<std::size_t>(stack.width) * stack.height;
  for (std::size_t k = 0; k < indices.size(); ++k)
    std::copy_n(stack.data.begin() + static_cast<std::ptrdiff_t>(indices[k] * plane), plane,
                out.data.begin() + static_cast<std::ptrdiff_t>(k * plane));
  return out;
}

ScalingParams fit_scaling(const RasterStack& stack, ScalingMode mode) {
  ScalingParams p;
  p.mode = mode;
  p.a.resize(stack.bands);
  p.b.resize(stack.bands);
  const std::size_t plane = static_cast<std::size_t>(stack.width) * stack.height;
  for (int b = 0; b < stack.bands; ++b) {
    double lo = std::numeric_limits<double>::max(), hi = -lo;
    double sum = 0.0, sumsq = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < plane; ++i) {
      const float v = stack.data[b * plane + i];
      if (stack.is_nodata(v)) continue;
      lo = std::min(lo, static_cast<double>(v));
      hi = std::max(hi, static_cast<double>(v));
      sum += v;
      sumsq += static_cast<double>(v) * v;
      ++n;
    }
    require(n > 0, "band " + std::to_string(b) + " is entirely nodata");
    if (mode == ScalingMode::MinMax01) {
      p.a[b] = lo;
      p.b[b] = hi;
    } else {
      const double mean = sum / n;
      p.a[b] = mean;
      p.b[b] = std::sqrt(std::max(0.0, sumsq / n - mean * mean));
    }
  }
  return p;
}

RasterStack apply_scaling(const RasterStack& stack, const ScalingParams& params) {
  require(static_cast<int>(params.a.size()) == stack.bands,
          "scaling params band count does not match raster");
  RasterStack out = stack;
  const std::size_t plane = static_cast<std::size_t>(stack.width) * stack.height;
  for (int b = 0; b < stack.bands; ++b) {
    for (std::size_t i = 0; i < plane; ++i) {
      float& v = out.data[b * plane + i];
      if (stack.is_nodata(v)) continue;
      if (params.mode == ScalingMode::MinMax01) {
        const double range = params.b[b] - params.a[b];
        if (range <= 0.0) { v = 0.0f; continue; }
        v = static_cast<float>(std::clamp((v - params.a[b]) / range, 0.0, 1.0));
      } else {
        if (params.b[b] <= 0.0) { v = 0.0f; continue; }
        v = static_cast<float>((v - params.a[b]) / params.b[b]);
      }
    }
  }
  return out;
}

RasterStack resample_nearest(const RasterStack& stack, int factor) {
  require(factor >= 1, "resample factor must be >= 1");
  if (factor == 1) return stack;
  RasterStack out;
  out.width = stack.width * factor;
  out.height = stack.height * factor;
  out.bands = stack.bands;
  out.crs = stack.crs;
  out.nodata = stack.nodata;
  out.transform = stack.transform;
  out.transform[1] /= factor;
  out.transform[5] /= factor;
  out.data.resize(static_cast<std::size_t>(out.width) * out.height * out.bands);
  for (int b = 0; b < out.bands; ++b)
    for (int r = 0; r < out.height; ++r)
      for (int c = 0; c < out.width; ++c)
        out.at(c, r, b) = stack.at(c / factor, r / factor, b);
  return out;
}

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

Patch extract_patch(const RasterStack& stack, int col, int row, int size) {
  require(size >= 1 && size % 2 == 1, "patch size must be odd");
  require(col >= 0 && col < stack.width && row >= 0 && row < stack.height,
          "patch center out of bounds");
  Patch p;
  p.col = col;
  p.row = row;
  p.size = size;
  p.bands = stack.bands;
  p.values.resize(static_cast<std::size_t>(size) * size * stack.bands);
  const int half = size / 2;
  std::size_t k = 0;
  for (int dy = -half; dy <= half; ++dy) {
    const int r = reflect_index(row + dy, stack.height);
    for (int dx = -half; dx <= half; ++dx) {
      const int c = reflect_index(col + dx, stack.width);
      for (int b = 0; b < stack.bands; ++b) p.values[k++] = stack.at(c, r, b);
    }
  }
  return p;
}

}  // namespace altmap
