#include "altmap/raster.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "altmap/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "native raster format assumes a little-endian host");

namespace altmap {

void RasterStack::validate() const {
  require(width > 0 && height > 0 && bands > 0, "raster dimensions must be positive");
  require(data.size() == static_cast<std::size_t>(width) * height * bands,
          "raster data length does not match width*height*bands");
  require(transform[1] > 0.0, "pixel width must be positive");
  require(transform[5] != 0.0, "pixel height must be nonzero");
  for (float v : data) {
    if (nodata && v == *nodata) continue;
    require(std::isfinite(v), "raster contains non-finite values without a nodata declaration");
  }
}

static std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

RasterStack read_stack(const std::string& path) {
  std::ifstream hdr(path + ".hdr");
  require(hdr.good(), "cannot open raster header: " + path + ".hdr");

  RasterStack s;
  std::string line;
  bool have_w = false, have_h = false, have_b = false;
  while (std::getline(hdr, line)) {
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = trim(line.substr(0, colon));
    std::string val = trim(line.substr(colon + 1));
    if (key == "width") { s.width = std::stoi(val); have_w = true; }
    else if (key == "height") { s.height = std::stoi(val); have_h = true; }
    else if (key == "bands") { s.bands = std::stoi(val); have_b = true; }
    else if (key == "dtype") require(val == "float32", "unsupported dtype: " + val);
    else if (key == "interleave") require(val == "bsq", "unsupported interleave: " + val);
    else if (key == "byteorder") require(val == "little", "unsupported byte order: " + val);
    else if (key == "transform") {
      std::stringstream ss(val);
      std::string tok;
      for (int i = 0; i < 6; ++i) {
        require(static_cast<bool>(std::getline(ss, tok, ',')), "transform needs 6 coefficients");
        s.transform[i] = std::stod(tok);
      }
    } else if (key == "crs") s.crs = val;
    else if (key == "nodata") s.nodata = std::stof(val);
  }
  require(have_w && have_h && have_b, "header missing width/height/bands");

  std::ifstream bin(path + ".bin", std::ios::binary);
  require(bin.good(), "cannot open raster payload: " + path + ".bin");
  bin.seekg(0, std::ios::end);
  const std::size_t bytes = static_cast<std::size_t>(bin.tellg());
  const std::size_t expect = static_cast<std::size_t>(s.width) * s.height * s.bands * 4;
  require(bytes == expect, "raster payload size mismatch: header expects " +
                               std::to_string(expect) + " bytes, file has " + std::to_string(bytes));
  bin.seekg(0);
  s.data.resize(expect / 4);
  bin.read(reinterpret_cast<char*>(s.data.data()), static_cast<std::streamsize>(expect));
  require(bin.good(), "short read on raster payload");
  s.validate();
  return s;
}

void write_stack(const RasterStack& stack, const std::string& path) {
  stack.validate();
  std::ofstream hdr(path + ".hdr");
  require(hdr.good(), "cannot write raster header: " + path + ".hdr");
  hdr << "width: " << stack.width << "\n"
      << "height: " << stack.height << "\n"
      << "bands: " << stack.bands << "\n"
      << "dtype: float32\n"
      << "interleave: bsq\n"
      << "byteorder: little\n";
  char buf[64];
  hdr << "transform: ";
  for (int i = 0; i < 6; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", stack.transform[i]);
    hdr << buf << (i < 5 ? "," : "\n");
  }
  hdr << "crs: " << stack.crs << "\n";
  if (stack.nodata) {
    std::snprintf(buf, sizeof(buf), "%.9g", *stack.nodata);
    hdr << "nodata: " << buf << "\n";
  }
  require(hdr.good(), "failed writing raster header");

  std::ofstream bin(path + ".bin", std::ios::binary);
  require(bin.good(), "cannot write raster payload: " + path + ".bin");
  bin.write(reinterpret_cast<const char*>(stack.data.data()),
            static_cast<std::streamsize>(stack.data.size() * 4));
  require(bin.good(), "failed writing raster payload");
}

RasterStack class_map_to_raster(const ClassMap& map) {
  RasterStack s;
  s.width = map.width;
  s.height = map.height;
  s.bands = 1;
  s.transform = map.transform;
  s.crs = map.crs;
  s.data.resize(map.labels.size());
  for (std::size_t i = 0; i < map.labels.size(); ++i) s.data[i] = static_cast<float>(map.labels[i]);
  return s;
}

ClassMap class_map_from_raster(const RasterStack& stack) {
  require(stack.bands == 1, "class map raster must have exactly one band");
  ClassMap m;
  m.width = stack.width;
  m.height = stack.height;
  m.transform = stack.transform;
  m.crs = stack.crs;
  m.labels.resize(stack.data.size());
  for (std::size_t i = 0; i < stack.data.size(); ++i) {
    float v = stack.data[i];
    require(v >= 0.0f && v <= 255.0f && v == std::floor(v),
            "class map raster contains a non-label value");
    m.labels[i] = static_cast<std::uint8_t>(v);
  }
  return m;
}

}  // namespace altmap
