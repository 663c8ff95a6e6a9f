#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "altmap/error.hpp"
#include "altmap/raster.hpp"
#include "altmap/rng.hpp"

using namespace altmap;
namespace fs = std::filesystem;

namespace {

fs::path tmpdir() {
  static fs::path p = [] {
    fs::path d = fs::temp_directory_path() / "altmap_test_raster";
    fs::create_directories(d);
    return d;
  }();
  return p;
}

RasterStack small_stack(int w, int h, int b) {
  RasterStack s;
  s.width = w;
  s.height = h;
  s.bands = b;
  s.crs = "EPSG:32754";
  s.transform = {500000.0, 30.0, 0.0, 6400000.0, 0.0, -30.0};
  s.data.resize(static_cast<std::size_t>(w) * h * b);
  for (std::size_t i = 0; i < s.data.size(); ++i) s.data[i] = static_cast<float>(i);
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("2x2x1 stack round-trips bit-identically") {
  RasterStack s = small_stack(2, 2, 1);
  s.data = {0.0f, 1.0f, 2.0f, 3.0f};
  const std::string path = (tmpdir() / "rt").string();
  write_stack(s, path);
  RasterStack r = read_stack(path);
  CHECK(r.width == 2);
  CHECK(r.height == 2);
  CHECK(r.bands == 1);
  CHECK(r.data == s.data);
  CHECK(r.transform == s.transform);
  CHECK(r.crs == s.crs);
}

TEST_CASE("header/payload size mismatch is rejected") {
  const std::string path = (tmpdir() / "mismatch").string();
  {
    std::ofstream hdr(path + ".hdr");
    hdr << "width: 2\nheight: 2\nbands: 2\ndtype: float32\ninterleave: bsq\n"
        << "byteorder: little\ntransform: 0,1,0,0,0,-1\ncrs: none\n";
    std::ofstream bin(path + ".bin", std::ios::binary);
    bin.write("0123456789ab", 12);  // 12 bytes, need 32
  }
  CHECK_THROWS_AS(read_stack(path), Error);
}

TEST_CASE("Landsat-shaped header demands exactly 82384344 payload bytes") {
  // 1587*1854*7*4
  const std::string path = (tmpdir() / "landsat").string();
  {
    std::ofstream hdr(path + ".hdr");
    hdr << "width: 1587\nheight: 1854\nbands: 7\ndtype: float32\ninterleave: bsq\n"
        << "byteorder: little\ntransform: 0,30,0,0,0,-30\ncrs: EPSG:32754\n";
    std::ofstream bin(path + ".bin", std::ios::binary);
    bin.write("x", 1);
  }
  try {
    read_stack(path);
    FAIL("expected size mismatch");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("82384344") != std::string::npos);
  }
}

TEST_CASE("missing file errors") {
  CHECK_THROWS_AS(read_stack((tmpdir() / "nope").string()), Error);
}

TEST_CASE("unsupported dtype errors") {
  const std::string path = (tmpdir() / "dtype").string();
  {
    std::ofstream hdr(path + ".hdr");
    hdr << "width: 1\nheight: 1\nbands: 1\ndtype: float64\n";
    std::ofstream bin(path + ".bin", std::ios::binary);
    bin.write("01234567", 8);
  }
  CHECK_THROWS_AS(read_stack(path), Error);
}

TEST_CASE("NaN without nodata declaration fails validation on write") {
  RasterStack s = small_stack(2, 1, 1);
  s.data = {1.0f, std::nanf("")};
  CHECK_THROWS_AS(write_stack(s, (tmpdir() / "nan").string()), Error);
}

TEST_CASE("nodata sentinel passes validation and survives the round trip") {
  RasterStack s = small_stack(2, 1, 1);
  s.nodata = -9999.0f;
  s.data = {1.0f, -9999.0f};
  const std::string path = (tmpdir() / "nodata").string();
  write_stack(s, path);
  RasterStack r = read_stack(path);
  REQUIRE(r.nodata.has_value());
  CHECK(*r.nodata == -9999.0f);
  CHECK(r.pixel_is_nodata(1, 0));
  CHECK_FALSE(r.pixel_is_nodata(0, 0));
}

TEST_CASE("two writes of the same stack are byte-identical") {
  RasterStack s = small_stack(3, 4, 2);
  const std::string p1 = (tmpdir() / "det1").string();
  const std::string p2 = (tmpdir() / "det2").string();
  write_stack(s, p1);
  write_stack(s, p2);
  CHECK(slurp(p1 + ".hdr") == slurp(p2 + ".hdr"));
  CHECK(slurp(p1 + ".bin") == slurp(p2 + ".bin"));
}

TEST_CASE("property: random stacks round-trip bit-exactly") {
  Rng rng(7);
  std::uniform_int_distribution<int> dim(1, 9);
  std::uniform_real_distribution<float> val(-1000.0f, 1000.0f);
  for (int trial = 0; trial < 30; ++trial) {
    RasterStack s = small_stack(dim(rng), dim(rng), dim(rng));
    for (auto& v : s.data) v = val(rng);
    const std::string path = (tmpdir() / ("prop" + std::to_string(trial))).string();
    write_stack(s, path);
    RasterStack r = read_stack(path);
    CHECK(r.data == s.data);
    CHECK(r.width == s.width);
    CHECK(r.height == s.height);
    CHECK(r.bands == s.bands);
  }
}

TEST_CASE("class map raster round-trip") {
  ClassMap m;
  m.width = 3;
  m.height = 2;
  m.labels = {0, 1, 2, 2, 1, 0};
  ClassMap r = class_map_from_raster(class_map_to_raster(m));
  CHECK(r.labels == m.labels);
  CHECK(r.width == m.width);
}

TEST_CASE("class map from raster rejects fractional values") {
  RasterStack s = small_stack(1, 1, 1);
  s.data = {1.5f};
  CHECK_THROWS_AS(class_map_from_raster(s), Error);
}
