#include "altmap/png_io.hpp"

#include <cstdio>
#include <memory>
#include <set>

#include <png.h>

#include "altmap/error.hpp"

namespace altmap {

Palette default_palette() {
  return {{0, {0, 0, 0}},
          {1, {230, 57, 70}},    // argillic
          {2, {255, 183, 3}},    // iron oxide
          {3, {42, 157, 143}}};  // propylitic
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void render_class_map(const ClassMap& map, const Palette& palette, const std::string& path) {
  require(map.width > 0 && map.height > 0, "empty class map");

  // Palette must cover every label present; indexed PNG slots are assigned in
  // ascending label order.
  std::set<int> present(map.labels.begin(), map.labels.end());
  for (int lbl : present)
    require(palette.count(lbl) > 0, "no palette entry for label " + std::to_string(lbl));

  std::vector<png_color> plte;
  std::vector<int> slot(256, -1);
  for (const auto& [lbl, rgb] : palette) {
    require(lbl >= 0 && lbl < 256, "palette label out of 8-bit range");
    slot[lbl] = static_cast<int>(plte.size());
    plte.push_back({rgb[0], rgb[1], rgb[2]});
  }

  FilePtr fp(std::fopen(path.c_str(), "wb"));
  require(fp != nullptr, "cannot open PNG for writing: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) { png_destroy_write_struct(&png, nullptr); throw Error("png_create_info_struct failed"); }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng error while writing " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, map.width, map.height, 8, PNG_COLOR_TYPE_PALETTE,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_PLTE(png, info, plte.data(), static_cast<int>(plte.size()));
  png_write_info(png, info);

  std::vector<png_byte> row(map.width);
  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c)
      row[c] = static_cast<png_byte>(slot[map.at(c, r)]);
    png_write_row(png, row.data());
  }
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
}

DecodedImage decode_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  require(fp != nullptr, "cannot open PNG: " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) { png_destroy_read_struct(&png, nullptr, nullptr); throw Error("png_create_info_struct failed"); }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("libpng error while reading " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_set_palette_to_rgb(png);
  png_set_strip_alpha(png);
  png_set_strip_16(png);
  png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
      png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  DecodedImage img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  std::vector<png_byte> row(png_get_rowbytes(png, info));
  for (int r = 0; r < img.height; ++r) {
    png_read_row(png, row.data(), nullptr);
    for (int c = 0; c < img.width; ++c)
      img.pixels[static_cast<std::size_t>(r) * img.width + c] = {row[3 * c], row[3 * c + 1], row[3 * c + 2]};
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace altmap
