#include "depthsr/png_io.hpp"

#include <png.h>

#include <algorithm>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <filesystem>

#include "depthsr/error.hpp"

namespace depthsr::png {

namespace {

struct Raw {
  int height = 0;
  int width = 0;
  int bit_depth = 0;
  int channels = 0;
  std::vector<unsigned char> bytes;
};

enum class ReadAs { Rgb8, Gray };

// Only trivially destructible locals live between setjmp and any libpng call
// that may longjmp back here.
Raw read_raw(const std::string& path, ReadAs mode) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw ValidationError("cannot open PNG file " + path);
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    std::fclose(fp);
    throw ValidationError("not a PNG file: " + path);
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw Error("libpng initialisation failed");
  }
  Raw raw;
  std::vector<png_bytep> rows;
  bool bad_layout = false;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw ValidationError("corrupt or unreadable PNG file " + path);
  }
  png_init_io(png, fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (mode == ReadAs::Rgb8) {
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    if (depth == 16) png_set_strip_16(png);
    if (depth < 8) png_set_packing(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  } else {
    if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_GRAY_ALPHA) bad_layout = true;
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (depth < 8) png_set_packing(png);
  }
  if (!bad_layout) {
    png_read_update_info(png, info);
    raw.width = static_cast<int>(w);
    raw.height = static_cast<int>(h);
    raw.bit_depth = png_get_bit_depth(png, info);
    raw.channels = png_get_channels(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    raw.bytes.resize(rowbytes * h);
    rows.resize(h);
    for (png_uint_32 r = 0; r < h; ++r) rows[r] = raw.bytes.data() + r * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  if (bad_layout) throw ValidationError("depth PNG must be single-channel grayscale: " + path);
  return raw;
}

void write_raw(const std::string& path, int width, int height, int color_type, int bit_depth,
               const std::vector<unsigned char>& bytes, std::size_t rowbytes) {
  const std::string tmp = path + ".partial";
  std::FILE* fp = std::fopen(tmp.c_str(), "wb");
  if (!fp) throw ValidationError("cannot write PNG file " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    std::remove(tmp.c_str());
    throw Error("libpng initialisation failed");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    std::remove(tmp.c_str());
    throw Error("failed while encoding PNG file " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < height; ++r)
    rows[static_cast<std::size_t>(r)] = const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(r) * rowbytes);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  const bool flushed = std::fclose(fp) == 0;
  if (!flushed) {
    std::remove(tmp.c_str());
    throw ValidationError("cannot write PNG file " + path);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw ValidationError("cannot move PNG into place at " + path + ": " + ec.message());
  }
}

}  // namespace

Rgb8 read_rgb8(const std::string& path) {
  Raw raw = read_raw(path, ReadAs::Rgb8);
  DEPTHSR_REQUIRE(raw.channels == 3 && raw.bit_depth == 8, "unexpected color PNG layout in " + path);
  return Rgb8{raw.height, raw.width, std::move(raw.bytes)};
}

Gray16 read_gray16(const std::string& path) {
  Raw raw = read_raw(path, ReadAs::Gray);
  DEPTHSR_REQUIRE(raw.channels == 1, "depth PNG must be single-channel: " + path);
  Gray16 out{raw.height, raw.width, std::vector<std::uint16_t>(static_cast<std::size_t>(raw.height) * raw.width)};
  if (raw.bit_depth == 16) {
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
      out.pixels[i] = static_cast<std::uint16_t>((raw.bytes[2 * i] << 8) | raw.bytes[2 * i + 1]);
  } else {
    for (std::size_t i = 0; i < out.pixels.size(); ++i) out.pixels[i] = raw.bytes[i];
  }
  return out;
}

void write_rgb8(const std::string& path, const Rgb8& img) {
  DEPTHSR_REQUIRE(img.pixels.size() == static_cast<std::size_t>(img.height) * img.width * 3, "RGB raster size mismatch");
  write_raw(path, img.width, img.height, PNG_COLOR_TYPE_RGB, 8, img.pixels, static_cast<std::size_t>(img.width) * 3);
}

void write_gray16(const std::string& path, const Gray16& img) {
  DEPTHSR_REQUIRE(img.pixels.size() == static_cast<std::size_t>(img.height) * img.width, "gray raster size mismatch");
  std::vector<unsigned char> bytes(img.pixels.size() * 2);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    bytes[2 * i] = static_cast<unsigned char>(img.pixels[i] >> 8);
    bytes[2 * i + 1] = static_cast<unsigned char>(img.pixels[i] & 0xff);
  }
  write_raw(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, 16, bytes, static_cast<std::size_t>(img.width) * 2);
}

ColorImage to_color(const Rgb8& img) {
  ColorImage out(img.height, img.width);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c)
      for (int ch = 0; ch < 3; ++ch)
        out.at(ch, r, c) = img.pixels[(static_cast<std::size_t>(r) * img.width + c) * 3 + ch] / 255.0;
  return out;
}

Rgb8 from_color(const ColorImage& img) {
  Rgb8 out{img.height(), img.width(), std::vector<std::uint8_t>(static_cast<std::size_t>(img.height()) * img.width() * 3)};
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c)
      for (int ch = 0; ch < 3; ++ch) {
        const double v = std::clamp(img.at(ch, r, c), 0.0, 1.0);
        out.pixels[(static_cast<std::size_t>(r) * img.width() + c) * 3 + ch] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
  return out;
}

}  // namespace depthsr::png
