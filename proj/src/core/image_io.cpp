#include "hdrfusion/image_io.hpp"

#include <png.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "hdrfusion/errors.hpp"

namespace hdrfusion::io {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  longjmp(png_jmpbuf(png), 1);
}

// Reads any PNG into 8- or 16-bit samples with the stored channel count.
template <typename T>
Image<T> read_png_impl(const std::filesystem::path& path, int bit_depth_out) {
  FilePtr file = open_file(path, "rb");
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  Image<T> image;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to read " + path.string() + ": " + error);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (bit_depth_out == 8 && depth == 16) png_set_strip_16(png);
  if (bit_depth_out == 16 && depth < 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() + ": expected a 16-bit PNG");
  }
  if (bit_depth_out == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_read_update_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  image = Image<T>(width, height, channels);
  rows.resize(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) rows[y] = reinterpret_cast<png_bytep>(image.row(y));
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

template <typename T>
void write_png_impl(const std::filesystem::path& path, const Image<T>& image, int bit_depth) {
  if (image.empty()) throw IoError("refusing to write empty image " + path.string());
  int color = 0;
  switch (image.channels()) {
    case 1: color = PNG_COLOR_TYPE_GRAY; break;
    case 3: color = PNG_COLOR_TYPE_RGB; break;
    default: throw IoError("unsupported channel count for PNG");
  }
  FilePtr file = open_file(path, "wb");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to write " + path.string() + ": " + error);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, image.width(), image.height(), bit_depth, color, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  for (int y = 0; y < image.height(); ++y)
    rows[y] = const_cast<png_bytep>(reinterpret_cast<const png_byte*>(image.row(y)));
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

ImageU8 read_png8(const std::filesystem::path& path) { return read_png_impl<std::uint8_t>(path, 8); }

void write_png8(const std::filesystem::path& path, const ImageU8& image) {
  write_png_impl(path, image, 8);
}

ImageU16 read_png16(const std::filesystem::path& path) {
  ImageU16 img = read_png_impl<std::uint16_t>(path, 16);
  if (img.channels() != 1) throw IoError(path.string() + ": expected a single-channel PNG");
  return img;
}

void write_png16(const std::filesystem::path& path, const ImageU16& image) {
  write_png_impl(path, image, 16);
}

ImageF read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  int width = 0, height = 0;
  double scale = 0;
  in >> magic >> width >> height >> scale;
  in.get();
  int channels = 0;
  if (magic == "PF") channels = 3;
  else if (magic == "Pf") channels = 1;
  else throw IoError(path.string() + ": not a PFM file");
  if (width <= 0 || height <= 0) throw IoError(path.string() + ": bad PFM dimensions");
  const bool little = scale < 0;
  ImageF image(width, height, channels);
  const std::size_t row_floats = static_cast<std::size_t>(width) * channels;
  std::vector<std::uint32_t> buf(row_floats);
  for (int y = height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(row_floats * 4));
    if (!in) throw IoError(path.string() + ": truncated PFM");
    const bool swap = little != (std::endian::native == std::endian::little);
    float* dst = image.row(y);
    for (std::size_t i = 0; i < row_floats; ++i) {
      std::uint32_t v = buf[i];
      if (swap) v = __builtin_bswap32(v);
      std::memcpy(&dst[i], &v, 4);
    }
  }
  return image;
}

void write_pfm(const std::filesystem::path& path, const ImageF& image) {
  if (image.channels() != 1 && image.channels() != 3) throw IoError("PFM needs 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string());
  out << (image.channels() == 3 ? "PF" : "Pf") << "\n"
      << image.width() << " " << image.height() << "\n-1.0\n";
  const std::size_t row_floats = static_cast<std::size_t>(image.width()) * image.channels();
  std::vector<std::uint32_t> buf(row_floats);
  for (int y = image.height() - 1; y >= 0; --y) {
    const float* src = image.row(y);
    for (std::size_t i = 0; i < row_floats; ++i) {
      std::uint32_t v;
      std::memcpy(&v, &src[i], 4);
      if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
      buf[i] = v;
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(row_floats * 4));
  }
  if (!out) throw IoError("failed to write " + path.string());
}

}  // namespace hdrfusion::io
