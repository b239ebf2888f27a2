#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "spdchar/error.hpp"
#include "spdchar/raster.hpp"

namespace spdchar {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_handler(png_structp png, png_const_charp msg) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = msg;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

// Round half away from zero; inputs here are non-negative.
std::uint32_t quantize(double v, double full_scale) {
  return static_cast<std::uint32_t>(std::floor(v * full_scale + 0.5));
}

}  // namespace

Raster load_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw Error("io_error", "cannot open " + path.string());

  unsigned char signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw Error("unsupported_format", path.string() + " is not a PNG file");
  }

  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message,
                                           png_error_handler, png_warning_handler);
  if (!png) throw Error("io_error", "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("io_error", "png_create_info_struct failed");
  }

  // Everything that can longjmp lives in this block; no non-trivial locals.
  int width = 0, height = 0, bit_depth = 0, color_type = 0;
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("io_error", "failed to decode " + path.string() + ": " + message);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  bit_depth = png_get_bit_depth(png, info);
  color_type = png_get_color_type(png, info);

  const bool supported_type = color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_RGB;
  const bool supported_depth = bit_depth == 8 || bit_depth == 16;
  const bool has_trns = png_get_valid(png, info, PNG_INFO_tRNS) != 0;
  if (!supported_type || !supported_depth || has_trns) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::string reason;
    if (color_type == PNG_COLOR_TYPE_PALETTE) {
      reason = "palette images are not supported";
    } else if (color_type & PNG_COLOR_MASK_ALPHA || has_trns) {
      reason = "alpha channels are not supported";
    } else {
      reason = "bit depth " + std::to_string(bit_depth) + " is not supported (8 or 16 only)";
    }
    throw Error("unsupported_format", path.string() + ": " + reason);
  }

  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  pixels.resize(row_bytes * static_cast<std::size_t>(height));
  rows.resize(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) rows[y] = pixels.data() + row_bytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Raster out(width, height, channels);
  const double full_scale = bit_depth == 16 ? 65535.0 : 255.0;
  const int bytes_per_sample = bit_depth / 8;
  for (int y = 0; y < height; ++y) {
    const png_byte* row = rows[y];
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        const png_byte* s = row + (static_cast<std::size_t>(x) * channels + c) * bytes_per_sample;
        const unsigned code = bytes_per_sample == 2 ? (unsigned{s[0]} << 8) | s[1] : s[0];
        out.at(c, x, y) = code / full_scale;
      }
    }
  }
  return out;
}

void save_png(const Raster& r, int bit_depth, const std::filesystem::path& path) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw Error("invalid_argument", "bit depth must be 8 or 16");
  }
  if (r.empty()) throw Error("invalid_argument", "cannot save an empty raster");
  for (double v : r.data()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error("out_of_range", "intensity " + std::to_string(v) +
                                      " outside [0, 1]; clamp before saving");
    }
  }

  const int channels = r.channels();
  const int bytes_per_sample = bit_depth / 8;
  const double full_scale = bit_depth == 16 ? 65535.0 : 255.0;
  const std::size_t row_bytes =
      static_cast<std::size_t>(r.width()) * channels * bytes_per_sample;
  std::vector<png_byte> pixels(row_bytes * static_cast<std::size_t>(r.height()));
  std::vector<png_bytep> rows(static_cast<std::size_t>(r.height()));
  for (int y = 0; y < r.height(); ++y) {
    png_byte* row = pixels.data() + row_bytes * y;
    rows[y] = row;
    for (int x = 0; x < r.width(); ++x) {
      for (int c = 0; c < channels; ++c) {
        const std::uint32_t code = quantize(r.at(c, x, y), full_scale);
        png_byte* d = row + (static_cast<std::size_t>(x) * channels + c) * bytes_per_sample;
        if (bytes_per_sample == 2) {
          d[0] = static_cast<png_byte>(code >> 8);
          d[1] = static_cast<png_byte>(code & 0xFF);
        } else {
          d[0] = static_cast<png_byte>(code);
        }
      }
    }
  }

  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw Error("io_error", "cannot open " + path.string() + " for writing");

  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message,
                                            png_error_handler, png_warning_handler);
  if (!png) throw Error("io_error", "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("io_error", "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("io_error", "failed to encode " + path.string() + ": " + message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(r.width()),
               static_cast<png_uint_32>(r.height()), bit_depth,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace spdchar
