#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "helpers.hpp"
#include "spdchar/error.hpp"
#include "spdchar/raster.hpp"

using namespace spdchar;

namespace {
std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}
}  // namespace

TEST_CASE("raster construction validates shape and samples") {
  CHECK_THROWS_AS(Raster(0, 4, 1), Error);
  CHECK_THROWS_AS(Raster(4, 4, 2), Error);
  CHECK_THROWS_AS(Raster(2, 2, 1, std::vector<double>(3)), Error);
  std::vector<double> bad(4, 0.0);
  bad[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(Raster(2, 2, 1, bad), Error);
  const Raster r(3, 2, 3, 0.25);
  CHECK(r.plane_size() == 6);
  CHECK(r.at(2, 2, 1) == 0.25);
}

TEST_CASE("luminance uses BT.709 weights and sums to one") {
  CHECK(kLumaR + kLumaG + kLumaB == doctest::Approx(1.0).epsilon(1e-15));
  Raster rgb(1, 1, 3);
  rgb.at(0, 0, 0) = 1.0;
  CHECK(to_luminance(rgb)(0, 0) == doctest::Approx(0.2126));
  rgb.at(0, 0, 0) = 0.0;
  rgb.at(1, 0, 0) = 1.0;
  CHECK(to_luminance(rgb)(0, 0) == doctest::Approx(0.7152));
  const Raster gray(4, 4, 3, 0.4);
  const Raster luma = to_luminance(gray);
  for (double v : luma.data()) CHECK(v == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("mean image and mean subtraction") {
  std::vector<Raster> rs{Raster(2, 2, 1, 0.1), Raster(2, 2, 1, 0.3)};
  rs[1](1, 1) = 0.7;
  const Raster m = mean_image(rs);
  CHECK(m(0, 0) == doctest::Approx(0.2));
  CHECK(m(1, 1) == doctest::Approx(0.4));
  const NoiseImage h = subtract_mean(rs[1], m);
  CHECK(h.data[3] == doctest::Approx(0.3));
  std::vector<Raster> mismatched{Raster(2, 2, 1), Raster(3, 2, 1)};
  CHECK_THROWS_AS(mean_image(mismatched), Error);
}

TEST_CASE("16-bit PNG round trip is within half a code") {
  const Raster img = testing::random_raster(37, 21, 3, 5);
  const auto path = temp_file("spdchar_rt16.png");
  save_png(img, 16, path);
  const Raster back = load_png(path);
  REQUIRE(back.same_shape(img));
  for (std::size_t i = 0; i < img.data().size(); ++i) {
    CHECK(std::abs(back.data()[i] - img.data()[i]) <= 0.5 / 65535.0 + 1e-12);
  }
  std::filesystem::remove(path);
}

TEST_CASE("8-bit grayscale PNG round trip is exact on code values") {
  Raster img(16, 16, 1);
  for (int i = 0; i < 256; ++i) img.data()[i] = i / 255.0;
  const auto path = temp_file("spdchar_rt8.png");
  save_png(img, 8, path);
  const Raster back = load_png(path);
  REQUIRE(back.channels() == 1);
  for (int i = 0; i < 256; ++i) CHECK(back.data()[i] == doctest::Approx(i / 255.0).epsilon(1e-15));
  std::filesystem::remove(path);
}

TEST_CASE("PNG errors are reported with codes") {
  Raster img(4, 4, 1, 1.5);
  CHECK_THROWS_AS(save_png(img, 16, temp_file("spdchar_bad.png")), Error);
  CHECK_THROWS_AS(save_png(Raster(4, 4, 1), 12, temp_file("spdchar_bad.png")), Error);
  CHECK_THROWS_AS(load_png(temp_file("spdchar_does_not_exist.png")), Error);
}

TEST_CASE("to_rgb replicates single channels") {
  Raster g(2, 2, 1, 0.3);
  const Raster rgb = to_rgb(g);
  CHECK(rgb.channels() == 3);
  for (double v : rgb.data()) CHECK(v == 0.3);
}

#include <png.h>

#include <cstdio>

TEST_CASE("PNGs with alpha are rejected with a reason") {
  const auto path = temp_file("spdchar_rgba.png");
  {
    FILE* f = std::fopen(path.c_str(), "wb");
    REQUIRE(f != nullptr);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    png_init_io(png, f);
    png_set_IHDR(png, info, 2, 2, 8, PNG_COLOR_TYPE_RGB_ALPHA, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_byte row[8] = {1, 2, 3, 255, 4, 5, 6, 255};
    png_write_row(png, row);
    png_write_row(png, row);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(f);
  }
  try {
    load_png(path);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == "unsupported_format");
    CHECK(std::string(e.what()).find("alpha") != std::string::npos);
  }
  std::filesystem::remove(path);
}
