// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>

#include "thermask/image.hpp"
#include "thermask/rng.hpp"

using namespace thermask;
namespace fs = std::filesystem;

TEST_CASE("rng determinism and derived streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c(42);
  CHECK(c.derive(1).next_u64() == Rng(42).derive(1).next_u64());
  CHECK(c.derive(1).next_u64() != c.derive(2).next_u64());

  // derive() ignores consumption state.
  Rng d(42);
  d.next_u64();
  d.next_u64();
  CHECK(d.derive(7).next_u64() == Rng(42).derive(7).next_u64());
}

TEST_CASE("rng distributions stay in range") {
  Rng rng(1);
  double sum = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(sum / 10000 == doctest::Approx(0.5).epsilon(0.03));

  double mean = 0, var = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) mean += rng.normal();
  mean /= n;
  Rng rng2(1);
  for (int i = 0; i < 10000; ++i) rng2.uniform();  // desync, fresh stream below
  Rng rng3(99);
  for (int i = 0; i < n; ++i) {
    const double x = rng3.normal();
    var += x * x;
  }
  CHECK(mean == doctest::Approx(0.0).epsilon(0.05));
  CHECK(var / n == doctest::Approx(1.0).epsilon(0.05));

  for (int i = 0; i < 1000; ++i) {
    const int v = rng.uniform_int(3, 7);
    CHECK(v >= 3);
    CHECK(v <= 7);
  }
}

TEST_CASE("pgm round trip preserves pixels for 8 and 16 bit") {
  Rng rng(5);
  for (const uint16_t maxv : {uint16_t(255), uint16_t(16383), uint16_t(65535)}) {
    GrayImage img(13, 9, maxv);
    for (auto& p : img.pixels) p = static_cast<uint16_t>(rng.uniform_int(0, maxv));
    const fs::path path = fs::temp_directory_path() / "thermask_pgm_roundtrip.pgm";
    write_pgm(img, path);
    const GrayImage back = read_pgm(path);
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.max_value == img.max_value);
    CHECK(back.pixels == img.pixels);
    fs::remove(path);
  }
}

TEST_CASE("bit depth classification") {
  CHECK(GrayImage(1, 1, 255).bit_depth() == 8);
  CHECK(GrayImage(1, 1, 16383).bit_depth() == 14);
  CHECK(GrayImage(1, 1, 65535).bit_depth() == 16);
}

TEST_CASE("resize and crop contracts") {
  GrayImage img(8, 8, 255);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) img.at(x, y) = static_cast<uint16_t>(10 * x);
  const GrayImage up = resize_bilinear(img, 16, 16);
  CHECK(up.width == 16);
  CHECK(up.height == 16);

  const GrayImage constant = resize_bilinear(GrayImage(5, 5, 255, 77), 9, 3);
  for (auto p : constant.pixels) CHECK(p == 77);

  const GrayImage sub = crop(img, {2, 2, 6, 6});
  CHECK(sub.width == 4);
  CHECK(sub.height == 4);
  CHECK(sub.at(0, 0) == 20);
  CHECK_THROWS_AS(crop(img, {5, 5, 5, 9}), std::invalid_argument);
}

TEST_CASE("gaussian blur keeps constants and rejects negative sigma") {
  const GrayImage constant(7, 7, 255, 130);
  const GrayImage blurred = gaussian_blur(constant, 1.5);
  for (auto p : blurred.pixels) CHECK(p == 130);
  CHECK_THROWS_AS(gaussian_blur(constant, -1.0), std::invalid_argument);
  CHECK(gaussian_blur(constant, 0.0).pixels == constant.pixels);
}

TEST_CASE("minmax normalization") {
  GrayImage img(2, 1, 255);
  img.at(0, 0) = 50;
  img.at(1, 0) = 150;
  const auto f = minmax_normalize(img);
  CHECK(f[0] == 0.0f);
  CHECK(f[1] == 1.0f);
  const auto flat = minmax_normalize(GrayImage(2, 2, 255, 9));
  for (float v : flat) CHECK(v == 0.0f);
}
