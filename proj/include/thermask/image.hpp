// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "thermask/box.hpp"

namespace thermask {

/// Single-channel raster. `max_value` is the nominal white level
/// (255 for 8-bit sources, 16383 for 14-bit, 65535 for 16-bit).
struct GrayImage {
  int width = 0;
  int height = 0;
  uint16_t max_value = 255;
  std::vector<uint16_t> pixels;  // row-major

  GrayImage() = default;
  GrayImage(int w, int h, uint16_t maxv = 255, uint16_t fill = 0)
      : width(w), height(h), max_value(maxv),
        pixels(static_cast<size_t>(w) * h, fill) {}

  uint16_t& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
  uint16_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
  bool empty() const { return pixels.empty(); }

  int bit_depth() const {
    if (max_value <= 255) return 8;
    if (max_value <= 16383) return 14;
    return 16;
  }
};

/// Interleaved 8-bit RGB raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // r,g,b per pixel, row-major

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<size_t>(w) * h * 3, 0) {}

  uint8_t* at(int x, int y) { return &pixels[(static_cast<size_t>(y) * width + x) * 3]; }
  const uint8_t* at(int x, int y) const { return &pixels[(static_cast<size_t>(y) * width + x) * 3]; }
};

// Binary PGM (P5). 16-bit samples are stored big-endian per the PNM spec.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& img, const std::filesystem::path& path);

/// Pixels scaled by max_value into [0,1].
std::vector<float> to_float01(const GrayImage& img);

/// Per-image min-max normalization into [0,1]; constant images map to 0.
std::vector<float> minmax_normalize(const GrayImage& img);

GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h);

/// Crop to the integer pixel rectangle covered by `box` (clamped to bounds).
GrayImage crop(const GrayImage& img, const BoundingBox& box);

/// Separable Gaussian blur with standard deviation `sigma` (pixels) and
/// replicated edges. sigma == 0 returns the input unchanged.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

}  // namespace thermask
