// SPDX-License-Identifier: Apache-2.0
#include "thermask/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace thermask {

namespace {

int read_pnm_token(std::istream& in) {
  // Skips whitespace and '#' comments, then reads one unsigned integer.
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value = 0;
  if (!(in >> value)) throw std::runtime_error("truncated PGM header");
  return value;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '5')
    throw std::runtime_error(path.string() + ": not a binary PGM (P5) file");
  GrayImage img;
  img.width = read_pnm_token(in);
  img.height = read_pnm_token(in);
  const int maxv = read_pnm_token(in);
  if (img.width <= 0 || img.height <= 0 || maxv <= 0 || maxv > 65535)
    throw std::runtime_error(path.string() + ": bad PGM header");
  img.max_value = static_cast<uint16_t>(maxv);
  in.get();  // single whitespace after maxval
  const size_t n = static_cast<size_t>(img.width) * img.height;
  img.pixels.resize(n);
  if (maxv < 256) {
    std::vector<uint8_t> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error(path.string() + ": truncated pixel data");
    std::copy(raw.begin(), raw.end(), img.pixels.begin());
  } else {
    std::vector<uint8_t> raw(n * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * 2));
    if (!in) throw std::runtime_error(path.string() + ": truncated pixel data");
    for (size_t i = 0; i < n; ++i)
      img.pixels[i] = static_cast<uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  }
  return img;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  if (img.width <= 0 || img.height <= 0)
    throw std::invalid_argument("write_pgm: empty image");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << img.width << " " << img.height << "\n" << img.max_value << "\n";
  const size_t n = img.pixels.size();
  if (img.max_value < 256) {
    std::vector<uint8_t> raw(n);
    for (size_t i = 0; i < n; ++i) raw[i] = static_cast<uint8_t>(img.pixels[i]);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(n));
  } else {
    std::vector<uint8_t> raw(n * 2);
    for (size_t i = 0; i < n; ++i) {
      raw[2 * i] = static_cast<uint8_t>(img.pixels[i] >> 8);
      raw[2 * i + 1] = static_cast<uint8_t>(img.pixels[i] & 0xff);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(n * 2));
  }
  if (!out) throw std::runtime_error("short write to " + path.string());
}

std::vector<float> to_float01(const GrayImage& img) {
  std::vector<float> out(img.pixels.size());
  const float inv = 1.0f / static_cast<float>(img.max_value);
  for (size_t i = 0; i < out.size(); ++i) out[i] = img.pixels[i] * inv;
  return out;
}

std::vector<float> minmax_normalize(const GrayImage& img) {
  std::vector<float> out(img.pixels.size(), 0.0f);
  if (img.pixels.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(img.pixels.begin(), img.pixels.end());
  const float lo = *lo_it, hi = *hi_it;
  if (hi <= lo) return out;
  const float inv = 1.0f / (hi - lo);
  for (size_t i = 0; i < out.size(); ++i) out[i] = (img.pixels[i] - lo) * inv;
  return out;
}

GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) throw std::invalid_argument("resize_bilinear: bad size");
  GrayImage out(out_w, out_h, img.max_value);
  const double sx = static_cast<double>(img.width) / out_w;
  const double sy = static_cast<double>(img.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    const double wy = fy - y0;
    y0 = std::clamp(y0, 0, img.height - 1);
    const int y1 = std::clamp(y0 + 1, 0, img.height - 1);
    for (int x = 0; x < out_w; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      const double wx = fx - x0;
      x0 = std::clamp(x0, 0, img.width - 1);
      const int x1 = std::clamp(x0 + 1, 0, img.width - 1);
      const double top = img.at(x0, y0) * (1 - wx) + img.at(x1, y0) * wx;
      const double bot = img.at(x0, y1) * (1 - wx) + img.at(x1, y1) * wx;
      const double v = top * (1 - wy) + bot * wy;
      out.at(x, y) = static_cast<uint16_t>(std::llround(std::clamp(v, 0.0, double(img.max_value))));
    }
  }
  return out;
}

GrayImage crop(const GrayImage& img, const BoundingBox& box) {
  if (!box.valid()) throw std::invalid_argument("crop: degenerate box");
  const int x0 = std::clamp(static_cast<int>(std::floor(box.x_min)), 0, img.width - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor(box.y_min)), 0, img.height - 1);
  const int x1 = std::clamp(static_cast<int>(std::ceil(box.x_max)), x0 + 1, img.width);
  const int y1 = std::clamp(static_cast<int>(std::ceil(box.y_max)), y0 + 1, img.height);
  GrayImage out(x1 - x0, y1 - y0, img.max_value);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) out.at(x - x0, y - y0) = img.at(x, y);
  return out;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  if (sigma < 0) throw std::invalid_argument("gaussian_blur: negative sigma");
  if (sigma == 0 || img.empty()) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (auto& k : kernel) k /= sum;

  const int w = img.width, h = img.height;
  std::vector<double> tmp(static_cast<size_t>(w) * h);
  // horizontal pass
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) {
        const int xi = std::clamp(x + i, 0, w - 1);
        acc += kernel[i + radius] * img.at(xi, y);
      }
      tmp[static_cast<size_t>(y) * w + x] = acc;
    }
  }
  GrayImage out(w, h, img.max_value);
  // vertical pass
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) {
        const int yi = std::clamp(y + i, 0, h - 1);
        acc += kernel[i + radius] * tmp[static_cast<size_t>(yi) * w + x];
      }
      out.at(x, y) = static_cast<uint16_t>(
          std::llround(std::clamp(acc, 0.0, double(img.max_value))));
    }
  }
  return out;
}

}  // namespace thermask
