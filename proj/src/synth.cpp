// SPDX-License-Identifier: Apache-2.0
#include "thermask/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thermask::synth {

namespace fs = std::filesystem;

GrayImage to_grayscale(const RgbImage& rgb) {
  if (rgb.pixels.size() != static_cast<size_t>(rgb.width) * rgb.height * 3)
    throw std::invalid_argument("to_grayscale: expected a 3-channel 8-bit raster");
  GrayImage out(rgb.width, rgb.height, 255);
  for (size_t i = 0; i < out.pixels.size(); ++i) {
    const uint8_t* p = &rgb.pixels[i * 3];
    const double v = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    out.pixels[i] = static_cast<uint16_t>(std::llround(v));
  }
  return out;
}

GrayImage thermalize(const GrayImage& gray, double noise_sigma, double blur_radius,
                     Rng& rng) {
  if (noise_sigma < 0) throw std::invalid_argument("thermalize: negative noise sigma");
  if (blur_radius < 0) throw std::invalid_argument("thermalize: negative blur radius");
  GrayImage out = gaussian_blur(gray, blur_radius);
  if (noise_sigma > 0) {
    const double maxv = out.max_value;
    for (auto& px : out.pixels) {
      const double v = px + rng.normal(0.0, noise_sigma);
      px = static_cast<uint16_t>(std::llround(std::clamp(v, 0.0, maxv)));
    }
  }
  return out;
}

std::pair<GrayImage, dataset::Annotation> overlay_mask(const GrayImage& face_image,
                                                       const BoundingBox& face_box,
                                                       const MaskTemplate& tmpl, Rng& rng) {
  if (!face_box.valid()) throw std::invalid_argument("overlay_mask: degenerate face box");
  if (face_box.x_min < 0 || face_box.y_min < 0 || face_box.x_max > face_image.width ||
      face_box.y_max > face_image.height)
    throw std::invalid_argument("overlay_mask: face box outside image");
  if (tmpl.width <= 0 || tmpl.height <= 0 || !tmpl.has_opaque_pixel())
    throw std::invalid_argument("overlay_mask: template has no opaque pixel");

  // Anchor region inside the face box; jitter shrinks and slides the target
  // rectangle but never leaves the anchor.
  const double ax = face_box.x_min + tmpl.anchor.x * face_box.width();
  const double ay = face_box.y_min + tmpl.anchor.y * face_box.height();
  const double aw = tmpl.anchor.w * face_box.width();
  const double ah = tmpl.anchor.h * face_box.height();
  const double scale = rng.uniform(0.90, 1.0);
  const double tw = aw * scale, th = ah * scale;
  const double tx = ax + rng.uniform(0.0, aw - tw);
  const double ty = ay + rng.uniform(0.0, ah - th);

  GrayImage out = face_image;
  const double maxv = out.max_value;
  int min_x = out.width, min_y = out.height, max_x = -1, max_y = -1;
  const int x0 = static_cast<int>(std::ceil(tx));
  const int y0 = static_cast<int>(std::ceil(ty));
  const int x1 = static_cast<int>(std::floor(tx + tw));
  const int y1 = static_cast<int>(std::floor(ty + th));
  for (int y = y0; y < y1; ++y) {
    if (y < 0 || y >= out.height) continue;
    const double v = (y - ty) / th;
    for (int x = x0; x < x1; ++x) {
      if (x < 0 || x >= out.width) continue;
      const double u = (x - tx) / tw;
      // Bilinear sample of the template at (u, v).
      const double fx = u * (tmpl.width - 1);
      const double fy = v * (tmpl.height - 1);
      const int ix = std::clamp(static_cast<int>(fx), 0, tmpl.width - 2);
      const int iy = std::clamp(static_cast<int>(fy), 0, tmpl.height - 2);
      const double wx = fx - ix, wy = fy - iy;
      auto sample = [&](const std::vector<uint8_t>& plane) {
        const double top = plane[iy * tmpl.width + ix] * (1 - wx) +
                           plane[iy * tmpl.width + ix + 1] * wx;
        const double bot = plane[(iy + 1) * tmpl.width + ix] * (1 - wx) +
                           plane[(iy + 1) * tmpl.width + ix + 1] * wx;
        return top * (1 - wy) + bot * wy;
      };
      if (sample(tmpl.alpha) < 128.0) continue;
      const double g = sample(tmpl.gray) / 255.0;
      out.at(x, y) = static_cast<uint16_t>(std::llround(std::clamp(g * maxv, 0.0, maxv)));
      min_x = std::min(min_x, x);
      min_y = std::min(min_y, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
    }
  }
  if (max_x < 0) throw std::runtime_error("overlay_mask: no pixels composited");
  dataset::Annotation anno;
  anno.label = tmpl.class_label;
  anno.box = {static_cast<double>(min_x), static_cast<double>(min_y),
              static_cast<double>(max_x + 1), static_cast<double>(max_y + 1)};
  return {std::move(out), std::move(anno)};
}

namespace {

MaskTemplate make_template(const std::string& id, MaskClass cls, int w, int h,
                           MaskTemplate::Anchor anchor) {
  MaskTemplate t;
  t.template_id = id;
  t.class_label = cls;
  t.width = w;
  t.height = h;
  t.gray.assign(static_cast<size_t>(w) * h, 128);
  t.alpha.assign(static_cast<size_t>(w) * h, 0);
  t.anchor = anchor;
  return t;
}

// FFP2: straight top, sides tapering to a protruding rounded bottom point
// (duck-bill), with a bright horizontal seam across the middle.
MaskTemplate ffp2_template() {
  const int w = 80, h = 64;
  MaskTemplate t = make_template("ffp2_wedge", MaskClass::FFP2, w, h,
                                 {0.14, 0.50, 0.72, 0.46});
  for (int y = 0; y < h; ++y) {
    const double v = static_cast<double>(y) / (h - 1);
    // Half-width narrows from 1.0 at the top to a point at the bottom.
    const double half = v < 0.25 ? 1.0 : std::max(0.0, 1.0 - std::pow((v - 0.25) / 0.75, 1.35));
    for (int x = 0; x < w; ++x) {
      const double u = 2.0 * x / (w - 1) - 1.0;
      if (std::abs(u) > half) continue;
      t.alpha[y * w + x] = 255;
      double g = 128;
      if (std::abs(v - 0.45) < 0.035) g = 228;  // seam ridge
      if (half - std::abs(u) < 0.06) g = 70;    // darker rim
      t.gray[y * w + x] = static_cast<uint8_t>(g);
    }
  }
  return t;
}

// Surgical: full flat rectangle with three darker pleat lines.
MaskTemplate surgery_template() {
  const int w = 80, h = 48;
  MaskTemplate t = make_template("surgery_pleated", MaskClass::SURGERY, w, h,
                                 {0.12, 0.55, 0.76, 0.34});
  for (int y = 0; y < h; ++y) {
    const double v = static_cast<double>(y) / (h - 1);
    for (int x = 0; x < w; ++x) {
      t.alpha[y * w + x] = 255;
      double g = 140;
      for (double pleat : {0.25, 0.5, 0.75})
        if (std::abs(v - pleat) < 0.045) g = 60;
      t.gray[y * w + x] = static_cast<uint8_t>(g);
    }
  }
  return t;
}

// Cloth: trapezoid with rounded bottom corners and blotchy weave texture.
MaskTemplate cloth_template() {
  const int w = 80, h = 56;
  MaskTemplate t = make_template("cloth_trapezoid", MaskClass::CLOTH, w, h,
                                 {0.12, 0.52, 0.76, 0.42});
  Rng rng(4242);
  // Low-frequency value noise on a coarse lattice.
  const int gw = 9, gh = 7;
  std::vector<double> lattice(gw * gh);
  for (auto& v : lattice) v = rng.uniform();
  auto noise = [&](double u, double v) {
    const double fx = u * (gw - 1), fy = v * (gh - 1);
    const int ix = std::min(static_cast<int>(fx), gw - 2);
    const int iy = std::min(static_cast<int>(fy), gh - 2);
    const double wx = fx - ix, wy = fy - iy;
    const double top = lattice[iy * gw + ix] * (1 - wx) + lattice[iy * gw + ix + 1] * wx;
    const double bot =
        lattice[(iy + 1) * gw + ix] * (1 - wx) + lattice[(iy + 1) * gw + ix + 1] * wx;
    return top * (1 - wy) + bot * wy;
  };
  for (int y = 0; y < h; ++y) {
    const double v = static_cast<double>(y) / (h - 1);
    const double half = 1.0 - 0.25 * v;  // gentle taper
    const double round = v > 0.72 ? std::sqrt(std::max(0.0, 1.0 - std::pow((v - 0.72) / 0.28, 2.0))) : 1.0;
    for (int x = 0; x < w; ++x) {
      const double u = 2.0 * x / (w - 1) - 1.0;
      if (std::abs(u) > half * round) continue;
      t.alpha[y * w + x] = 255;
      t.gray[y * w + x] = static_cast<uint8_t>(100 + 80 * noise(0.5 * (u + 1), v));
    }
  }
  return t;
}

// Scarf-like cloth distractor: wide drape with diagonal stripes.
MaskTemplate scarf_template() {
  const int w = 96, h = 56;
  MaskTemplate t = make_template("scarf_drape", MaskClass::CLOTH, w, h,
                                 {0.06, 0.56, 0.88, 0.40});
  for (int y = 0; y < h; ++y) {
    const double v = static_cast<double>(y) / (h - 1);
    const double top_round =
        v < 0.15 ? std::sqrt(std::max(0.0, 1.0 - std::pow((0.15 - v) / 0.15, 2.0))) : 1.0;
    for (int x = 0; x < w; ++x) {
      const double u = 2.0 * x / (w - 1) - 1.0;
      if (std::abs(u) > top_round) continue;
      t.alpha[y * w + x] = 255;
      const double stripe = std::sin(10.0 * (u + 1.6 * v));
      t.gray[y * w + x] = static_cast<uint8_t>(120 + 48 * stripe);
    }
  }
  return t;
}

}  // namespace

std::vector<MaskTemplate> builtin_templates() {
  return {ffp2_template(), surgery_template(), cloth_template(), scarf_template()};
}

MaskTemplate shade_template(const MaskTemplate& tmpl, double level, double texture_amp) {
  MaskTemplate out = tmpl;
  for (size_t i = 0; i < out.gray.size(); ++i) {
    const double centered = tmpl.gray[i] / 255.0 - 0.5;
    const double v = level + texture_amp * 2.0 * centered;
    out.gray[i] = static_cast<uint8_t>(std::llround(std::clamp(v, 0.0, 1.0) * 255.0));
  }
  return out;
}

namespace {

struct SubjectGeometry {
  double semi_a;      // horizontal semi-axis, fraction of frame
  double aspect;      // vertical/horizontal axis ratio
  double center_dx;   // center bias, fraction of frame
  double center_dy;
};

SubjectGeometry subject_geometry(const Rng& root, int subject) {
  Rng rng = root.derive(0x5abe0000ULL + static_cast<uint64_t>(subject));
  SubjectGeometry g;
  g.semi_a = rng.uniform(0.20, 0.27);
  g.aspect = rng.uniform(1.18, 1.40);
  g.center_dx = rng.uniform(-0.03, 0.03);
  g.center_dy = rng.uniform(-0.03, 0.03);
  return g;
}

void validate_config(const SynthConfig& config, const std::vector<MaskTemplate>& templates) {
  if (config.n_images <= 0) throw std::invalid_argument("synth: n_images must be positive");
  if (config.image_size < 16) throw std::invalid_argument("synth: image_size too small");
  if (config.bit_depth != 8 && config.bit_depth != 14 && config.bit_depth != 16)
    throw std::invalid_argument("synth: bit_depth must be 8, 14 or 16");
  double sum = 0;
  for (double p : config.class_mix) {
    if (p < 0) throw std::invalid_argument("synth: negative class probability");
    sum += p;
  }
  if (sum <= 0) throw std::invalid_argument("synth: class mix is zero everywhere");
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("synth: class mix must sum to 1");
  if (templates.empty()) throw std::invalid_argument("synth: no templates");
  for (int c = 0; c < kNumMaskClasses; ++c) {
    if (config.class_mix[c] <= 0) continue;
    const bool covered = std::any_of(templates.begin(), templates.end(), [&](const auto& t) {
      return t.class_label == kMaskClasses[c];
    });
    if (!covered)
      throw std::invalid_argument(std::string("synth: no template covers class ") +
                                  to_string(kMaskClasses[c]));
  }
}

const std::array<const char*, 3> kCameras = {"boson-sim", "a320-sim", "a655-sim"};

}  // namespace

GeneratedDataset generate_synthetic_dataset(const SynthConfig& config,
                                            const std::vector<MaskTemplate>& templates) {
  validate_config(config, templates);
  const Rng root(config.seed);
  const int size = config.image_size;
  const uint16_t maxv = config.bit_depth == 8    ? 255
                        : config.bit_depth == 14 ? 16383
                                                 : 65535;
  const double noise = config.noise_sigma * maxv / 255.0;

  GeneratedDataset out;
  char id_buf[32];
  for (int i = 0; i < config.n_images; ++i) {
    Rng rng = root.derive(static_cast<uint64_t>(i));
    const int subject = config.n_subjects > 0 ? i % config.n_subjects : 0;
    const SubjectGeometry geo = subject_geometry(root, subject);

    const double cx = (0.5 + geo.center_dx + rng.uniform(-0.025, 0.025)) * size;
    const double cy = (0.46 + geo.center_dy + rng.uniform(-0.025, 0.025)) * size;
    const double a = geo.semi_a * size * rng.uniform(0.94, 1.06);
    const double b = a * geo.aspect;

    // Background ramp + warm elliptical face with radial falloff.
    GrayImage img(size, size, maxv);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double dx = (x - cx) / a, dy = (y - cy) / b;
        const double r2 = dx * dx + dy * dy;
        double v = 0.06 + 0.05 * y / size;
        if (r2 <= 1.0) v = 0.95 - 0.17 * r2;
        img.at(x, y) = static_cast<uint16_t>(std::llround(std::clamp(v, 0.0, 1.0) * maxv));
      }
    }

    const BoundingBox face_box =
        BoundingBox{cx - a, cy - b, cx + a, cy + b}.clamped(size, size);

    // Pick a class from the mix, then one of its templates.
    const double u = rng.uniform();
    int cls = kNumMaskClasses - 1;
    double acc = 0;
    for (int c = 0; c < kNumMaskClasses; ++c) {
      acc += config.class_mix[c];
      if (u < acc) {
        cls = c;
        break;
      }
    }
    while (config.class_mix[cls] <= 0) --cls;  // fp tail guard
    std::vector<const MaskTemplate*> candidates;
    for (const auto& t : templates)
      if (t.class_label == kMaskClasses[cls]) candidates.push_back(&t);
    const MaskTemplate* chosen =
        candidates[candidates.size() == 1 ? 0
                                          : rng.uniform_int(0, static_cast<int>(candidates.size()) - 1)];

    const double skin_level = 0.88;
    const MaskTemplate shaded =
        shade_template(*chosen, skin_level - config.mask_contrast, 0.10);
    auto [with_mask, anno] = overlay_mask(img, face_box, shaded, rng);
    GrayImage final_img = thermalize(with_mask, noise, config.blur_radius, rng);

    std::snprintf(id_buf, sizeof(id_buf), "img_%06d", i);
    const std::string image_id = id_buf;
    dataset::ImageRecord rec;
    rec.image_id = image_id;
    rec.path = "images/" + image_id + ".pgm";
    rec.width = size;
    rec.height = size;
    rec.bit_depth = config.bit_depth;
    rec.camera = kCameras[i % kCameras.size()];
    std::snprintf(id_buf, sizeof(id_buf), "s%02d", subject);
    rec.subject_id = std::string(id_buf);
    rec.face_box = face_box;
    anno.image_id = image_id;
    out.manifest.records.push_back(std::move(rec));
    out.manifest.annotations.push_back(std::move(anno));
    out.images.emplace(image_id, std::move(final_img));
  }

  // Per-camera 90/10 split; a singleton group goes to TRAIN.
  std::map<std::string, std::vector<std::string>> groups;
  for (const auto& rec : out.manifest.records) groups[rec.camera].push_back(rec.image_id);
  for (auto& [camera, ids] : groups) {
    if (ids.size() < 2) {
      for (const auto& id : ids) out.manifest.split[id] = dataset::Split::TRAIN;
      continue;
    }
    uint64_t camera_hash = 1469598103934665603ULL;
    for (unsigned char c : camera) camera_hash = (camera_hash ^ c) * 1099511628211ULL;
    Rng rng = root.derive(0xca3e7aULL ^ camera_hash);
    rng.shuffle(ids);
    const auto n = static_cast<long>(ids.size());
    const long n_train = std::clamp(std::lround(0.9 * n), 1L, n - 1);
    for (long k = 0; k < n; ++k)
      out.manifest.split[ids[k]] =
          k < n_train ? dataset::Split::TRAIN : dataset::Split::TEST;
  }
  return out;
}

GeneratedDataset write_synthetic_dataset(const SynthConfig& config,
                                         const std::vector<MaskTemplate>& templates,
                                         const fs::path& out_dir) {
  GeneratedDataset data = generate_synthetic_dataset(config, templates);
  fs::create_directories(out_dir / "images");
  for (const auto& [id, img] : data.images) write_pgm(img, out_dir / "images" / (id + ".pgm"));
  dataset::save_labels(data.manifest, out_dir / "labels");
  dataset::save_manifest(data.manifest, out_dir / "manifest.json");
  return data;
}

}  // namespace thermask::synth
