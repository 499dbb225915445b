// SPDX-License-Identifier: Apache-2.0
//
// Labeled masked-face image synthesis: mask overlay onto provided face
// photos, plus a fully procedural thermal-style generator for
// self-contained experiments.
#pragma once

#include <array>
#include <map>
#include <utility>
#include <vector>

#include "thermask/box.hpp"
#include "thermask/dataset.hpp"
#include "thermask/image.hpp"
#include "thermask/rng.hpp"

namespace thermask::synth {

/// A compositable mask shape. `gray` holds intensities, `alpha` the
/// opacity (>= 128 composites). `anchor` is the placement rectangle inside
/// a face box, in fractions of face width/height.
struct MaskTemplate {
  std::string template_id;
  MaskClass class_label = MaskClass::FFP2;
  int width = 0;
  int height = 0;
  std::vector<uint8_t> gray;
  std::vector<uint8_t> alpha;
  struct Anchor {
    double x = 0, y = 0, w = 1, h = 1;
  } anchor;

  bool has_opaque_pixel() const {
    for (uint8_t a : alpha)
      if (a >= 128) return true;
    return false;
  }
};

struct SynthConfig {
  int n_images = 600;
  int image_size = 128;  // square frames
  std::array<double, 3> class_mix = {1.0 / 3, 1.0 / 3, 1.0 / 3};  // FFP2, SURGERY, CLOTH
  double noise_sigma = 2.0;   // additive Gaussian noise, 8-bit intensity units
  double blur_radius = 1.0;   // Gaussian sigma in pixels
  uint64_t seed = 0;
  int bit_depth = 8;          // 8, 14 or 16
  double mask_contrast = 0.33;  // skin-to-mask intensity drop, fraction of white
  int n_subjects = 10;
};

/// Luminosity grayscale conversion, 0.299R + 0.587G + 0.114B, rounded.
GrayImage to_grayscale(const RgbImage& rgb);

/// Gaussian blur followed by additive Gaussian noise, clamped to the valid
/// range. `noise_sigma` is in the image's own intensity units.
GrayImage thermalize(const GrayImage& gray, double noise_sigma, double blur_radius, Rng& rng);

/// Composites `tmpl` into the anchor region of `face_box` (with a small
/// shrink-only placement jitter) and returns the modified raster plus the
/// tight bounding box of the written pixels as an annotation.
std::pair<GrayImage, dataset::Annotation> overlay_mask(const GrayImage& face_image,
                                                       const BoundingBox& face_box,
                                                       const MaskTemplate& tmpl, Rng& rng);

/// The shipped procedural templates: a protruding FFP2 wedge, a pleated flat
/// surgical rectangle, a rounded cloth trapezoid, and a scarf-like cloth
/// distractor.
std::vector<MaskTemplate> builtin_templates();

/// A template copy with intensities re-shaded for thermal compositing:
/// `level` is the target mean intensity and `texture_amp` the amplitude of
/// the template's own texture, both as fractions of white.
MaskTemplate shade_template(const MaskTemplate& tmpl, double level, double texture_amp);

struct GeneratedDataset {
  dataset::DatasetManifest manifest;
  std::map<std::string, GrayImage> images;  // image_id -> raster
};

/// Procedural scenes: an elliptical warm face on a cool background with a
/// class-shaped cooler mask region. Subjects get stable per-subject face
/// geometry; cameras rotate round-robin; the split is stratified 90/10 by
/// camera. Deterministic per (config, seed).
GeneratedDataset generate_synthetic_dataset(const SynthConfig& config,
                                            const std::vector<MaskTemplate>& templates);

/// generate + write images/, labels/, manifest.json under out_dir.
GeneratedDataset write_synthetic_dataset(const SynthConfig& config,
                                         const std::vector<MaskTemplate>& templates,
                                         const std::filesystem::path& out_dir);

}  // namespace thermask::synth
