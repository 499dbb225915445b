// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <stdexcept>
#include <string>

namespace thermask {

/// Axis-aligned rectangle in continuous pixel coordinates, origin top-left.
/// A well-formed box has strictly positive area (x_min < x_max, y_min < y_max).
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }
  bool valid() const { return x_min < x_max && y_min < y_max; }

  /// Clamps the box to [0,w] x [0,h]. May produce a degenerate box when the
  /// input lies fully outside the frame.
  BoundingBox clamped(double w, double h) const {
    return {std::clamp(x_min, 0.0, w), std::clamp(y_min, 0.0, h),
            std::clamp(x_max, 0.0, w), std::clamp(y_max, 0.0, h)};
  }

  bool operator==(const BoundingBox&) const = default;
};

/// The three mask types; values double as label-file class indices.
enum class MaskClass { FFP2 = 0, SURGERY = 1, CLOTH = 2 };

inline constexpr std::array<MaskClass, 3> kMaskClasses = {
    MaskClass::FFP2, MaskClass::SURGERY, MaskClass::CLOTH};
inline constexpr int kNumMaskClasses = 3;

inline const char* to_string(MaskClass c) {
  switch (c) {
    case MaskClass::FFP2: return "FFP2";
    case MaskClass::SURGERY: return "SURGERY";
    case MaskClass::CLOTH: return "CLOTH";
  }
  return "?";
}

inline MaskClass mask_class_from_index(int idx) {
  if (idx < 0 || idx >= kNumMaskClasses)
    throw std::invalid_argument("mask class index out of range: " + std::to_string(idx));
  return static_cast<MaskClass>(idx);
}

inline MaskClass mask_class_from_string(const std::string& s) {
  for (MaskClass c : kMaskClasses)
    if (s == to_string(c)) return c;
  throw std::invalid_argument("unknown mask class: " + s);
}

/// Annotation label: a specific mask type, or nullopt for the single
/// class-agnostic detection label ("MASK").
using ClassLabel = std::optional<MaskClass>;

inline std::string to_string(const ClassLabel& l) {
  return l ? to_string(*l) : "MASK";
}

}  // namespace thermask
