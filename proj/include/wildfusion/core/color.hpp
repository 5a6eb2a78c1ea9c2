#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "wildfusion/core/types.hpp"

namespace wf {

/// sRGB (8-bit, D65) to CIELAB. Components of the result are L in [0,100],
/// a and b roughly in [-128,127].
Vec3 rgb_to_lab(const std::array<std::uint8_t, 3>& rgb);

/// CIELAB back to 8-bit sRGB. Out-of-gamut values are clamped per channel
/// before quantization.
std::array<std::uint8_t, 3> lab_to_rgb(const Vec3& lab);

/// Affine squash of LAB into [0,1]^3: L/100, (a+128)/255, (b+128)/255.
inline Vec3 normalize_lab(const Vec3& lab) {
  return {lab.x() / 100.0, (lab.y() + 128.0) / 255.0, (lab.z() + 128.0) / 255.0};
}

inline Vec3 denormalize_lab(const Vec3& n) {
  return {n.x() * 100.0, n.y() * 255.0 - 128.0, n.z() * 255.0 - 128.0};
}

constexpr int kColorBins = 16;

/// Bin index of one normalized channel value. Values at or above 1 land in
/// the last bin.
inline int color_bin(double v) {
  int b = static_cast<int>(std::floor(v * kColorBins));
  return std::clamp(b, 0, kColorBins - 1);
}

inline std::array<int, 3> color_bins(const Vec3& normalized_lab) {
  return {color_bin(normalized_lab.x()), color_bin(normalized_lab.y()),
          color_bin(normalized_lab.z())};
}

/// Center of a bin in normalized coordinates.
inline double color_bin_center(int bin) {
  return (static_cast<double>(bin) + 0.5) / kColorBins;
}

}  // namespace wf
