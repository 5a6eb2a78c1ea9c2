#include "wildfusion/core/color.hpp"

namespace wf {
namespace {

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

// D65 reference white.
constexpr double kXn = 0.95047;
constexpr double kYn = 1.0;
constexpr double kZn = 1.08883;

// CIE f with the standard linear extension below (6/29)^3.
double lab_f(double t) {
  constexpr double kDelta3 = 216.0 / 24389.0;
  constexpr double kKappa = 24389.0 / 27.0;
  return t > kDelta3 ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0;
}

double lab_f_inv(double t) {
  constexpr double kDelta = 6.0 / 29.0;
  constexpr double kKappa = 24389.0 / 27.0;
  return t > kDelta ? t * t * t : (116.0 * t - 16.0) / kKappa;
}

}  // namespace

Vec3 rgb_to_lab(const std::array<std::uint8_t, 3>& rgb) {
  const double r = srgb_to_linear(rgb[0] / 255.0);
  const double g = srgb_to_linear(rgb[1] / 255.0);
  const double b = srgb_to_linear(rgb[2] / 255.0);

  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;

  const double fx = lab_f(x / kXn);
  const double fy = lab_f(y / kYn);
  const double fz = lab_f(z / kZn);

  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

std::array<std::uint8_t, 3> lab_to_rgb(const Vec3& lab) {
  const double fy = (lab.x() + 16.0) / 116.0;
  const double fx = fy + lab.y() / 500.0;
  const double fz = fy - lab.z() / 200.0;

  const double x = kXn * lab_f_inv(fx);
  const double y = kYn * lab_f_inv(fy);
  const double z = kZn * lab_f_inv(fz);

  const double r = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
  const double g = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
  const double b = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;

  auto to_u8 = [](double c) {
    const double s = linear_to_srgb(std::clamp(c, 0.0, 1.0));
    return static_cast<std::uint8_t>(std::lround(std::clamp(s, 0.0, 1.0) * 255.0));
  };
  return {to_u8(r), to_u8(g), to_u8(b)};
}

}  // namespace wf
