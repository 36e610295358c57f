#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "vqkit/image.hpp"

namespace vqkit {

// sRGB (D65) <-> CIELAB, plus HSV and full-range BT.601 YCbCr. The Lab and
// HSV round trips stay well under the 1e-3 contract for in-gamut values.

namespace colordetail {

inline double srgb_to_linear(double u) {
    return u <= 0.04045 ? u / 12.92 : std::pow((u + 0.055) / 1.055, 2.4);
}

inline double linear_to_srgb(double u) {
    return u <= 0.0031308 ? u * 12.92 : 1.055 * std::pow(u, 1.0 / 2.4) - 0.055;
}

inline double lab_f(double t) {
    constexpr double delta = 6.0 / 29.0;
    return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

inline double lab_f_inv(double t) {
    constexpr double delta = 6.0 / 29.0;
    return t > delta ? t * t * t : 3.0 * delta * delta * (t - 4.0 / 29.0);
}

inline constexpr double kXn = 0.95047, kYn = 1.0, kZn = 1.08883;

}  // namespace colordetail

inline std::array<double, 3> rgb_to_lab(double r, double g, double b) {
    using namespace colordetail;
    const double rl = srgb_to_linear(r), gl = srgb_to_linear(g), bl = srgb_to_linear(b);
    const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
    const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
    const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
    const double fx = lab_f(x / kXn), fy = lab_f(y / kYn), fz = lab_f(z / kZn);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

inline std::array<double, 3> lab_to_rgb(double L, double a, double b) {
    using namespace colordetail;
    const double fy = (L + 16.0) / 116.0;
    const double fx = fy + a / 500.0;
    const double fz = fy - b / 200.0;
    const double x = kXn * lab_f_inv(fx);
    const double y = kYn * lab_f_inv(fy);
    const double z = kZn * lab_f_inv(fz);
    const double rl = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
    const double gl = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
    const double bl = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;
    return {linear_to_srgb(std::clamp(rl, 0.0, 1.0)), linear_to_srgb(std::clamp(gl, 0.0, 1.0)),
            linear_to_srgb(std::clamp(bl, 0.0, 1.0))};
}

inline std::array<double, 3> rgb_to_hsv(double r, double g, double b) {
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double d = mx - mn;
    double h = 0.0;
    if (d > 0.0) {
        if (mx == r) {
            h = 60.0 * std::fmod((g - b) / d, 6.0);
        } else if (mx == g) {
            h = 60.0 * ((b - r) / d + 2.0);
        } else {
            h = 60.0 * ((r - g) / d + 4.0);
        }
        if (h < 0.0) h += 360.0;
    }
    const double s = mx > 0.0 ? d / mx : 0.0;
    return {h, s, mx};
}

inline std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
    const double c = v * s;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1)      { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else             { r = c; b = x; }
    const double m = v - c;
    return {r + m, g + m, b + m};
}

// Full-range BT.601 as used by JFIF. Y in [0,1], Cb/Cr centered at 0.5.
inline std::array<double, 3> rgb_to_ycbcr(double r, double g, double b) {
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    return {y, (b - y) / 1.772 + 0.5, (r - y) / 1.402 + 0.5};
}

inline std::array<double, 3> ycbcr_to_rgb(double y, double cb, double cr) {
    const double r = y + 1.402 * (cr - 0.5);
    const double b = y + 1.772 * (cb - 0.5);
    const double g = (y - 0.299 * r - 0.114 * b) / 0.587;
    return {r, g, b};
}

template <typename Fn>
inline ImageBuffer map_pixels(const ImageBuffer& img, Fn&& fn) {
    ImageBuffer out = ImageBuffer::create(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const auto v = fn(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = v[c];
        }
    }
    return out;
}

inline ImageBuffer image_rgb_to_lab(const ImageBuffer& img) {
    return map_pixels(img, [](double r, double g, double b) { return rgb_to_lab(r, g, b); });
}
inline ImageBuffer image_lab_to_rgb(const ImageBuffer& img) {
    return map_pixels(img, [](double L, double a, double b) { return lab_to_rgb(L, a, b); });
}
inline ImageBuffer image_rgb_to_hsv(const ImageBuffer& img) {
    return map_pixels(img, [](double r, double g, double b) { return rgb_to_hsv(r, g, b); });
}
inline ImageBuffer image_hsv_to_rgb(const ImageBuffer& img) {
    return map_pixels(img, [](double h, double s, double v) { return hsv_to_rgb(h, s, v); });
}
inline ImageBuffer image_rgb_to_ycbcr(const ImageBuffer& img) {
    return map_pixels(img, [](double r, double g, double b) { return rgb_to_ycbcr(r, g, b); });
}
inline ImageBuffer image_ycbcr_to_rgb(const ImageBuffer& img) {
    return map_pixels(img, [](double y, double cb, double cr) { return ycbcr_to_rgb(y, cb, cr); });
}

}  // namespace vqkit
