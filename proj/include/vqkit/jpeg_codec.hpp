#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "vqkit/color.hpp"
#include "vqkit/error.hpp"
#include "vqkit/image.hpp"

namespace vqkit {

// Baseline JPEG degradation without the (lossless) entropy-coding stage:
// YCbCr conversion, 4:2:0 chroma subsampling, blockwise DCT, quantization
// with the standard tables scaled by the libjpeg quality convention, then
// the inverse path. Bit-exact deterministic.

namespace jpegdetail {

inline constexpr std::array<int, 64> kLumaTable{
    16, 11, 10, 16, 24,  40,  51,  61,
    12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,
    14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,
    24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103, 99};

inline constexpr std::array<int, 64> kChromaTable{
    17, 18, 24, 47, 99, 99, 99, 99,
    18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99,
    47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99};

inline std::array<int, 64> scaled_table(const std::array<int, 64>& base, int quality) {
    quality = std::clamp(quality, 1, 100);
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    std::array<int, 64> out{};
    for (int i = 0; i < 64; ++i) {
        out[i] = std::clamp((base[i] * scale + 50) / 100, 1, 255);
    }
    return out;
}

struct DctBasis {
    double t[8][8];
    DctBasis() {
        const double pi = 3.14159265358979323846;
        for (int u = 0; u < 8; ++u) {
            const double cu = u == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
            for (int x = 0; x < 8; ++x) {
                t[u][x] = 0.5 * cu * std::cos((2 * x + 1) * u * pi / 16.0);
            }
        }
    }
};

inline const DctBasis& dct_basis() {
    static const DctBasis basis;
    return basis;
}

// Plane stored row-major with values around [0,255].
struct Plane {
    int width = 0, height = 0;
    std::vector<double> v;

    double at_clamped(int x, int y) const {
        x = std::clamp(x, 0, width - 1);
        y = std::clamp(y, 0, height - 1);
        return v[static_cast<size_t>(y) * width + x];
    }
};

inline void quantize_plane(Plane& plane, const std::array<int, 64>& table) {
    const auto& basis = dct_basis();
    const int bw = (plane.width + 7) / 8;
    const int bh = (plane.height + 7) / 8;
    for (int by = 0; by < bh; ++by) {
        for (int bx = 0; bx < bw; ++bx) {
            double block[8][8], coeff[8][8];
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) {
                    block[y][x] = plane.at_clamped(bx * 8 + x, by * 8 + y) - 128.0;
                }
            }
            // coeff = T * block * T'
            for (int u = 0; u < 8; ++u) {
                for (int x = 0; x < 8; ++x) {
                    double acc = 0.0;
                    for (int y = 0; y < 8; ++y) acc += basis.t[u][y] * block[y][x];
                    coeff[u][x] = acc;
                }
            }
            for (int u = 0; u < 8; ++u) {
                for (int w = 0; w < 8; ++w) {
                    double acc = 0.0;
                    for (int x = 0; x < 8; ++x) acc += coeff[u][x] * basis.t[w][x];
                    const int q = table[u * 8 + w];
                    block[u][w] = std::round(acc / q) * q;  // quantize + dequantize
                }
            }
            // inverse: T' * block * T
            for (int y = 0; y < 8; ++y) {
                for (int w = 0; w < 8; ++w) {
                    double acc = 0.0;
                    for (int u = 0; u < 8; ++u) acc += basis.t[u][y] * block[u][w];
                    coeff[y][w] = acc;
                }
            }
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) {
                    double acc = 0.0;
                    for (int w = 0; w < 8; ++w) acc += coeff[y][w] * basis.t[w][x];
                    const int px = bx * 8 + x, py = by * 8 + y;
                    if (px < plane.width && py < plane.height) {
                        plane.v[static_cast<size_t>(py) * plane.width + px] = acc + 128.0;
                    }
                }
            }
        }
    }
}

}  // namespace jpegdetail

inline ImageBuffer jpeg_roundtrip(const ImageBuffer& img, int quality) {
    using jpegdetail::Plane;
    if (quality < 1 || quality > 100) {
        throw Error(ErrorCode::InvalidSpec, "jpeg quality must be in [1,100]");
    }
    const int w = img.width, h = img.height;
    Plane y{w, h, std::vector<double>(static_cast<size_t>(w) * h)};
    const int cw = (w + 1) / 2, ch = (h + 1) / 2;
    Plane cb{cw, ch, std::vector<double>(static_cast<size_t>(cw) * ch)};
    Plane cr{cw, ch, std::vector<double>(static_cast<size_t>(cw) * ch)};

    std::vector<double> cb_full(static_cast<size_t>(w) * h), cr_full(cb_full.size());
    for (int py = 0; py < h; ++py) {
        for (int px = 0; px < w; ++px) {
            const auto ycc = rgb_to_ycbcr(img.at(px, py, 0), img.at(px, py, 1), img.at(px, py, 2));
            y.v[static_cast<size_t>(py) * w + px] = ycc[0] * 255.0;
            cb_full[static_cast<size_t>(py) * w + px] = ycc[1] * 255.0;
            cr_full[static_cast<size_t>(py) * w + px] = ycc[2] * 255.0;
        }
    }
    // 4:2:0 subsample: 2x2 box average
    for (int py = 0; py < ch; ++py) {
        for (int px = 0; px < cw; ++px) {
            double sb = 0.0, sr = 0.0;
            int count = 0;
            for (int dy = 0; dy < 2; ++dy) {
                for (int dx = 0; dx < 2; ++dx) {
                    const int sx = px * 2 + dx, sy = py * 2 + dy;
                    if (sx < w && sy < h) {
                        sb += cb_full[static_cast<size_t>(sy) * w + sx];
                        sr += cr_full[static_cast<size_t>(sy) * w + sx];
                        ++count;
                    }
                }
            }
            cb.v[static_cast<size_t>(py) * cw + px] = sb / count;
            cr.v[static_cast<size_t>(py) * cw + px] = sr / count;
        }
    }

    jpegdetail::quantize_plane(y, jpegdetail::scaled_table(jpegdetail::kLumaTable, quality));
    jpegdetail::quantize_plane(cb, jpegdetail::scaled_table(jpegdetail::kChromaTable, quality));
    jpegdetail::quantize_plane(cr, jpegdetail::scaled_table(jpegdetail::kChromaTable, quality));

    ImageBuffer out = ImageBuffer::create(w, h);
    for (int py = 0; py < h; ++py) {
        for (int px = 0; px < w; ++px) {
            const double yy = y.v[static_cast<size_t>(py) * w + px] / 255.0;
            const double bb = cb.at_clamped(px / 2, py / 2) / 255.0;
            const double rr = cr.at_clamped(px / 2, py / 2) / 255.0;
            const auto rgb = ycbcr_to_rgb(yy, bb, rr);
            for (int c = 0; c < 3; ++c) out.at(px, py, c) = std::clamp(rgb[c], 0.0, 1.0);
        }
    }
    return out;
}

}  // namespace vqkit
