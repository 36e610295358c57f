#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "vqkit/error.hpp"

namespace vqkit {

/// Interleaved RGB image, samples in [0,1], row-major.
struct ImageBuffer {
    int width = 0;
    int height = 0;
    std::vector<double> samples;  // size = width * height * 3

    static ImageBuffer create(int w, int h, double fill = 0.0) {
        ImageBuffer img;
        img.width = w;
        img.height = h;
        img.samples.assign(static_cast<size_t>(w) * h * 3, fill);
        return img;
    }

    double& at(int x, int y, int c) {
        return samples[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    double at(int x, int y, int c) const {
        return samples[(static_cast<size_t>(y) * width + x) * 3 + c];
    }

    /// Replicated-edge access.
    double at_clamped(int x, int y, int c) const {
        x = std::clamp(x, 0, width - 1);
        y = std::clamp(y, 0, height - 1);
        return at(x, y, c);
    }

    bool same_size(const ImageBuffer& other) const {
        return width == other.width && height == other.height;
    }

    void validate() const {
        if (width < 16 || height < 16 ||
            samples.size() != static_cast<size_t>(width) * height * 3) {
            throw Error(ErrorCode::InvalidArgument, "image must be RGB with width/height >= 16");
        }
        for (double v : samples) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw Error(ErrorCode::InvalidArgument, "image sample outside [0,1]");
            }
        }
    }
};

struct FrameSequence {
    std::vector<ImageBuffer> frames;
    double fps = 30.0;

    void validate() const {
        if (frames.size() < 2 || !(fps > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "sequence needs >= 2 frames and fps > 0");
        }
        for (const auto& f : frames) {
            f.validate();
            if (!f.same_size(frames.front())) {
                throw Error(ErrorCode::InvalidArgument, "sequence frames must share dimensions");
            }
        }
    }
};

inline void clamp01(ImageBuffer& img) {
    for (auto& v : img.samples) v = std::clamp(v, 0.0, 1.0);
}

inline constexpr double kLumaR = 0.299, kLumaG = 0.587, kLumaB = 0.114;  // BT.601

inline double luma_at(const ImageBuffer& img, int x, int y) {
    return kLumaR * img.at(x, y, 0) + kLumaG * img.at(x, y, 1) + kLumaB * img.at(x, y, 2);
}

inline std::vector<double> luma_plane(const ImageBuffer& img) {
    std::vector<double> out(static_cast<size_t>(img.width) * img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            out[static_cast<size_t>(y) * img.width + x] = luma_at(img, x, y);
        }
    }
    return out;
}

/// Peak signal-to-noise ratio in dB; +inf for identical images.
inline double psnr(const ImageBuffer& a, const ImageBuffer& b) {
    if (!a.same_size(b)) {
        throw Error(ErrorCode::InvalidArgument, "psnr: size mismatch");
    }
    double mse = 0.0;
    for (size_t i = 0; i < a.samples.size(); ++i) {
        const double d = a.samples[i] - b.samples[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.samples.size());
    if (mse <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

inline std::vector<double> gaussian_kernel(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[i + radius];
    }
    for (auto& v : k) v /= sum;
    return k;
}

/// Separable Gaussian blur with replicated edges.
inline ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma) {
    if (!(sigma > 0.0)) return img;
    const auto k = gaussian_kernel(sigma);
    const int radius = static_cast<int>(k.size() / 2);
    ImageBuffer tmp = ImageBuffer::create(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    acc += k[i + radius] * img.at_clamped(x + i, y, c);
                }
                tmp.at(x, y, c) = acc;
            }
        }
    }
    ImageBuffer out = ImageBuffer::create(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    acc += k[i + radius] * tmp.at_clamped(x, y + i, c);
                }
                out.at(x, y, c) = acc;
            }
        }
    }
    return out;
}

/// Dense 2-D convolution with an odd-sized square kernel, replicated edges.
inline ImageBuffer convolve2d(const ImageBuffer& img, const std::vector<double>& kernel,
                              int kernel_size) {
    const int radius = kernel_size / 2;
    ImageBuffer out = ImageBuffer::create(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int ky = -radius; ky <= radius; ++ky) {
                    for (int kx = -radius; kx <= radius; ++kx) {
                        acc += kernel[(ky + radius) * kernel_size + (kx + radius)] *
                               img.at_clamped(x + kx, y + ky, c);
                    }
                }
                out.at(x, y, c) = acc;
            }
        }
    }
    return out;
}

/// Bilinear sample with replicated edges.
inline double sample_bilinear(const ImageBuffer& img, double x, double y, int c) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    const double v00 = img.at_clamped(x0, y0, c);
    const double v10 = img.at_clamped(x0 + 1, y0, c);
    const double v01 = img.at_clamped(x0, y0 + 1, c);
    const double v11 = img.at_clamped(x0 + 1, y0 + 1, c);
    return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
}

inline ImageBuffer translate_replicate(const ImageBuffer& img, int dx, int dy) {
    ImageBuffer out = ImageBuffer::create(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                out.at(x, y, c) = img.at_clamped(x - dx, y - dy, c);
            }
        }
    }
    return out;
}

}  // namespace vqkit
