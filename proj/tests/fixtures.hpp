#pragma once

// Deterministic synthetic fixtures shared by image-path tests. All three are
// texture-rich (no flat regions, thousands of distinct colors) so that every
// PSNR-monotone distortion has signal to destroy at every severity.

#include <cmath>
#include <cstdint>

#include "vqkit/image.hpp"
#include "vqkit/rng.hpp"

namespace fixtures {

// Smooth multi-scale value noise in [0,1].
inline double value_noise(vqkit::Rng& rng, std::vector<double>& grid, int gw, int gh, double gx,
                          double gy) {
    const int x0 = std::min(static_cast<int>(gx), gw - 2);
    const int y0 = std::min(static_cast<int>(gy), gh - 2);
    const double fx = gx - x0, fy = gy - y0;
    auto s = [](double t) { return t * t * (3 - 2 * t); };
    const double sx = s(fx), sy = s(fy);
    return (1 - sy) * ((1 - sx) * grid[y0 * gw + x0] + sx * grid[y0 * gw + x0 + 1]) +
           sy * ((1 - sx) * grid[(y0 + 1) * gw + x0] + sx * grid[(y0 + 1) * gw + x0 + 1]);
}

/// Gradient background, colored discs, a diagonal band, plus mild texture.
inline vqkit::ImageBuffer scene(int w = 128, int h = 96) {
    vqkit::ImageBuffer img = vqkit::ImageBuffer::create(w, h);
    vqkit::Rng rng(0xF1A7u);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double r = 0.25 + 0.5 * x / (w - 1.0);
            double g = 0.3 + 0.4 * y / (h - 1.0);
            double b = 0.6 - 0.3 * x / (w - 1.0);
            const double d1 = std::hypot(x - w * 0.3, y - h * 0.35);
            const double d2 = std::hypot(x - w * 0.7, y - h * 0.6);
            if (d1 < h * 0.22) { r = 0.85; g = 0.25; b = 0.2; }
            if (d2 < h * 0.18) { r = 0.15; g = 0.6; b = 0.8; }
            if (std::abs((x - y) % 24) < 3) { r = 0.9; g = 0.85; b = 0.3; }
            const double t = 0.04 * (rng.uniform() - 0.5);
            img.at(x, y, 0) = std::clamp(r + t, 0.02, 0.98);
            img.at(x, y, 1) = std::clamp(g + t, 0.02, 0.98);
            img.at(x, y, 2) = std::clamp(b + t, 0.02, 0.98);
        }
    }
    return img;
}

/// Multi-scale value noise with hue variation.
inline vqkit::ImageBuffer texture(int w = 128, int h = 96) {
    vqkit::ImageBuffer img = vqkit::ImageBuffer::create(w, h);
    vqkit::Rng rng(0x7E47u);
    const int gw = 10, gh = 8;
    std::vector<double> coarse(gw * gh), fine(gw * 2 * gh * 2);
    for (auto& v : coarse) v = rng.uniform();
    for (auto& v : fine) v = rng.uniform();
    vqkit::Rng jitter(0xBEEFu);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double c = value_noise(rng, coarse, gw, gh, x * (gw - 1.0) / (w - 1.0),
                                         y * (gh - 1.0) / (h - 1.0));
            const double f = value_noise(rng, fine, gw * 2, gh * 2, x * (gw * 2 - 1.0) / (w - 1.0),
                                         y * (gh * 2 - 1.0) / (h - 1.0));
            const double n = 0.08 * (jitter.uniform() - 0.5);
            img.at(x, y, 0) = std::clamp(0.25 + 0.55 * c + 0.15 * f + n, 0.02, 0.98);
            img.at(x, y, 1) = std::clamp(0.35 + 0.35 * f + 0.2 * c + n, 0.02, 0.98);
            img.at(x, y, 2) = std::clamp(0.55 - 0.35 * c + 0.25 * f + n, 0.02, 0.98);
        }
    }
    return img;
}

/// Broadband synthetic patterns: a two-dimensional chirp, color bars, and a
/// chirped checker ramp. Spread spectra keep PSNR strictly falling under
/// directional blurs (discrete frequencies would hit the sinc lobes of a
/// line PSF and oscillate).
inline vqkit::ImageBuffer bars(int w = 128, int h = 96) {
    vqkit::ImageBuffer img = vqkit::ImageBuffer::create(w, h);
    vqkit::Rng rng(0xCAFEu);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double r, g, b;
            if (y < h / 3) {
                const double chirp = std::sin(0.002 * x * x + 0.25 * y) *
                                     std::sin(0.004 * y * y + 0.18 * x);
                r = g = b = 0.5 + 0.4 * chirp;
            } else if (y < 2 * h / 3) {
                const int band = (x * 6) / w;
                r = band == 0 || band == 3 || band == 5 ? 0.85 : 0.15;
                g = band == 1 || band == 3 ? 0.8 : 0.2;
                b = band == 2 || band == 4 || band == 5 ? 0.8 : 0.15;
            } else {
                const double v = std::sin(0.0035 * x * x + 0.4 * y) > 0 ? 1.0 : 0.0;
                const double ramp = 0.15 + 0.7 * x / (w - 1.0);
                r = g = b = v * ramp + (1.0 - v) * (1.0 - ramp);
            }
            // slow diagonal gain breaks the pattern periodicity; concentric
            // rings add structure at every orientation and two radial scales
            const double gain = 0.7 + 0.5 * (x + y) / (w + h - 2.0);
            const double radius = std::hypot(x - w * 0.42, y - h * 0.55);
            const double rings = 0.08 * std::sin(radius * 0.7) + 0.08 * std::sin(radius * 0.26);
            const double t = 0.05 * (rng.uniform() - 0.5);
            img.at(x, y, 0) = std::clamp(r * gain + rings + t, 0.02, 0.98);
            img.at(x, y, 1) = std::clamp(g * gain + rings + t, 0.02, 0.98);
            img.at(x, y, 2) = std::clamp(b * gain + rings + t, 0.02, 0.98);
        }
    }
    return img;
}

inline std::vector<vqkit::ImageBuffer> all_images() { return {scene(), texture(), bars()}; }

/// Drifting-scene clip (panning crop of a larger scene with varying tint).
inline vqkit::FrameSequence clip(int frames = 12, int w = 64, int h = 48) {
    const vqkit::ImageBuffer base = scene(w * 2, h * 2);
    vqkit::FrameSequence seq;
    seq.fps = 10.0;
    for (int t = 0; t < frames; ++t) {
        vqkit::ImageBuffer f = vqkit::ImageBuffer::create(w, h);
        const int ox = (t * 3) % w;
        const int oy = (t * 2) % h;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                for (int c = 0; c < 3; ++c) {
                    f.at(x, y, c) = std::clamp(
                        base.at(x + ox, y + oy, c) + 0.01 * std::sin(0.7 * t + c), 0.0, 1.0);
                }
            }
        }
        seq.frames.push_back(std::move(f));
    }
    return seq;
}

inline vqkit::FrameSequence static_clip(int frames = 8, int w = 48, int h = 32) {
    vqkit::FrameSequence seq;
    seq.fps = 10.0;
    const vqkit::ImageBuffer frame = texture(w, h);
    for (int t = 0; t < frames; ++t) seq.frames.push_back(frame);
    return seq;
}

}  // namespace fixtures
