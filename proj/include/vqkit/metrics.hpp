#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "vqkit/error.hpp"
#include "vqkit/image.hpp"

namespace vqkit {

// The nine low-level quality metrics used for corpus characterization.
// Formula constants are grouped here so they stay documented in one place.
struct MetricConfig {
    double flicker_threshold = 0.02;      // significant mean-luma jump
    double blockiness_floor = 1e-6;       // denominator stabilizer
    double cpbd_edge_threshold = 0.08;    // |Sobel_x| on unit-luma scale
    double cpbd_beta = 3.6;               // JNB psychometric exponent
    double cpbd_prob_threshold = 0.63;    // blur-detection pooling cut
    double cpbd_low_contrast = 50.0 / 255.0;  // JNB width switch point
    double noise_lowpass_sigma = 2.0;
};

struct CpbdResult {
    double value = 0.0;
    bool no_edges = false;
};

struct MetricReport {
    double blockiness = 0.0;
    double blur_cpbd = 0.0;
    bool blur_no_edges = false;
    double contrast = 0.0;
    double noise = 0.0;
    double colourfulness = 0.0;
    double luminance = 0.0;
    double spatial_info = 0.0;
    std::optional<double> flicker;        // sequences only
    std::optional<double> temporal_info;  // sequences only
};

namespace metricdetail {

struct LumaGrid {
    int width = 0, height = 0;
    std::vector<double> v;
    double at(int x, int y) const { return v[static_cast<size_t>(y) * width + x]; }
};

inline LumaGrid luma_grid(const ImageBuffer& img) {
    return {img.width, img.height, luma_plane(img)};
}

inline double mean_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    return v.empty() ? 0.0 : m / static_cast<double>(v.size());
}

inline double population_std(const std::vector<double>& v) {
    const double m = mean_of(v);
    double var = 0.0;
    for (double x : v) var += (x - m) * (x - m);
    return v.empty() ? 0.0 : std::sqrt(var / static_cast<double>(v.size()));
}

// Sobel responses on the interior (1-pixel border excluded).
inline void sobel(const LumaGrid& g, std::vector<double>* gx_out, std::vector<double>* gy_out,
                  std::vector<double>* mag_out) {
    for (int y = 1; y + 1 < g.height; ++y) {
        for (int x = 1; x + 1 < g.width; ++x) {
            const double gx = (g.at(x + 1, y - 1) + 2 * g.at(x + 1, y) + g.at(x + 1, y + 1)) -
                              (g.at(x - 1, y - 1) + 2 * g.at(x - 1, y) + g.at(x - 1, y + 1));
            const double gy = (g.at(x - 1, y + 1) + 2 * g.at(x, y + 1) + g.at(x + 1, y + 1)) -
                              (g.at(x - 1, y - 1) + 2 * g.at(x, y - 1) + g.at(x + 1, y - 1));
            if (gx_out) gx_out->push_back(gx);
            if (gy_out) gy_out->push_back(gy);
            if (mag_out) mag_out->push_back(std::sqrt(gx * gx + gy * gy));
        }
    }
}

}  // namespace metricdetail

/// Ratio of mean absolute luma gradient across 8x8 block boundaries to the
/// mean gradient elsewhere. Image is cropped to multiples of 8 first.
inline double blockiness(const ImageBuffer& img, const MetricConfig& config = {}) {
    if (img.width < 16 || img.height < 16) {
        throw Error(ErrorCode::MetricInfeasible, "blockiness needs at least 16x16");
    }
    const auto g = metricdetail::luma_grid(img);
    const int w = (img.width / 8) * 8;
    const int h = (img.height / 8) * 8;
    double boundary_sum = 0.0, interior_sum = 0.0;
    size_t boundary_n = 0, interior_n = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x + 1 < w; ++x) {
            const double d = std::abs(g.at(x + 1, y) - g.at(x, y));
            if ((x + 1) % 8 == 0) {
                boundary_sum += d;
                ++boundary_n;
            } else {
                interior_sum += d;
                ++interior_n;
            }
        }
    }
    for (int y = 0; y + 1 < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double d = std::abs(g.at(x, y + 1) - g.at(x, y));
            if ((y + 1) % 8 == 0) {
                boundary_sum += d;
                ++boundary_n;
            } else {
                interior_sum += d;
                ++interior_n;
            }
        }
    }
    const double boundary = boundary_n ? boundary_sum / boundary_n : 0.0;
    const double interior = interior_n ? interior_sum / interior_n : 0.0;
    if (boundary == 0.0) return 0.0;
    return boundary / (interior + config.blockiness_floor);
}

/// Cumulative probability of blur detection (Narvekar-Karam style): Sobel
/// vertical-edge pixels, horizontal edge widths between local luma extrema,
/// JNB widths switched on block contrast, psychometric pooling.
inline CpbdResult blur_cpbd(const ImageBuffer& img, const MetricConfig& config = {}) {
    const auto g = metricdetail::luma_grid(img);
    const int w = g.width, h = g.height;
    std::vector<double> widths;
    std::vector<double> jnb_widths;

    constexpr int kBlock = 64;
    for (int by = 0; by < h; by += kBlock) {
        for (int bx = 0; bx < w; bx += kBlock) {
            const int y1 = std::min(by + kBlock, h);
            const int x1 = std::min(bx + kBlock, w);
            double lo = 1.0, hi = 0.0;
            for (int y = by; y < y1; ++y) {
                for (int x = bx; x < x1; ++x) {
                    lo = std::min(lo, g.at(x, y));
                    hi = std::max(hi, g.at(x, y));
                }
            }
            const double block_contrast = hi - lo;
            const double w_jnb = block_contrast <= config.cpbd_low_contrast ? 5.0 : 3.0;

            for (int y = std::max(by, 1); y < std::min(y1, h - 1); ++y) {
                for (int x = std::max(bx, 1); x < std::min(x1, w - 1); ++x) {
                    const double gx =
                        (g.at(x + 1, y - 1) + 2 * g.at(x + 1, y) + g.at(x + 1, y + 1)) -
                        (g.at(x - 1, y - 1) + 2 * g.at(x - 1, y) + g.at(x - 1, y + 1));
                    if (std::abs(gx) / 8.0 < config.cpbd_edge_threshold) continue;
                    // walk to the local extrema on both sides along x
                    const int direction = gx > 0 ? 1 : -1;
                    int left = x;
                    while (left > 0 && (g.at(left - 1, y) - g.at(left, y)) * direction < 0) --left;
                    int right = x;
                    while (right + 1 < w && (g.at(right + 1, y) - g.at(right, y)) * direction > 0) {
                        ++right;
                    }
                    widths.push_back(static_cast<double>(right - left));
                    jnb_widths.push_back(w_jnb);
                }
            }
        }
    }
    if (widths.empty()) return {0.0, true};

    size_t sharp = 0;
    for (size_t i = 0; i < widths.size(); ++i) {
        const double p_blur = 1.0 - std::exp(-std::pow(widths[i] / jnb_widths[i], config.cpbd_beta));
        if (p_blur <= config.cpbd_prob_threshold) ++sharp;
    }
    return {static_cast<double>(sharp) / static_cast<double>(widths.size()), false};
}

/// Population standard deviation of luma.
inline double contrast(const ImageBuffer& img) {
    return metricdetail::population_std(luma_plane(img));
}

/// Mean luma.
inline double luminance(const ImageBuffer& img) {
    return metricdetail::mean_of(luma_plane(img));
}

/// RMS of the luma residual after Gaussian low-pass filtering.
inline double noise_estimate(const ImageBuffer& img, const MetricConfig& config = {}) {
    const ImageBuffer low = gaussian_blur(img, config.noise_lowpass_sigma);
    double sum = 0.0;
    size_t n = 0;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double d = luma_at(img, x, y) - luma_at(low, x, y);
            sum += d * d;
            ++n;
        }
    }
    return std::sqrt(sum / static_cast<double>(n));
}

/// Fraction of consecutive frame pairs with a significant mean-luma jump.
inline double flicker(const FrameSequence& seq, const MetricConfig& config = {}) {
    seq.validate();
    size_t events = 0;
    double prev = luminance(seq.frames.front());
    for (size_t t = 1; t < seq.frames.size(); ++t) {
        const double cur = luminance(seq.frames[t]);
        if (std::abs(cur - prev) > config.flicker_threshold) ++events;
        prev = cur;
    }
    return static_cast<double>(events) / static_cast<double>(seq.frames.size() - 1);
}

/// Hasler-Susstrunk opponent-color colourfulness.
inline double colourfulness(const ImageBuffer& img) {
    std::vector<double> rg, yb;
    rg.reserve(static_cast<size_t>(img.width) * img.height);
    yb.reserve(rg.capacity());
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double r = img.at(x, y, 0), g = img.at(x, y, 1), b = img.at(x, y, 2);
            rg.push_back(r - g);
            yb.push_back(0.5 * (r + g) - b);
        }
    }
    const double s_rg = metricdetail::population_std(rg);
    const double s_yb = metricdetail::population_std(yb);
    const double m_rg = metricdetail::mean_of(rg);
    const double m_yb = metricdetail::mean_of(yb);
    return std::sqrt(s_rg * s_rg + s_yb * s_yb) + 0.3 * std::sqrt(m_rg * m_rg + m_yb * m_yb);
}

/// ITU-T P.910 spatial information: std of Sobel magnitude over the interior.
inline double spatial_information(const ImageBuffer& img) {
    const auto g = metricdetail::luma_grid(img);
    std::vector<double> mag;
    metricdetail::sobel(g, nullptr, nullptr, &mag);
    return metricdetail::population_std(mag);
}

/// ITU-T P.910 temporal information: max over frame pairs of the std of
/// pixelwise luma differences.
inline double temporal_information(const FrameSequence& seq) {
    seq.validate();
    double ti = 0.0;
    std::vector<double> prev = luma_plane(seq.frames.front());
    for (size_t t = 1; t < seq.frames.size(); ++t) {
        std::vector<double> cur = luma_plane(seq.frames[t]);
        std::vector<double> diff(cur.size());
        for (size_t i = 0; i < cur.size(); ++i) diff[i] = cur[i] - prev[i];
        ti = std::max(ti, metricdetail::population_std(diff));
        prev = std::move(cur);
    }
    return ti;
}

inline MetricReport metric_report(const ImageBuffer& img, const MetricConfig& config = {}) {
    MetricReport report;
    report.blockiness = blockiness(img, config);
    const CpbdResult cpbd = blur_cpbd(img, config);
    report.blur_cpbd = cpbd.value;
    report.blur_no_edges = cpbd.no_edges;
    report.contrast = contrast(img);
    report.noise = noise_estimate(img, config);
    report.colourfulness = colourfulness(img);
    report.luminance = luminance(img);
    report.spatial_info = spatial_information(img);
    return report;
}

/// Sequence report: spatial metrics averaged over frames, plus flicker / TI.
inline MetricReport metric_report(const FrameSequence& seq, const MetricConfig& config = {}) {
    seq.validate();
    MetricReport total;
    for (const auto& frame : seq.frames) {
        const MetricReport r = metric_report(frame, config);
        total.blockiness += r.blockiness;
        total.blur_cpbd += r.blur_cpbd;
        total.contrast += r.contrast;
        total.noise += r.noise;
        total.colourfulness += r.colourfulness;
        total.luminance += r.luminance;
        total.spatial_info += r.spatial_info;
    }
    const double n = static_cast<double>(seq.frames.size());
    total.blockiness /= n;
    total.blur_cpbd /= n;
    total.contrast /= n;
    total.noise /= n;
    total.colourfulness /= n;
    total.luminance /= n;
    total.spatial_info /= n;
    total.flicker = flicker(seq, config);
    total.temporal_info = temporal_information(seq);
    return total;
}

}  // namespace vqkit
