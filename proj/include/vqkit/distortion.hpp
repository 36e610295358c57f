#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vqkit/color.hpp"
#include "vqkit/error.hpp"
#include "vqkit/image.hpp"
#include "vqkit/jpeg_codec.hpp"
#include "vqkit/rng.hpp"

namespace vqkit {

enum class DistortionCategory {
    // spatial (25), five severity levels
    GaussianBlur,
    LensBlur,
    MotionBlur,
    ColorDiffusion,
    ColorShift,
    ColorQuantization,
    ColorOverSaturation,
    ColorDeSaturation,
    Jpeg2000Compression,
    JpegCompression,
    WhiteNoise,
    WhiteNoiseColor,
    ImpulseNoise,
    MultiplicativeNoise,
    Denoise,
    Brighten,
    Darken,
    MeanShift,
    Jitter,
    NonEccentricityPatch,
    Pixelation,
    Quantization,
    ColorBlock,
    HighSharpen,
    ContrastChange,
    // video-specific (4), three severity levels
    Stuttering,
    CameraShake,
    H264Compression,
    H265Compression,
};

inline constexpr int kSpatialCategoryCount = 25;
inline constexpr int kVideoCategoryCount = 4;

inline bool is_video_category(DistortionCategory c) {
    return static_cast<int>(c) >= kSpatialCategoryCount;
}

inline int severity_levels(DistortionCategory c) { return is_video_category(c) ? 3 : 5; }

/// Human-readable category name, as used in distortion text records.
inline const char* category_name(DistortionCategory c) {
    switch (c) {
        case DistortionCategory::GaussianBlur:         return "gaussian blur";
        case DistortionCategory::LensBlur:             return "lens blur";
        case DistortionCategory::MotionBlur:           return "motion blur";
        case DistortionCategory::ColorDiffusion:       return "color diffusion";
        case DistortionCategory::ColorShift:           return "color shift";
        case DistortionCategory::ColorQuantization:    return "color quantization";
        case DistortionCategory::ColorOverSaturation:  return "color over-saturation";
        case DistortionCategory::ColorDeSaturation:    return "color de-saturation";
        case DistortionCategory::Jpeg2000Compression:  return "jpeg2000 compression";
        case DistortionCategory::JpegCompression:      return "jpeg compression";
        case DistortionCategory::WhiteNoise:           return "white noise";
        case DistortionCategory::WhiteNoiseColor:      return "white noise with color";
        case DistortionCategory::ImpulseNoise:         return "impulse noise";
        case DistortionCategory::MultiplicativeNoise:  return "multiplicative noise";
        case DistortionCategory::Denoise:              return "denoise";
        case DistortionCategory::Brighten:             return "brighten";
        case DistortionCategory::Darken:               return "darken";
        case DistortionCategory::MeanShift:            return "mean shift";
        case DistortionCategory::Jitter:               return "jitter";
        case DistortionCategory::NonEccentricityPatch: return "non-eccentricity patch";
        case DistortionCategory::Pixelation:           return "pixelation";
        case DistortionCategory::Quantization:         return "quantization";
        case DistortionCategory::ColorBlock:           return "color block";
        case DistortionCategory::HighSharpen:          return "high sharpen";
        case DistortionCategory::ContrastChange:       return "contrast change";
        case DistortionCategory::Stuttering:           return "stuttering";
        case DistortionCategory::CameraShake:          return "camera shake";
        case DistortionCategory::H264Compression:      return "h264 compression";
        case DistortionCategory::H265Compression:      return "h265 compression";
    }
    return "?";
}

/// CLI/config token: lowercase with underscores ("gaussian_blur").
inline std::string category_token(DistortionCategory c) {
    std::string s = category_name(c);
    for (auto& ch : s) {
        if (ch == ' ' || ch == '-') ch = '_';
    }
    return s;
}

inline std::vector<DistortionCategory> all_categories() {
    std::vector<DistortionCategory> out;
    for (int i = 0; i < kSpatialCategoryCount + kVideoCategoryCount; ++i) {
        out.push_back(static_cast<DistortionCategory>(i));
    }
    return out;
}

inline std::optional<DistortionCategory> parse_category(const std::string& token) {
    for (auto c : all_categories()) {
        if (token == category_token(c) || token == category_name(c)) return c;
    }
    return std::nullopt;
}

struct DistortionSpec {
    DistortionCategory category = DistortionCategory::GaussianBlur;
    int severity = 1;
    uint64_t seed = 0;

    void validate() const {
        if (severity < 1 || severity > severity_levels(category)) {
            throw Error(ErrorCode::InvalidSpec,
                        std::string("severity out of range for '") + category_name(category) +
                            "': " + std::to_string(severity));
        }
    }
};

/// Per-category parameter tuples, one per severity level. The paper fixes the
/// level names but not the parameter values; these ship as an overridable
/// table whose ordering is pinned by the monotonicity tests.
class SeverityLadder {
public:
    using Entry = std::map<std::string, double>;

    static SeverityLadder defaults();

    static SeverityLadder from_json_file(const std::string& path);

    void set(DistortionCategory c, std::vector<Entry> entries) {
        entries_[c] = std::move(entries);
    }

    double param(DistortionCategory c, int severity, const std::string& key) const {
        const auto cat_it = entries_.find(c);
        if (cat_it == entries_.end() ||
            severity < 1 || severity > static_cast<int>(cat_it->second.size())) {
            throw Error(ErrorCode::InvalidSpec,
                        std::string("no ladder entry for '") + category_name(c) + "' severity " +
                            std::to_string(severity));
        }
        const auto& entry = cat_it->second[severity - 1];
        const auto it = entry.find(key);
        if (it == entry.end()) {
            throw Error(ErrorCode::InvalidSpec,
                        std::string("ladder for '") + category_name(c) + "' lacks key '" + key + "'");
        }
        return it->second;
    }

    /// The dominant degradation parameter must be strictly monotone.
    void validate() const {
        for (const auto& [cat, entries] : entries_) {
            const std::string key = dominant_key(cat);
            if (entries.empty()) continue;
            int direction = 0;
            for (size_t i = 1; i < entries.size(); ++i) {
                const double prev = entries[i - 1].at(key);
                const double cur = entries[i].at(key);
                const int step = cur > prev ? 1 : cur < prev ? -1 : 0;
                if (step == 0 || (direction != 0 && step != direction)) {
                    throw Error(ErrorCode::InvalidSpec,
                                std::string("ladder for '") + category_name(cat) +
                                    "' is not strictly monotone in '" + key + "'");
                }
                direction = step;
            }
        }
    }

    static std::string dominant_key(DistortionCategory c);

private:
    std::map<DistortionCategory, std::vector<Entry>> entries_;
};

inline std::string SeverityLadder::dominant_key(DistortionCategory c) {
    switch (c) {
        case DistortionCategory::GaussianBlur:
        case DistortionCategory::ColorDiffusion:      return "sigma";
        case DistortionCategory::LensBlur:            return "radius";
        case DistortionCategory::MotionBlur:          return "length";
        case DistortionCategory::ColorShift:          return "shift";
        case DistortionCategory::ColorQuantization:   return "colors";
        case DistortionCategory::ColorOverSaturation:
        case DistortionCategory::ColorDeSaturation:   return "factor";
        case DistortionCategory::Jpeg2000Compression: return "qscale";
        case DistortionCategory::JpegCompression:     return "quality";
        case DistortionCategory::WhiteNoise:
        case DistortionCategory::WhiteNoiseColor:
        case DistortionCategory::MultiplicativeNoise: return "sigma";
        case DistortionCategory::ImpulseNoise:        return "prob";
        case DistortionCategory::Denoise:             return "noise_sigma";
        case DistortionCategory::Brighten:
        case DistortionCategory::Darken:              return "gamma";
        case DistortionCategory::MeanShift:           return "delta";
        case DistortionCategory::Jitter:              return "amplitude";
        case DistortionCategory::NonEccentricityPatch:return "patches";
        case DistortionCategory::Pixelation:          return "factor";
        case DistortionCategory::Quantization:        return "levels";
        case DistortionCategory::ColorBlock:          return "blocks";
        case DistortionCategory::HighSharpen:         return "amount";
        case DistortionCategory::ContrastChange:      return "steepness";
        case DistortionCategory::Stuttering:          return "prob";
        case DistortionCategory::CameraShake:         return "amplitude";
        case DistortionCategory::H264Compression:
        case DistortionCategory::H265Compression:     return "crf";
    }
    return "value";
}

inline SeverityLadder SeverityLadder::defaults() {
    SeverityLadder ladder;
    auto one = [](const std::string& k, std::initializer_list<double> values) {
        std::vector<Entry> entries;
        for (double v : values) entries.push_back({{k, v}});
        return entries;
    };
    ladder.set(DistortionCategory::GaussianBlur, one("sigma", {1, 2, 3, 5, 8}));
    ladder.set(DistortionCategory::LensBlur, one("radius", {1, 2, 3, 5, 8}));
    ladder.set(DistortionCategory::MotionBlur, one("length", {3, 6, 10, 16, 24}));
    ladder.set(DistortionCategory::ColorDiffusion, one("sigma", {2, 4, 6, 9, 13}));
    ladder.set(DistortionCategory::ColorShift, one("shift", {2, 4, 6, 9, 12}));
    ladder.set(DistortionCategory::ColorQuantization, one("colors", {64, 32, 16, 8, 4}));
    ladder.set(DistortionCategory::ColorOverSaturation, one("factor", {1.2, 1.5, 2.0, 3.0, 4.0}));
    ladder.set(DistortionCategory::ColorDeSaturation, one("factor", {0.8, 0.6, 0.4, 0.2, 0.05}));
    ladder.set(DistortionCategory::Jpeg2000Compression, one("qscale", {4, 8, 13, 20, 31}));
    ladder.set(DistortionCategory::JpegCompression, one("quality", {45, 30, 20, 12, 7}));
    ladder.set(DistortionCategory::WhiteNoise, one("sigma", {0.02, 0.05, 0.09, 0.14, 0.2}));
    ladder.set(DistortionCategory::WhiteNoiseColor, one("sigma", {0.02, 0.05, 0.09, 0.14, 0.2}));
    ladder.set(DistortionCategory::ImpulseNoise, one("prob", {0.01, 0.03, 0.07, 0.12, 0.2}));
    ladder.set(DistortionCategory::MultiplicativeNoise, one("sigma", {0.05, 0.1, 0.16, 0.24, 0.35}));
    ladder.set(DistortionCategory::Denoise, one("noise_sigma", {0.05, 0.08, 0.12, 0.17, 0.25}));
    ladder.set(DistortionCategory::Brighten, one("gamma", {0.8, 0.65, 0.5, 0.38, 0.28}));
    ladder.set(DistortionCategory::Darken, one("gamma", {1.25, 1.55, 2.0, 2.6, 3.5}));
    ladder.set(DistortionCategory::MeanShift, one("delta", {0.04, 0.08, 0.12, 0.16, 0.2}));
    ladder.set(DistortionCategory::Jitter, one("amplitude", {1, 2, 3, 4, 5}));
    {
        std::vector<Entry> entries;
        for (double n : {8, 16, 24, 32, 40}) {
            entries.push_back({{"patches", n}, {"patch_size", 32}, {"radius", 16}});
        }
        ladder.set(DistortionCategory::NonEccentricityPatch, entries);
    }
    ladder.set(DistortionCategory::Pixelation, one("factor", {2, 3, 5, 8, 12}));
    ladder.set(DistortionCategory::Quantization, one("levels", {24, 16, 10, 6, 4}));
    {
        std::vector<Entry> entries;
        for (double n : {2, 4, 6, 8, 10}) {
            entries.push_back({{"blocks", n}, {"block_size", 32}});
        }
        ladder.set(DistortionCategory::ColorBlock, entries);
    }
    {
        std::vector<Entry> entries;
        for (double a : {1, 2, 4, 6, 9}) {
            entries.push_back({{"amount", a}, {"sigma", 3}});
        }
        ladder.set(DistortionCategory::HighSharpen, entries);
    }
    ladder.set(DistortionCategory::ContrastChange, one("steepness", {1.8, 2.8, 4.2, 6.0, 9.0}));
    ladder.set(DistortionCategory::Stuttering, one("prob", {0.1, 0.25, 0.5}));
    ladder.set(DistortionCategory::CameraShake, one("amplitude", {2, 5, 10}));
    ladder.set(DistortionCategory::H264Compression, one("crf", {24, 36, 48}));
    ladder.set(DistortionCategory::H265Compression, one("crf", {24, 36, 48}));
    ladder.validate();
    return ladder;
}

inline SeverityLadder SeverityLadder::from_json_file(const std::string& path) {
    SeverityLadder ladder = defaults();
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open ladder config '" + path + "'");
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoError, "ladder config parse error: " + std::string(e.what()));
    }
    for (const auto& [token, entries_json] : doc.items()) {
        const auto cat = parse_category(token);
        if (!cat) {
            throw Error(ErrorCode::InvalidSpec, "unknown distortion category '" + token + "'");
        }
        std::vector<Entry> entries;
        for (const auto& entry_json : entries_json) {
            Entry entry;
            for (const auto& [key, value] : entry_json.items()) {
                entry[key] = value.get<double>();
            }
            entries.push_back(std::move(entry));
        }
        if (static_cast<int>(entries.size()) != severity_levels(*cat)) {
            throw Error(ErrorCode::InvalidSpec, "ladder for '" + token + "' must list " +
                                                    std::to_string(severity_levels(*cat)) +
                                                    " severity entries");
        }
        ladder.set(*cat, std::move(entries));
    }
    ladder.validate();
    return ladder;
}

namespace distortdetail {

// Structural randomness (angles, masks, positions, palettes) derives from the
// spec seed alone so it stays fixed across the frames of one clip; per-pixel
// noise uses the pixel generator, which varies per frame.
struct DistortRngs {
    Rng structural;
    Rng pixel;
};

inline ImageBuffer disk_blur(const ImageBuffer& img, int radius) {
    const int size = 2 * radius + 1;
    std::vector<double> kernel(static_cast<size_t>(size) * size, 0.0);
    double sum = 0.0;
    for (int y = -radius; y <= radius; ++y) {
        for (int x = -radius; x <= radius; ++x) {
            if (x * x + y * y <= radius * radius + 1e-9) {
                kernel[(y + radius) * size + (x + radius)] = 1.0;
                sum += 1.0;
            }
        }
    }
    for (auto& v : kernel) v /= sum;
    return convolve2d(img, kernel, size);
}

inline ImageBuffer motion_blur_apply(const ImageBuffer& img, double length, double angle) {
    const int radius = static_cast<int>(std::ceil(length / 2.0));
    const int size = 2 * radius + 1;
    std::vector<double> kernel(static_cast<size_t>(size) * size, 0.0);
    const double cx = std::cos(angle), cy = std::sin(angle);
    const int steps = std::max(1, static_cast<int>(std::round(length * 4)));
    for (int i = 0; i <= steps; ++i) {
        const double t = (static_cast<double>(i) / steps - 0.5) * (length - 1.0);
        const double px = radius + t * cx;
        const double py = radius + t * cy;
        const int x0 = static_cast<int>(std::floor(px)), y0 = static_cast<int>(std::floor(py));
        const double fx = px - x0, fy = py - y0;
        auto splat = [&](int x, int y, double w) {
            if (x >= 0 && x < size && y >= 0 && y < size) kernel[y * size + x] += w;
        };
        splat(x0, y0, (1 - fx) * (1 - fy));
        splat(x0 + 1, y0, fx * (1 - fy));
        splat(x0, y0 + 1, (1 - fx) * fy);
        splat(x0 + 1, y0 + 1, fx * fy);
    }
    double sum = 0.0;
    for (double v : kernel) sum += v;
    for (auto& v : kernel) v /= sum;
    return convolve2d(img, kernel, size);
}

// Smooth random blend mask: low-resolution noise grid upsampled bilinearly.
inline std::vector<double> smooth_mask(int width, int height, Rng& rng) {
    const int gw = 8, gh = 6;
    std::vector<double> grid(static_cast<size_t>(gw) * gh);
    for (auto& v : grid) v = rng.uniform();
    std::vector<double> mask(static_cast<size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double gx = static_cast<double>(x) / (width - 1) * (gw - 1);
            const double gy = static_cast<double>(y) / (height - 1) * (gh - 1);
            const int x0 = std::min(static_cast<int>(gx), gw - 2);
            const int y0 = std::min(static_cast<int>(gy), gh - 2);
            const double fx = gx - x0, fy = gy - y0;
            const double v = (1 - fy) * ((1 - fx) * grid[y0 * gw + x0] + fx * grid[y0 * gw + x0 + 1]) +
                             fy * ((1 - fx) * grid[(y0 + 1) * gw + x0] + fx * grid[(y0 + 1) * gw + x0 + 1]);
            mask[static_cast<size_t>(y) * width + x] = v;
        }
    }
    return mask;
}

// Median-cut palette of k colors; deterministic.
inline std::vector<std::array<double, 3>> median_cut_palette(const ImageBuffer& img, int k) {
    struct Box {
        std::vector<std::array<double, 3>> colors;
    };
    std::vector<Box> boxes(1);
    boxes[0].colors.reserve(static_cast<size_t>(img.width) * img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            boxes[0].colors.push_back({img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)});
        }
    }
    while (static_cast<int>(boxes.size()) < k) {
        // split the box with the largest channel extent
        size_t best_box = 0;
        int best_channel = 0;
        double best_extent = -1.0;
        for (size_t b = 0; b < boxes.size(); ++b) {
            if (boxes[b].colors.size() < 2) continue;
            for (int c = 0; c < 3; ++c) {
                double lo = 1.0, hi = 0.0;
                for (const auto& col : boxes[b].colors) {
                    lo = std::min(lo, col[c]);
                    hi = std::max(hi, col[c]);
                }
                if (hi - lo > best_extent) {
                    best_extent = hi - lo;
                    best_box = b;
                    best_channel = c;
                }
            }
        }
        if (best_extent <= 0.0) break;  // nothing left to split
        auto& box = boxes[best_box];
        const size_t mid = box.colors.size() / 2;
        std::nth_element(box.colors.begin(), box.colors.begin() + mid, box.colors.end(),
                         [best_channel](const auto& a, const auto& b) {
                             return a[best_channel] < b[best_channel];
                         });
        Box right;
        right.colors.assign(box.colors.begin() + mid, box.colors.end());
        box.colors.resize(mid);
        boxes.push_back(std::move(right));
    }
    std::vector<std::array<double, 3>> palette;
    for (const auto& box : boxes) {
        if (box.colors.empty()) continue;
        std::array<double, 3> mean{};
        for (const auto& col : box.colors) {
            for (int c = 0; c < 3; ++c) mean[c] += col[c];
        }
        for (int c = 0; c < 3; ++c) mean[c] /= static_cast<double>(box.colors.size());
        palette.push_back(mean);
    }
    return palette;
}

inline ImageBuffer apply_palette(const ImageBuffer& img,
                                 const std::vector<std::array<double, 3>>& palette) {
    ImageBuffer out = ImageBuffer::create(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double best = 1e9;
            size_t best_i = 0;
            for (size_t i = 0; i < palette.size(); ++i) {
                double d = 0.0;
                for (int c = 0; c < 3; ++c) {
                    const double diff = img.at(x, y, c) - palette[i][c];
                    d += diff * diff;
                }
                if (d < best) {
                    best = d;
                    best_i = i;
                }
            }
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = palette[best_i][c];
        }
    }
    return out;
}

// Edge-preserving smoother standing in for the CNN denoiser: a joint
// bilateral filter on RGB with luma-distance range weights.
inline ImageBuffer bilateral(const ImageBuffer& img, int radius, double sigma_s, double sigma_r) {
    ImageBuffer out = ImageBuffer::create(img.width, img.height);
    std::vector<double> spatial((2 * radius + 1) * (2 * radius + 1));
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            spatial[(dy + radius) * (2 * radius + 1) + (dx + radius)] =
                std::exp(-0.5 * (dx * dx + dy * dy) / (sigma_s * sigma_s));
        }
    }
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double center = luma_at(img, std::clamp(x, 0, img.width - 1),
                                          std::clamp(y, 0, img.height - 1));
            double wsum = 0.0;
            std::array<double, 3> acc{};
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int sx = std::clamp(x + dx, 0, img.width - 1);
                    const int sy = std::clamp(y + dy, 0, img.height - 1);
                    const double dl = luma_at(img, sx, sy) - center;
                    const double w = spatial[(dy + radius) * (2 * radius + 1) + (dx + radius)] *
                                     std::exp(-0.5 * dl * dl / (sigma_r * sigma_r));
                    wsum += w;
                    for (int c = 0; c < 3; ++c) acc[c] += w * img.at(sx, sy, c);
                }
            }
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = acc[c] / wsum;
        }
    }
    return out;
}

inline double tone_curve(double p, double beta) {
    // logistic curve normalized to fix 0 and 1
    const double lo = 1.0 / (1.0 + std::exp(beta * 0.5));
    const double hi = 1.0 / (1.0 + std::exp(-beta * 0.5));
    const double v = 1.0 / (1.0 + std::exp(-beta * (p - 0.5)));
    return (v - lo) / (hi - lo);
}

}  // namespace distortdetail

inline ImageBuffer apply_spatial_distortion_impl(const ImageBuffer& img, const DistortionSpec& spec,
                                                 const SeverityLadder& ladder,
                                                 distortdetail::DistortRngs& rngs) {
    using namespace distortdetail;
    using DC = DistortionCategory;
    const auto cat = spec.category;
    const int sev = spec.severity;
    auto p = [&](const char* key) { return ladder.param(cat, sev, key); };

    ImageBuffer out;
    switch (cat) {
        case DC::GaussianBlur:
            out = gaussian_blur(img, p("sigma"));
            break;
        case DC::LensBlur:
            out = disk_blur(img, static_cast<int>(p("radius")));
            break;
        case DC::MotionBlur: {
            const double angle = rngs.structural.uniform(0.0, 3.14159265358979323846);
            out = motion_blur_apply(img, p("length"), angle);
            break;
        }
        case DC::ColorDiffusion: {
            ImageBuffer lab = image_rgb_to_lab(img);
            ImageBuffer blurred = gaussian_blur(lab, p("sigma"));
            for (int y = 0; y < lab.height; ++y) {
                for (int x = 0; x < lab.width; ++x) {
                    blurred.at(x, y, 0) = lab.at(x, y, 0);  // L untouched
                }
            }
            out = image_lab_to_rgb(blurred);
            break;
        }
        case DC::ColorShift: {
            const double shift = p("shift");
            const double angle = rngs.structural.uniform(0.0, 2.0 * 3.14159265358979323846);
            const int dx = static_cast<int>(std::round(shift * std::cos(angle)));
            const int dy = static_cast<int>(std::round(shift * std::sin(angle)));
            const auto mask = smooth_mask(img.width, img.height, rngs.structural);
            out = img;
            for (int y = 0; y < img.height; ++y) {
                for (int x = 0; x < img.width; ++x) {
                    const double m = mask[static_cast<size_t>(y) * img.width + x];
                    const double shifted = img.at_clamped(x - dx, y - dy, 1);
                    out.at(x, y, 1) = shifted * m + img.at(x, y, 1) * (1.0 - m);
                }
            }
            break;
        }
        case DC::ColorQuantization: {
            const auto palette = median_cut_palette(img, static_cast<int>(p("colors")));
            out = apply_palette(img, palette);
            break;
        }
        case DC::ColorOverSaturation: {
            const double factor = p("factor");
            ImageBuffer hsv = image_rgb_to_hsv(img);
            for (int y = 0; y < hsv.height; ++y) {
                for (int x = 0; x < hsv.width; ++x) {
                    hsv.at(x, y, 1) = std::min(1.0, hsv.at(x, y, 1) * factor);
                }
            }
            out = image_hsv_to_rgb(hsv);
            break;
        }
        case DC::ColorDeSaturation: {
            const double factor = p("factor");
            ImageBuffer lab = image_rgb_to_lab(img);
            for (int y = 0; y < lab.height; ++y) {
                for (int x = 0; x < lab.width; ++x) {
                    lab.at(x, y, 1) *= factor;
                    lab.at(x, y, 2) *= factor;
                }
            }
            out = image_lab_to_rgb(lab);
            break;
        }
        case DC::Jpeg2000Compression:
            throw Error(ErrorCode::CodecUnavailable,
                        "jpeg2000 requires the external codec path (see encode_video_external)");
        case DC::JpegCompression:
            out = jpeg_roundtrip(img, static_cast<int>(p("quality")));
            break;
        case DC::WhiteNoise: {
            const double sigma = p("sigma");
            out = img;
            for (auto& v : out.samples) v += rngs.pixel.normal(0.0, sigma);
            break;
        }
        case DC::WhiteNoiseColor: {
            const double sigma = p("sigma");
            ImageBuffer ycc = image_rgb_to_ycbcr(img);
            for (auto& v : ycc.samples) v += rngs.pixel.normal(0.0, sigma);
            out = image_ycbcr_to_rgb(ycc);
            break;
        }
        case DC::ImpulseNoise: {
            const double prob = p("prob");
            out = img;
            for (int y = 0; y < img.height; ++y) {
                for (int x = 0; x < img.width; ++x) {
                    const double u = rngs.pixel.uniform();
                    if (u < prob) {
                        const double v = u < prob / 2.0 ? 0.0 : 1.0;
                        for (int c = 0; c < 3; ++c) out.at(x, y, c) = v;
                    }
                }
            }
            break;
        }
        case DC::MultiplicativeNoise: {
            const double sigma = p("sigma");
            out = img;
            for (auto& v : out.samples) v *= 1.0 + rngs.pixel.normal(0.0, sigma);
            break;
        }
        case DC::Denoise: {
            const double sigma = p("noise_sigma");
            ImageBuffer noisy = img;
            for (auto& v : noisy.samples) v += rngs.pixel.normal(0.0, sigma);
            clamp01(noisy);
            out = bilateral(noisy, 3, 2.0, std::max(0.05, 2.5 * sigma));
            break;
        }
        case DC::Brighten:
        case DC::Darken: {
            const double gamma = p("gamma");
            ImageBuffer lab = image_rgb_to_lab(img);
            for (int y = 0; y < lab.height; ++y) {
                for (int x = 0; x < lab.width; ++x) {
                    const double L = std::clamp(lab.at(x, y, 0) / 100.0, 0.0, 1.0);
                    lab.at(x, y, 0) = 100.0 * std::pow(L, gamma);
                }
            }
            out = image_lab_to_rgb(lab);
            break;
        }
        case DC::MeanShift: {
            const double delta = p("delta");
            out = img;
            for (auto& v : out.samples) v += delta;
            break;
        }
        case DC::Jitter: {
            const double amplitude = p("amplitude");
            out = ImageBuffer::create(img.width, img.height);
            for (int y = 0; y < img.height; ++y) {
                for (int x = 0; x < img.width; ++x) {
                    const double dx = rngs.pixel.uniform(-amplitude, amplitude);
                    const double dy = rngs.pixel.uniform(-amplitude, amplitude);
                    for (int c = 0; c < 3; ++c) {
                        out.at(x, y, c) = sample_bilinear(img, x + dx, y + dy, c);
                    }
                }
            }
            break;
        }
        case DC::NonEccentricityPatch: {
            const int patches = static_cast<int>(p("patches"));
            const int size = static_cast<int>(p("patch_size"));
            const int radius = static_cast<int>(p("radius"));
            out = img;
            for (int i = 0; i < patches; ++i) {
                const int sx = static_cast<int>(rngs.structural.uniform_int(0, img.width - size));
                const int sy = static_cast<int>(rngs.structural.uniform_int(0, img.height - size));
                const int dx = static_cast<int>(rngs.structural.uniform_int(-radius, radius));
                const int dy = static_cast<int>(rngs.structural.uniform_int(-radius, radius));
                const int tx = std::clamp(sx + dx, 0, img.width - size);
                const int ty = std::clamp(sy + dy, 0, img.height - size);
                for (int yy = 0; yy < size; ++yy) {
                    for (int xx = 0; xx < size; ++xx) {
                        for (int c = 0; c < 3; ++c) {
                            out.at(tx + xx, ty + yy, c) = img.at(sx + xx, sy + yy, c);
                        }
                    }
                }
            }
            break;
        }
        case DC::Pixelation: {
            const int factor = static_cast<int>(p("factor"));
            out = ImageBuffer::create(img.width, img.height);
            for (int y = 0; y < img.height; ++y) {
                for (int x = 0; x < img.width; ++x) {
                    const int ax = (x / factor) * factor + factor / 2;
                    const int ay = (y / factor) * factor + factor / 2;
                    for (int c = 0; c < 3; ++c) {
                        out.at(x, y, c) = img.at_clamped(ax, ay, c);
                    }
                }
            }
            break;
        }
        case DC::Quantization: {
            const int levels = static_cast<int>(p("levels"));
            out = img;
            for (auto& v : out.samples) {
                const int bin = std::min(static_cast<int>(v * levels), levels - 1);
                v = (bin + 0.5) / levels;
            }
            break;
        }
        case DC::ColorBlock: {
            const int blocks = static_cast<int>(p("blocks"));
            const int size = static_cast<int>(p("block_size"));
            out = img;
            for (int i = 0; i < blocks; ++i) {
                const int bx = static_cast<int>(rngs.structural.uniform_int(0, img.width - size));
                const int by = static_cast<int>(rngs.structural.uniform_int(0, img.height - size));
                const std::array<double, 3> color{rngs.structural.uniform(), rngs.structural.uniform(),
                                                  rngs.structural.uniform()};
                for (int yy = 0; yy < size; ++yy) {
                    for (int xx = 0; xx < size; ++xx) {
                        for (int c = 0; c < 3; ++c) out.at(bx + xx, by + yy, c) = color[c];
                    }
                }
            }
            break;
        }
        case DC::HighSharpen: {
            const double amount = p("amount");
            const ImageBuffer blurred = gaussian_blur(img, p("sigma"));
            out = img;
            for (size_t i = 0; i < out.samples.size(); ++i) {
                out.samples[i] += amount * (img.samples[i] - blurred.samples[i]);
            }
            break;
        }
        case DC::ContrastChange: {
            const double beta = p("steepness");
            out = img;
            for (auto& v : out.samples) v = distortdetail::tone_curve(v, beta);
            break;
        }
        default:
            throw Error(ErrorCode::InvalidSpec,
                        std::string("'") + category_name(cat) + "' is not a spatial distortion");
    }
    clamp01(out);
    return out;
}

/// Applies one of the 25 spatial distortions. Deterministic: identical
/// (image, spec) pairs produce bit-identical output.
inline ImageBuffer apply_spatial_distortion(const ImageBuffer& img, const DistortionSpec& spec,
                                            const SeverityLadder& ladder) {
    spec.validate();
    img.validate();
    if (is_video_category(spec.category)) {
        throw Error(ErrorCode::InvalidSpec,
                    std::string("'") + category_name(spec.category) + "' is video-only");
    }
    distortdetail::DistortRngs rngs{Rng(derive_seed(spec.seed, "", "struct")),
                                    Rng(derive_seed(spec.seed, "", "pixel"))};
    return apply_spatial_distortion_impl(img, spec, ladder, rngs);
}

/// Spatial distortion applied across a clip: structural parameters are fixed
/// for the whole clip, per-pixel noise varies per frame.
inline FrameSequence apply_spatial_to_sequence(const FrameSequence& seq, const DistortionSpec& spec,
                                               const SeverityLadder& ladder) {
    spec.validate();
    seq.validate();
    FrameSequence out;
    out.fps = seq.fps;
    for (size_t t = 0; t < seq.frames.size(); ++t) {
        distortdetail::DistortRngs rngs{
            Rng(derive_seed(spec.seed, "", "struct")),
            Rng(derive_seed(spec.seed, std::to_string(t), "pixel"))};
        out.frames.push_back(apply_spatial_distortion_impl(seq.frames[t], spec, ladder, rngs));
    }
    return out;
}

/// Playback-stall simulation: each frame freezes to the previous *output*
/// frame with the ladder probability.
inline FrameSequence apply_stutter(const FrameSequence& seq, int severity, uint64_t seed,
                                   const SeverityLadder& ladder) {
    seq.validate();
    DistortionSpec spec{DistortionCategory::Stuttering, severity, seed};
    spec.validate();
    const double prob = ladder.param(DistortionCategory::Stuttering, severity, "prob");
    Rng rng(derive_seed(seed, "", "stutter"));
    FrameSequence out;
    out.fps = seq.fps;
    out.frames.push_back(seq.frames.front());
    for (size_t t = 1; t < seq.frames.size(); ++t) {
        const double u = rng.uniform();
        if (u <= prob) {
            out.frames.push_back(out.frames.back());
        } else {
            out.frames.push_back(seq.frames[t]);
        }
    }
    return out;
}

/// Hand-held shake: per frame an integer translation drawn uniformly from
/// [-amplitude, amplitude]^2, replicated edges.
inline FrameSequence apply_camera_shake(const FrameSequence& seq, int severity, uint64_t seed,
                                        const SeverityLadder& ladder) {
    seq.validate();
    DistortionSpec spec{DistortionCategory::CameraShake, severity, seed};
    spec.validate();
    const int amplitude =
        static_cast<int>(ladder.param(DistortionCategory::CameraShake, severity, "amplitude"));
    Rng rng(derive_seed(seed, "", "shake"));
    FrameSequence out;
    out.fps = seq.fps;
    for (const auto& frame : seq.frames) {
        const int dx = static_cast<int>(rng.uniform_int(-amplitude, amplitude));
        const int dy = static_cast<int>(rng.uniform_int(-amplitude, amplitude));
        out.frames.push_back(translate_replicate(frame, dx, dy));
    }
    return out;
}

}  // namespace vqkit
