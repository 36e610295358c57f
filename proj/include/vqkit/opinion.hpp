#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "vqkit/error.hpp"
#include "vqkit/pmod.hpp"

namespace vqkit {

enum class Modality { Image, Video };

inline const char* modality_name(Modality m) {
    return m == Modality::Image ? "image" : "video";
}

inline Modality parse_modality(const std::string& s) {
    if (s == "image") return Modality::Image;
    if (s == "video") return Modality::Video;
    throw Error(ErrorCode::InvalidTable, "unknown modality '" + s + "'");
}

/// Parameters of the monotone calibration map
/// q' = gamma3 * sigmoid(gamma1 * q + gamma2) + gamma4.
struct SigmoidMapParams {
    double gamma1 = 1.0;
    double gamma2 = 0.0;
    double gamma3 = 1.0;
    double gamma4 = 0.0;

    bool valid() const {
        return std::isfinite(gamma1) && std::isfinite(gamma2) && std::isfinite(gamma3) &&
               std::isfinite(gamma4) && gamma3 != 0.0;
    }
};

inline double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double apply_sigmoid_map(const SigmoidMapParams& params, double q) {
    if (!params.valid()) {
        throw Error(ErrorCode::InvalidArgument, "apply_sigmoid_map: invalid parameters");
    }
    return params.gamma3 * stable_sigmoid(params.gamma1 * q + params.gamma2) + params.gamma4;
}

struct SigmoidFit {
    SigmoidMapParams params;
    double rmse = 0.0;
    int iterations = 0;
};

class CalibrationNoConverge : public Error {
public:
    CalibrationNoConverge(SigmoidFit best_so_far, const std::string& message)
        : Error(ErrorCode::CalibrationNoConverge, message), best(best_so_far) {}

    SigmoidFit best;
};

namespace detail {

// Solves a 4x4 linear system in place (partial pivoting). Returns false when
// singular.
inline bool solve4(std::array<std::array<double, 4>, 4>& a, std::array<double, 4>& b) {
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) < 1e-300) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int col = 3; col >= 0; --col) {
        for (int r = 0; r < col; ++r) {
            b[r] -= a[r][col] / a[col][col] * b[col];
        }
        b[col] /= a[col][col];
    }
    return true;
}

inline double sse_of(const SigmoidMapParams& p, std::span<const double> x,
                     std::span<const double> y) {
    double sse = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double r = p.gamma3 * stable_sigmoid(p.gamma1 * x[i] + p.gamma2) + p.gamma4 - y[i];
        sse += r * r;
    }
    return sse;
}

// Levenberg-Marquardt from one start. A start counts as settled when the
// step norm drops below 1e-10, when damping can no longer find a descent
// step, or when a 25-iteration window shows no relative SSE progress (the
// flat-sigmoid ridge has its minimum at parameter infinity, so pure step
// criteria never trigger there).
inline std::pair<SigmoidFit, bool> lm_fit(SigmoidMapParams p, std::span<const double> x,
                                          std::span<const double> y, int max_iterations) {
    constexpr double kStepTol = 1e-10;
    constexpr int kWindow = 25;
    double lambda = 1e-3;
    double sse = sse_of(p, x, y);
    double window_sse = sse;
    bool converged = false;
    int iter = 0;

    for (; iter < max_iterations; ++iter) {
        if (iter % kWindow == 0) {
            if (iter >= 2 * kWindow && window_sse - sse < 1e-5 * (sse + 1e-12)) {
                converged = true;
                break;
            }
            window_sse = sse;
        }
        std::array<std::array<double, 4>, 4> jtj{};
        std::array<double, 4> jtr{};
        for (size_t i = 0; i < x.size(); ++i) {
            const double s = stable_sigmoid(p.gamma1 * x[i] + p.gamma2);
            const double ds = s * (1.0 - s);
            const double r = p.gamma3 * s + p.gamma4 - y[i];
            const std::array<double, 4> j{p.gamma3 * ds * x[i], p.gamma3 * ds, s, 1.0};
            for (int a = 0; a < 4; ++a) {
                jtr[a] += j[a] * r;
                for (int b = 0; b < 4; ++b) jtj[a][b] += j[a] * j[b];
            }
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
            auto lhs = jtj;
            for (int d = 0; d < 4; ++d) lhs[d][d] += lambda * (jtj[d][d] > 0.0 ? jtj[d][d] : 1.0);
            std::array<double, 4> step{-jtr[0], -jtr[1], -jtr[2], -jtr[3]};
            if (!solve4(lhs, step)) {
                lambda *= 10.0;
                continue;
            }
            SigmoidMapParams trial{p.gamma1 + step[0], p.gamma2 + step[1], p.gamma3 + step[2],
                                   p.gamma4 + step[3]};
            const double trial_sse = sse_of(trial, x, y);
            if (trial_sse <= sse) {
                const double step_norm = std::sqrt(step[0] * step[0] + step[1] * step[1] +
                                                   step[2] * step[2] + step[3] * step[3]);
                p = trial;
                sse = trial_sse;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (step_norm < kStepTol) converged = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (converged || !stepped) {
            converged = converged || !stepped;  // stalled step also counts as settled
            break;
        }
    }
    SigmoidFit fit;
    fit.params = p;
    fit.rmse = std::sqrt(sse / static_cast<double>(x.size()));
    fit.iterations = iter;
    return {fit, converged};
}

}  // namespace detail

/// Fits the 4-parameter sigmoid map minimizing squared error of pred -> gt.
/// Multi-start local least-squares: gamma1 in {+-1, +-5} crossed with the
/// sign of gamma3, gamma3 seeded from range(gt), gamma4 from min/max(gt),
/// gamma2 centering the sigmoid on mean(pred). 500 iterations per start.
inline SigmoidFit fit_sigmoid_map(std::span<const double> pred, std::span<const double> gt) {
    if (pred.size() != gt.size() || pred.size() < 8) {
        throw Error(ErrorCode::InvalidArgument,
                    "fit_sigmoid_map: need equal-length inputs with at least 8 points");
    }
    for (size_t i = 0; i < pred.size(); ++i) {
        if (!std::isfinite(pred[i]) || !std::isfinite(gt[i])) {
            throw Error(ErrorCode::InvalidArgument, "fit_sigmoid_map: non-finite input");
        }
    }
    const auto [pred_min, pred_max] = std::minmax_element(pred.begin(), pred.end());
    if (!(*pred_max > *pred_min)) {
        throw Error(ErrorCode::CalibrationDegenerate, "fit_sigmoid_map: constant predictions");
    }
    const auto [gt_min, gt_max] = std::minmax_element(gt.begin(), gt.end());
    if (!(*gt_max > *gt_min)) {
        throw Error(ErrorCode::CalibrationDegenerate, "fit_sigmoid_map: constant targets");
    }

    const double pred_mean = std::accumulate(pred.begin(), pred.end(), 0.0) /
                             static_cast<double>(pred.size());
    const double range = *gt_max - *gt_min;

    bool any_converged = false;
    SigmoidFit best;
    best.rmse = std::numeric_limits<double>::infinity();
    double second_rmse = std::numeric_limits<double>::infinity();
    for (double g1 : {1.0, -1.0, 5.0, -5.0}) {
        for (double g3_sign : {1.0, -1.0}) {
            SigmoidMapParams start;
            start.gamma1 = g1;
            start.gamma2 = -g1 * pred_mean;
            start.gamma3 = g3_sign * range;
            start.gamma4 = g3_sign > 0.0 ? *gt_min : *gt_max;
            auto [fit, converged] = detail::lm_fit(start, pred, gt, 500);
            if (fit.rmse < best.rmse) {
                second_rmse = best.rmse;
                best = fit;
            } else {
                second_rmse = std::min(second_rmse, fit.rmse);
            }
            any_converged = any_converged || converged;
        }
    }
    // Ridge minima (parameters at infinity) defeat step-norm criteria, so two
    // further settledness signals: a fit at noiseless-perfection level, or
    // independent starts agreeing on the reached residual.
    if (best.rmse <= 1e-5 * (1.0 + range)) any_converged = true;
    if (second_rmse - best.rmse <= 1e-4 * (best.rmse + 1e-12)) any_converged = true;
    if (!any_converged) {
        throw CalibrationNoConverge(best, "fit_sigmoid_map: no start converged within budget");
    }
    if (!best.params.valid()) {
        throw Error(ErrorCode::CalibrationDegenerate, "fit_sigmoid_map: degenerate flat map");
    }
    return best;
}

enum class RescaleMode { Unit, Percent };

/// Min-max affine map of the pooled list onto [0,1] or [0,100].
inline std::vector<double> rescale_scores(std::span<const double> scores, RescaleMode mode) {
    if (scores.empty()) {
        throw Error(ErrorCode::InvalidArgument, "rescale_scores: empty input");
    }
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    if (!(*hi > *lo)) {
        throw Error(ErrorCode::RescaleDegenerate, "rescale_scores: constant scores");
    }
    const double scale = (mode == RescaleMode::Unit ? 1.0 : 100.0) / (*hi - *lo);
    std::vector<double> out(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] - *lo) * scale;
    return out;
}

/// Calibration for one annotator: either an explicit identity (raw scores
/// already on the common scale) or a fitted sigmoid map.
struct AnnotatorCalibration {
    static AnnotatorCalibration identity() { return AnnotatorCalibration{true, {}}; }
    static AnnotatorCalibration sigmoid(const SigmoidMapParams& p) {
        return AnnotatorCalibration{false, p};
    }

    double apply(double q) const { return is_identity ? q : apply_sigmoid_map(params, q); }

    bool is_identity = true;
    SigmoidMapParams params;
};

using CalibrationSet = std::map<std::string, AnnotatorCalibration>;

struct OpinionItem {
    std::string item_id;
    Modality modality = Modality::Image;
    std::map<std::string, double> scores;  // annotator_id -> raw score
};

struct RawOpinionTable {
    std::vector<OpinionItem> items;
    // When false (default) every item must carry the same annotator set.
    bool allow_ragged_annotators = false;

    void validate() const {
        std::map<std::string, bool> seen_ids;
        for (const auto& item : items) {
            if (item.scores.empty()) {
                throw Error(ErrorCode::InvalidTable,
                            "item '" + item.item_id + "' has no annotator scores");
            }
            if (seen_ids.count(item.item_id)) {
                throw Error(ErrorCode::InvalidTable, "duplicate item_id '" + item.item_id + "'");
            }
            seen_ids[item.item_id] = true;
        }
        if (!allow_ragged_annotators && !items.empty()) {
            const auto& reference = items.front().scores;
            for (const auto& item : items) {
                if (item.scores.size() != reference.size() ||
                    !std::equal(item.scores.begin(), item.scores.end(), reference.begin(),
                                [](const auto& a, const auto& b) { return a.first == b.first; })) {
                    throw Error(ErrorCode::InvalidTable,
                                "item '" + item.item_id +
                                    "' has a different annotator set (ragged tables disabled)");
                }
            }
        }
    }
};

/// Maps every score through its annotator calibration, rescales the pooled
/// mapped scores onto [0,1] per modality (images and videos separately), and
/// reduces each item to mean / population standard deviation.
///
/// Rescaling is applied only when the pooled mapped scores leave [0,1];
/// scores already on the unit scale are kept untouched so that degenerate
/// pools (single item, unanimous annotators) remain well defined.
inline std::vector<OpinionSummary> summarize_opinions(const RawOpinionTable& table,
                                                      const CalibrationSet& calibrations) {
    table.validate();

    struct MappedScore {
        size_t item;
        double value;
    };
    std::map<Modality, std::vector<MappedScore>> pools;
    for (size_t i = 0; i < table.items.size(); ++i) {
        const auto& item = table.items[i];
        for (const auto& [annotator, raw] : item.scores) {
            const auto it = calibrations.find(annotator);
            if (it == calibrations.end()) {
                throw Error(ErrorCode::MissingCalibration,
                            "no calibration for annotator '" + annotator + "'");
            }
            pools[item.modality].push_back({i, it->second.apply(raw)});
        }
    }

    std::vector<std::vector<double>> per_item(table.items.size());
    for (auto& [modality, pool] : pools) {
        double lo = pool.front().value, hi = pool.front().value;
        for (const auto& s : pool) {
            lo = std::min(lo, s.value);
            hi = std::max(hi, s.value);
        }
        const bool needs_rescale = lo < 0.0 || hi > 1.0;
        if (needs_rescale && !(hi > lo)) {
            throw Error(ErrorCode::RescaleDegenerate,
                        "summarize_opinions: constant out-of-range score pool");
        }
        for (const auto& s : pool) {
            const double v = needs_rescale ? (s.value - lo) / (hi - lo) : s.value;
            per_item[s.item].push_back(v);
        }
    }

    std::vector<OpinionSummary> summaries;
    summaries.reserve(table.items.size());
    for (size_t i = 0; i < table.items.size(); ++i) {
        const auto& values = per_item[i];
        const double n = static_cast<double>(values.size());
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= n;  // population variance: the sigma parameterizes a distribution
        OpinionSummary s;
        s.item_id = table.items[i].item_id;
        s.mu = std::clamp(mean, 0.0, 1.0);
        s.sigma = std::sqrt(std::max(var, 0.0));
        s.n = static_cast<int>(values.size());
        summaries.push_back(std::move(s));
    }
    return summaries;
}

}  // namespace vqkit
