#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "vqkit/error.hpp"
#include "vqkit/opinion.hpp"

namespace vqkit {

namespace detail {

inline void check_pairs(std::span<const double> pred, std::span<const double> gt) {
    if (pred.size() != gt.size() || pred.size() < 3) {
        throw Error(ErrorCode::InvalidArgument,
                    "correlation: need equal-length vectors with at least 3 points");
    }
    for (size_t i = 0; i < pred.size(); ++i) {
        if (!std::isfinite(pred[i]) || !std::isfinite(gt[i])) {
            throw Error(ErrorCode::InvalidArgument, "correlation: non-finite value");
        }
    }
}

}  // namespace detail

/// Average (fractional) ranks, 1-based; ties share the mean of their span.
inline std::vector<double> average_ranks(std::span<const double> values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

/// Pearson linear correlation coefficient.
inline double plcc(std::span<const double> pred, std::span<const double> gt) {
    detail::check_pairs(pred, gt);
    const double n = static_cast<double>(pred.size());
    const double mx = std::accumulate(pred.begin(), pred.end(), 0.0) / n;
    const double my = std::accumulate(gt.begin(), gt.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double dx = pred[i] - mx;
        const double dy = gt[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        throw Error(ErrorCode::CorrelationDegenerate, "plcc: constant vector");
    }
    return sxy / std::sqrt(sxx * syy);
}

/// Spearman rank correlation: Pearson over average ranks.
inline double srcc(std::span<const double> pred, std::span<const double> gt) {
    detail::check_pairs(pred, gt);
    const auto rp = average_ranks(pred);
    const auto rg = average_ranks(gt);
    return plcc(rp, rg);
}

/// PLCC after the standard 4-parameter sigmoid regression of pred onto gt.
inline double fitted_plcc(std::span<const double> pred, std::span<const double> gt) {
    detail::check_pairs(pred, gt);
    const SigmoidFit fit = fit_sigmoid_map(pred, gt);
    std::vector<double> mapped(pred.size());
    for (size_t i = 0; i < pred.size(); ++i) mapped[i] = apply_sigmoid_map(fit.params, pred[i]);
    return plcc(mapped, gt);
}

}  // namespace vqkit
