#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "vqkit/error.hpp"

namespace vqkit {

// Five quality levels partitioning [0,1] at 0.2 steps. A boundary value
// belongs to the upper level, except 1.0 which stays in High.
enum class QualityLevel { Low = 0, Poor = 1, Fair = 2, Good = 3, High = 4 };

inline constexpr std::array<double, 5> kLevelMidpoints{0.1, 0.3, 0.5, 0.7, 0.9};
inline constexpr std::array<double, 5> kLevelScoreWeights{0.0, 0.25, 0.5, 0.75, 1.0};
inline constexpr std::array<double, 6> kLevelEdges{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};

// Floor applied to sigma before discretization.
inline constexpr double kSigmaFloor = 1e-6;

// The target mean is clamped a small margin inside [0,1]: a score-scale mean
// of exactly 0 or 1 is only reachable by a degenerate one-hot distribution,
// and the clamp keeps the tilt solve bounded.
inline constexpr double kMuClampLo = 0.02;
inline constexpr double kMuClampHi = 0.98;

inline const char* level_name(QualityLevel level) {
    switch (level) {
        case QualityLevel::Low:  return "low";
        case QualityLevel::Poor: return "poor";
        case QualityLevel::Fair: return "fair";
        case QualityLevel::Good: return "good";
        case QualityLevel::High: return "high";
    }
    return "?";
}

/// Fused machine-opinion statistics for one media item.
struct OpinionSummary {
    std::string item_id;
    double mu = 0.0;     // mean of calibrated, rescaled scores, in [0,1]
    double sigma = 0.0;  // population standard deviation, >= 0
    int n = 1;           // number of annotators
};

/// Five-bin quality distribution (Low..High). Mean preservation is defined
/// on the score scale: sum(probs[i] * weight[i]) == target_mu, weights
/// [0, 0.25, 0.5, 0.75, 1]. Equivalently the interval-midpoint mean equals
/// 0.1 + 0.8 * target_mu. The score reading keeps the whole [0,1] mean range
/// reachable, so PMOD scores stay strictly monotone in the fused mean; under
/// midpoints the reachable band would collapse everything outside [0.1, 0.9]
/// into ties.
struct Pmod {
    std::array<double, 5> probs{};
    double target_mu = 0.0;  // clamped score-scale mean, in [0.02, 0.98]
};

/// Preference probability label for an item pair: 1.0, 0.0 or 0.5 (tie).
struct PairLabel {
    double p_true = 0.5;
};

/// Standard normal CDF, absolute error well below 1e-12.
inline double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

/// Mass of N(mu, sigma^2) on (a, b). Infinite bounds allowed.
inline double gaussian_interval_mass(double mu, double sigma, double a, double b) {
    if (!(sigma > 0.0)) {
        throw Error(ErrorCode::InvalidSummary, "gaussian_interval_mass: sigma must be positive");
    }
    if (!(a < b)) {
        throw Error(ErrorCode::InvalidArgument, "gaussian_interval_mass: requires a < b");
    }
    const double hi = std::isinf(b) ? 1.0 : std_normal_cdf((b - mu) / sigma);
    const double lo = std::isinf(a) ? 0.0 : std_normal_cdf((a - mu) / sigma);
    return hi - lo;
}

inline QualityLevel level_of(double mu) {
    if (!(mu >= 0.0 && mu <= 1.0)) {
        throw Error(ErrorCode::InvalidSummary, "level_of: mu outside [0,1]");
    }
    if (mu < 0.2) return QualityLevel::Low;
    if (mu < 0.4) return QualityLevel::Poor;
    if (mu < 0.6) return QualityLevel::Fair;
    if (mu < 0.8) return QualityLevel::Good;
    return QualityLevel::High;
}

/// Scalar quality score of a level distribution: weighted sum with the
/// ascending weights [0, 0.25, 0.5, 0.75, 1].
inline double expected_score(const std::array<double, 5>& probs) {
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= -1e-9) || !std::isfinite(p)) {
            throw Error(ErrorCode::InvalidDistribution, "expected_score: negative or non-finite probability");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
        throw Error(ErrorCode::InvalidDistribution, "expected_score: probabilities must sum to 1");
    }
    double score = 0.0;
    for (int i = 0; i < 5; ++i) score += probs[i] * kLevelScoreWeights[i];
    return score;
}

namespace detail {

// Exact-mean distribution on the two midpoints bracketing t. Used when the
// tilt's support collapses (e.g. a single raw bin that cannot carry an
// off-midpoint mean).
inline std::array<double, 5> bracket_distribution(double t) {
    std::array<double, 5> probs{};
    if (t <= kLevelMidpoints.front()) {
        probs[0] = 1.0;
        return probs;
    }
    if (t >= kLevelMidpoints.back()) {
        probs[4] = 1.0;
        return probs;
    }
    int k = 0;
    while (k < 3 && kLevelMidpoints[k + 1] < t) ++k;
    const double w = (kLevelMidpoints[k + 1] - t) / 0.2;
    probs[k] = w;
    probs[k + 1] = 1.0 - w;
    return probs;
}

// Multiplicative tilt p_i * (1 + lambda*(m_i - t)), lambda solved so the
// normalized midpoint mean equals t; bins whose factor turns negative are
// zeroed and the solve repeats on the remaining support. A candidate is only
// accepted after verifying the achieved mean (a near-zero factor on the
// dominant bin can collapse the solution numerically).
inline std::array<double, 5> tilt_to_mean(std::array<double, 5> p, double t) {
    const auto& m = kLevelMidpoints;
    std::array<bool, 5> support{};
    for (int i = 0; i < 5; ++i) support[i] = p[i] > 0.0;

    for (int round = 0; round < 5; ++round) {
        double total = 0.0;
        for (int i = 0; i < 5; ++i) {
            if (!support[i]) p[i] = 0.0;
            total += p[i];
        }
        if (total <= 0.0) break;
        for (auto& v : p) v /= total;

        double mean_raw = 0.0, denom = 0.0;
        for (int i = 0; i < 5; ++i) {
            mean_raw += p[i] * m[i];
            denom += p[i] * (m[i] - t) * (m[i] - t);
        }
        if (std::abs(mean_raw - t) < 1e-12) return p;
        if (denom < 1e-18) break;  // single off-target bin: unreachable by tilting
        const double lambda = (t - mean_raw) / denom;

        std::array<double, 5> factor{};
        bool any_negative = false;
        for (int i = 0; i < 5; ++i) {
            factor[i] = 1.0 + lambda * (m[i] - t);
            if (support[i] && factor[i] < -1e-12) any_negative = true;
        }
        if (!any_negative) {
            std::array<double, 5> q{};
            double sum = 0.0, mean_new = 0.0;
            for (int i = 0; i < 5; ++i) {
                q[i] = support[i] ? p[i] * std::max(factor[i], 0.0) : 0.0;
                sum += q[i];
            }
            if (sum > 0.0) {
                for (auto& v : q) v /= sum;
                for (int i = 0; i < 5; ++i) mean_new += q[i] * m[i];
                if (std::abs(mean_new - t) < 1e-9) return q;
            }
        }
        // drop the bins the tilt zeroed (or tried to push negative)
        bool shrunk = false;
        for (int i = 0; i < 5; ++i) {
            if (support[i] && factor[i] < 1e-12) {
                support[i] = false;
                shrunk = true;
            }
        }
        if (!shrunk) break;
    }
    return bracket_distribution(t);
}

}  // namespace detail

/// Builds the five-level opinion distribution for a summary: discretize a
/// Gaussian N(mu, sigma^2) truncated to [0,1] over the level intervals, then
/// tilt so the score-scale mean matches the clamped mu (midpoint target
/// 0.1 + 0.8 * mu).
inline Pmod build_pmod(const OpinionSummary& summary) {
    if (!(summary.mu >= 0.0 && summary.mu <= 1.0) || !std::isfinite(summary.sigma) ||
        summary.sigma < 0.0) {
        throw Error(ErrorCode::InvalidSummary,
                    "build_pmod: mu must be in [0,1] and sigma non-negative (item '" +
                        summary.item_id + "')");
    }
    const double sigma = std::max(summary.sigma, kSigmaFloor);
    const double mu = std::clamp(summary.mu, kMuClampLo, kMuClampHi);

    const double total = gaussian_interval_mass(mu, sigma, 0.0, 1.0);
    std::array<double, 5> raw{};
    for (int i = 0; i < 5; ++i) {
        raw[i] = gaussian_interval_mass(mu, sigma, kLevelEdges[i], kLevelEdges[i + 1]) / total;
    }

    Pmod pmod;
    pmod.probs = detail::tilt_to_mean(raw, 0.1 + 0.8 * mu);
    pmod.target_mu = mu;
    return pmod;
}

/// Thurstone preference probability Phi((mu1-mu2)/sqrt(s1^2+s2^2)).
inline double pairwise_prob(double mu1, double sigma1, double mu2, double sigma2) {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) {
        throw Error(ErrorCode::InvalidSummary, "pairwise_prob: sigmas must be positive");
    }
    return std_normal_cdf((mu1 - mu2) / std::sqrt(sigma1 * sigma1 + sigma2 * sigma2));
}

/// Training-path convention: both sigmas fixed to 1.
inline double pairwise_prob(double mu1, double mu2) {
    return pairwise_prob(mu1, 1.0, mu2, 1.0);
}

/// Ground-truth pair label: better/worse when the mean gap strictly exceeds
/// the combined deviation, tie otherwise (equality included).
inline PairLabel pairwise_label(const OpinionSummary& a, const OpinionSummary& b) {
    const double threshold = std::sqrt(a.sigma * a.sigma + b.sigma * b.sigma);
    if (a.mu - b.mu > threshold) return PairLabel{1.0};
    if (b.mu - a.mu > threshold) return PairLabel{0.0};
    return PairLabel{0.5};
}

}  // namespace vqkit
