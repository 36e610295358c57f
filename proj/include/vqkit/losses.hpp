#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "vqkit/error.hpp"
#include "vqkit/pmod.hpp"

namespace vqkit {

// Probability the model assigned to each correct target token given its
// prefix. The quality-level token sits at the last position.
struct TokenTargetSequence {
    std::vector<double> target_probs;  // each in (0,1]

    int level_index() const { return static_cast<int>(target_probs.size()) - 1; }

    void validate() const {
        if (target_probs.empty()) {
            throw Error(ErrorCode::InvalidArgument, "token sequence must be non-empty");
        }
        for (double p : target_probs) {
            if (!(p > 0.0) || p > 1.0) {
                throw Error(ErrorCode::InfiniteLoss, "target token probability outside (0,1]");
            }
        }
    }
};

struct LevelLogits {
    std::array<double, 5> logits{};
};

struct FocalParams {
    double alpha = 1.0;
    double beta = 2.0;
};

inline constexpr double kDefaultScoringGamma = 0.01;
inline constexpr double kPairProbClamp = 1e-12;

inline std::array<double, 5> softmax5(const LevelLogits& logits) {
    for (double v : logits.logits) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::InvalidArgument, "softmax5: non-finite logit");
        }
    }
    const double m = *std::max_element(logits.logits.begin(), logits.logits.end());
    std::array<double, 5> out{};
    double sum = 0.0;
    for (int i = 0; i < 5; ++i) {
        out[i] = std::exp(logits.logits[i] - m);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

struct KlResult {
    double value = 0.0;
    // d KL / d z_j for q = softmax(z): q_j - p_j.
    std::array<double, 5> grad_q_logits{};
};

/// KL(p || q) over five bins, with 0*log0 = 0. q must be strictly positive
/// wherever p is.
inline KlResult kl_div(const std::array<double, 5>& p, const std::array<double, 5>& q) {
    KlResult result;
    for (int i = 0; i < 5; ++i) {
        if (p[i] > 0.0) {
            if (!(q[i] > 0.0)) {
                throw Error(ErrorCode::InfiniteDivergence, "kl_div: q has zero mass where p > 0");
            }
            result.value += p[i] * std::log(p[i] / q[i]);
        }
        result.grad_q_logits[i] = q[i] - p[i];
    }
    return result;
}

struct ScoringLossResult {
    double value = 0.0;
    std::array<double, 5> grad_level_logits{};
    std::vector<double> grad_prefix_probs;  // d loss / d p_l, one per prefix token
};

/// Single-input scoring loss: (1/L) * (-gamma * sum_{l<level} log p_l
/// + KL(target || softmax(level_logits))).
inline ScoringLossResult scoring_single_loss(const TokenTargetSequence& seq, const Pmod& target,
                                             const LevelLogits& level_logits,
                                             double gamma = kDefaultScoringGamma) {
    seq.validate();
    const int length = static_cast<int>(seq.target_probs.size());
    const int level = seq.level_index();

    ScoringLossResult result;
    result.grad_prefix_probs.resize(level, 0.0);

    double ce_sum = 0.0;
    for (int l = 0; l < level; ++l) {
        ce_sum -= std::log(seq.target_probs[l]);
        result.grad_prefix_probs[l] = -gamma / (length * seq.target_probs[l]);
    }

    const auto predicted = softmax5(level_logits);
    const KlResult kl = kl_div(target.probs, predicted);

    result.value = (gamma * ce_sum + kl.value) / length;
    for (int i = 0; i < 5; ++i) {
        result.grad_level_logits[i] = kl.grad_q_logits[i] / length;
    }
    return result;
}

struct PairwiseLossResult {
    double value = 0.0;
    double grad_mu1 = 0.0;
    double grad_mu2 = 0.0;
};

/// Pairwise preference loss: KL([p_true, 1-p_true] || [p_pred, 1-p_pred])
/// with p_pred = Phi((mu1-mu2)/sqrt(2)) (both predicted sigmas fixed to 1).
/// p_pred is clamped to [1e-12, 1-1e-12] before the logs; in the clamped
/// region the loss is locally constant, so the gradient is zero there.
inline PairwiseLossResult pairwise_kl_loss(const PairLabel& label, double mu1_pred,
                                           double mu2_pred) {
    if (!std::isfinite(mu1_pred) || !std::isfinite(mu2_pred)) {
        throw Error(ErrorCode::InvalidArgument, "pairwise_kl_loss: non-finite mu");
    }
    const double pt = label.p_true;
    if (pt != 0.0 && pt != 0.5 && pt != 1.0) {
        throw Error(ErrorCode::InvalidArgument, "pairwise_kl_loss: label must be 0, 0.5 or 1");
    }
    const double x = (mu1_pred - mu2_pred) / std::sqrt(2.0);
    const double raw = std_normal_cdf(x);
    const bool clamped = raw < kPairProbClamp || raw > 1.0 - kPairProbClamp;
    const double pp = std::clamp(raw, kPairProbClamp, 1.0 - kPairProbClamp);

    auto xlogx = [](double a, double b) { return a > 0.0 ? a * std::log(a / b) : 0.0; };
    PairwiseLossResult result;
    result.value = xlogx(pt, pp) + xlogx(1.0 - pt, 1.0 - pp);

    if (!clamped) {
        // dKL/dp_pred * dPhi/dmu1, with dPhi/dx the standard normal pdf
        const double dkl_dp = -pt / pp + (1.0 - pt) / (1.0 - pp);
        const double pdf = std::exp(-0.5 * x * x) * 0.39894228040143267794;
        const double dp_dmu1 = pdf / std::sqrt(2.0);
        result.grad_mu1 = dkl_dp * dp_dmu1;
        result.grad_mu2 = -dkl_dp * dp_dmu1;
    }
    return result;
}

struct FocalLossResult {
    double value = 0.0;
    std::vector<double> grad_probs;  // d loss / d p_l
};

/// Token-wise focal loss: (1/L) * sum_l alpha * (1-p_l)^beta * (-log p_l).
inline FocalLossResult focal_loss(const TokenTargetSequence& seq,
                                  const FocalParams& params = {}) {
    seq.validate();
    if (!(params.alpha > 0.0) || params.beta < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "focal_loss: alpha must be > 0 and beta >= 0");
    }
    const int length = static_cast<int>(seq.target_probs.size());
    FocalLossResult result;
    result.grad_probs.resize(length, 0.0);
    for (int l = 0; l < length; ++l) {
        const double p = seq.target_probs[l];
        const double one_minus = 1.0 - p;
        const double w = std::pow(one_minus, params.beta);
        result.value += params.alpha * w * (-std::log(p));
        // d/dp [(1-p)^b * (-log p)] = b(1-p)^(b-1) log p - (1-p)^b / p
        double dw = 0.0;
        if (params.beta > 0.0) {
            dw = params.beta * std::pow(one_minus, params.beta - 1.0) * std::log(p);
        }
        result.grad_probs[l] = params.alpha * (dw - w / p) / length;
    }
    result.value /= length;
    return result;
}

}  // namespace vqkit
