#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vqkit/error.hpp"
#include "vqkit/opinion.hpp"
#include "vqkit/pmod.hpp"
#include "vqkit/rng.hpp"
#include "vqkit/stats.hpp"

namespace vqkit {

/// Synthetic machine annotator: a monotone response nonlinearity plus bias
/// and Gaussian noise, clamped to the warp's range.
struct SynthAnnotatorSpec {
    double bias = 0.0;
    double noise_sigma = 0.1;
    SigmoidMapParams warp;
    uint64_t seed = 0;

    void validate() const {
        if (!(noise_sigma > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "annotator noise_sigma must be positive");
        }
        if (!warp.valid() || warp.gamma1 * warp.gamma3 <= 0.0) {
            throw Error(ErrorCode::InvalidArgument,
                        "annotator warp must be strictly monotone (gamma1*gamma3 > 0)");
        }
    }
};

/// A gentle sigmoid that stays within 4e-7 of the identity on [0,1]. Its
/// asymptotic range is wide (about [-199, 201]), so score clamping never
/// bites for unit-scale data.
inline SigmoidMapParams near_identity_warp() {
    SigmoidMapParams p;
    p.gamma1 = 0.01;
    p.gamma2 = -0.005;
    const double s0 = stable_sigmoid(p.gamma2);
    const double s1 = stable_sigmoid(p.gamma1 + p.gamma2);
    p.gamma3 = 1.0 / (s1 - s0);
    p.gamma4 = -p.gamma3 * s0;
    return p;
}

/// Ground-truth draws: 0.8 uniform core + 0.1 low-edge + 0.1 high-edge mass.
inline std::vector<double> synth_ground_truth(int n, uint64_t seed) {
    if (n < 2) {
        throw Error(ErrorCode::InvalidArgument, "synth_ground_truth needs n >= 2");
    }
    Rng rng(derive_seed(seed, "", "ground-truth"));
    std::vector<double> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        if (u < 0.8) {
            out.push_back(rng.uniform());
        } else if (u < 0.9) {
            out.push_back(rng.uniform(0.0, 0.15));
        } else {
            out.push_back(rng.uniform(0.85, 1.0));
        }
    }
    return out;
}

inline std::vector<double> synth_scores(const std::vector<double>& gt,
                                        const SynthAnnotatorSpec& spec) {
    spec.validate();
    const double asym_lo = std::min(spec.warp.gamma4, spec.warp.gamma4 + spec.warp.gamma3);
    const double asym_hi = std::max(spec.warp.gamma4, spec.warp.gamma4 + spec.warp.gamma3);
    Rng rng(derive_seed(spec.seed, "", "annotator-noise"));
    std::vector<double> out;
    out.reserve(gt.size());
    for (double g : gt) {
        const double score =
            apply_sigmoid_map(spec.warp, g) + spec.bias + rng.normal(0.0, spec.noise_sigma);
        out.push_back(std::clamp(score, asym_lo, asym_hi));
    }
    return out;
}

struct FusionExperimentReport {
    std::vector<double> individual_srcc;  // per annotator, eval split
    double fused_srcc = 0.0;              // fused means vs ground truth
    double pmod_srcc = 0.0;               // PMOD expected scores vs ground truth
    double pmod_vs_fused_srcc = 0.0;      // PMOD expected scores vs fused means
    int n_calibration = 0;
    int n_eval = 0;
};

/// End-to-end fusion run on synthetic data: per-annotator sigmoid calibration
/// on a held-out split (even indices), fusion and PMOD scoring on the rest.
inline FusionExperimentReport run_fusion_experiment(int n,
                                                    const std::vector<SynthAnnotatorSpec>& specs,
                                                    uint64_t seed) {
    if (specs.empty()) {
        throw Error(ErrorCode::InvalidArgument, "run_fusion_experiment needs >= 1 annotator");
    }
    if (n < 16) {
        throw Error(ErrorCode::InvalidArgument, "run_fusion_experiment needs n >= 16");
    }
    const std::vector<double> gt = synth_ground_truth(n, seed);
    std::vector<std::vector<double>> scores;
    scores.reserve(specs.size());
    for (const auto& spec : specs) scores.push_back(synth_scores(gt, spec));

    std::vector<size_t> calibration_idx, eval_idx;
    for (size_t i = 0; i < gt.size(); ++i) {
        (i % 2 == 0 ? calibration_idx : eval_idx).push_back(i);
    }

    std::vector<double> gt_eval;
    for (size_t i : eval_idx) gt_eval.push_back(gt[i]);

    FusionExperimentReport report;
    report.n_calibration = static_cast<int>(calibration_idx.size());
    report.n_eval = static_cast<int>(eval_idx.size());

    CalibrationSet calibrations;
    RawOpinionTable table;
    for (size_t e = 0; e < eval_idx.size(); ++e) {
        OpinionItem item;
        item.item_id = "item" + std::to_string(eval_idx[e]);
        item.modality = Modality::Image;
        table.items.push_back(std::move(item));
    }

    for (size_t a = 0; a < specs.size(); ++a) {
        std::vector<double> pred_cal, gt_cal;
        for (size_t i : calibration_idx) {
            pred_cal.push_back(scores[a][i]);
            gt_cal.push_back(gt[i]);
        }
        const SigmoidFit fit = fit_sigmoid_map(pred_cal, gt_cal);
        const std::string annotator = "annotator" + std::to_string(a);
        calibrations[annotator] = AnnotatorCalibration::sigmoid(fit.params);

        std::vector<double> mapped_eval;
        for (size_t e = 0; e < eval_idx.size(); ++e) {
            const double raw = scores[a][eval_idx[e]];
            mapped_eval.push_back(apply_sigmoid_map(fit.params, raw));
            table.items[e].scores[annotator] = raw;
        }
        report.individual_srcc.push_back(srcc(mapped_eval, gt_eval));
    }

    const std::vector<OpinionSummary> summaries = summarize_opinions(table, calibrations);
    std::vector<double> fused_means, pmod_scores;
    for (const auto& summary : summaries) {
        fused_means.push_back(summary.mu);
        pmod_scores.push_back(expected_score(build_pmod(summary).probs));
    }
    report.fused_srcc = srcc(fused_means, gt_eval);
    report.pmod_srcc = srcc(pmod_scores, gt_eval);
    report.pmod_vs_fused_srcc = srcc(pmod_scores, fused_means);
    return report;
}

}  // namespace vqkit
