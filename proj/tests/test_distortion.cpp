#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "vqkit/distortion.hpp"
#include "vqkit/rng.hpp"

using namespace vqkit;

namespace {

const SeverityLadder& ladder() {
    static const SeverityLadder instance = SeverityLadder::defaults();
    return instance;
}

// Independent convolution oracle: Laplacian energy (mean squared response of
// the 4-neighbour Laplacian on luma).
double laplacian_energy(const ImageBuffer& img) {
    double acc = 0.0;
    size_t n = 0;
    for (int y = 1; y + 1 < img.height; ++y) {
        for (int x = 1; x + 1 < img.width; ++x) {
            const double v = 4.0 * luma_at(img, x, y) - luma_at(img, x - 1, y) -
                             luma_at(img, x + 1, y) - luma_at(img, x, y - 1) -
                             luma_at(img, x, y + 1);
            acc += v * v;
            ++n;
        }
    }
    return acc / static_cast<double>(n);
}

}  // namespace

TEST(SeverityLadder, DefaultsValidate) {
    EXPECT_NO_THROW(SeverityLadder::defaults().validate());
}

TEST(SeverityLadder, NonMonotoneRejected) {
    SeverityLadder bad = SeverityLadder::defaults();
    bad.set(DistortionCategory::GaussianBlur,
            {{{"sigma", 1.0}}, {{"sigma", 3.0}}, {{"sigma", 2.0}}, {{"sigma", 5.0}}, {{"sigma", 8.0}}});
    EXPECT_THROW(bad.validate(), Error);
}

TEST(SeverityLadder, MissingEntryThrows) {
    EXPECT_THROW(ladder().param(DistortionCategory::GaussianBlur, 6, "sigma"), Error);
    EXPECT_THROW(ladder().param(DistortionCategory::GaussianBlur, 1, "banana"), Error);
}

TEST(DistortionSpec, SeverityRangeEnforced) {
    EXPECT_THROW((DistortionSpec{DistortionCategory::GaussianBlur, 0, 1}.validate()), Error);
    EXPECT_THROW((DistortionSpec{DistortionCategory::GaussianBlur, 6, 1}.validate()), Error);
    EXPECT_THROW((DistortionSpec{DistortionCategory::Stuttering, 4, 1}.validate()), Error);
    EXPECT_NO_THROW((DistortionSpec{DistortionCategory::Stuttering, 3, 1}.validate()));
}

TEST(SpatialDistortion, DeterministicForAllCategories) {
    const auto img = fixtures::scene(64, 48);
    for (auto cat : all_categories()) {
        if (is_video_category(cat) || cat == DistortionCategory::Jpeg2000Compression) continue;
        const DistortionSpec spec{cat, 3, 0xABCDEFu};
        const auto a = apply_spatial_distortion(img, spec, ladder());
        const auto b = apply_spatial_distortion(img, spec, ladder());
        EXPECT_EQ(a.samples, b.samples) << category_name(cat);
        EXPECT_TRUE(a.same_size(img)) << category_name(cat);
        for (double v : a.samples) {
            ASSERT_GE(v, 0.0);
            ASSERT_LE(v, 1.0);
        }
    }
}

TEST(SpatialDistortion, SeedChangesStochasticOutput) {
    const auto img = fixtures::texture(64, 48);
    for (auto cat : {DistortionCategory::WhiteNoise, DistortionCategory::ImpulseNoise,
                     DistortionCategory::Jitter, DistortionCategory::ColorBlock}) {
        const auto a = apply_spatial_distortion(img, {cat, 3, 1}, ladder());
        const auto b = apply_spatial_distortion(img, {cat, 3, 2}, ladder());
        EXPECT_NE(a.samples, b.samples) << category_name(cat);
    }
}

TEST(SpatialDistortion, IdentityLadderEntries) {
    const auto img = fixtures::bars(64, 48);
    SeverityLadder custom = SeverityLadder::defaults();
    custom.set(DistortionCategory::ImpulseNoise,
               {{{"prob", 0.0}}, {{"prob", 0.1}}, {{"prob", 0.2}}, {{"prob", 0.3}}, {{"prob", 0.4}}});
    custom.set(DistortionCategory::MeanShift,
               {{{"delta", 0.0}}, {{"delta", 0.1}}, {{"delta", 0.2}}, {{"delta", 0.3}}, {{"delta", 0.4}}});
    custom.set(DistortionCategory::Pixelation,
               {{{"factor", 1.0}}, {{"factor", 2.0}}, {{"factor", 3.0}}, {{"factor", 4.0}}, {{"factor", 5.0}}});

    EXPECT_EQ(apply_spatial_distortion(img, {DistortionCategory::ImpulseNoise, 1, 9}, custom).samples,
              img.samples);
    EXPECT_EQ(apply_spatial_distortion(img, {DistortionCategory::MeanShift, 1, 9}, custom).samples,
              img.samples);
    EXPECT_EQ(apply_spatial_distortion(img, {DistortionCategory::Pixelation, 1, 9}, custom).samples,
              img.samples);
}

TEST(SpatialDistortion, GaussianBlurReducesLaplacianEnergy) {
    const auto img = fixtures::bars(64, 64);
    const auto mild = apply_spatial_distortion(img, {DistortionCategory::GaussianBlur, 1, 3}, ladder());
    const auto severe = apply_spatial_distortion(img, {DistortionCategory::GaussianBlur, 5, 3}, ladder());
    EXPECT_LT(laplacian_energy(severe), laplacian_energy(mild));
    EXPECT_LT(laplacian_energy(mild), laplacian_energy(img));
}

TEST(SpatialDistortion, MeanShiftExactOffAwayFromClip) {
    auto img = ImageBuffer::create(32, 32, 0.5);
    const double delta = ladder().param(DistortionCategory::MeanShift, 2, "delta");
    const auto shifted = apply_spatial_distortion(img, {DistortionCategory::MeanShift, 2, 0}, ladder());
    for (size_t i = 0; i < img.samples.size(); ++i) {
        ASSERT_DOUBLE_EQ(shifted.samples[i], 0.5 + delta);
    }
}

TEST(SpatialDistortion, ColorShiftTouchesOnlyGreenChannel) {
    const auto img = fixtures::scene(64, 48);
    const auto out = apply_spatial_distortion(img, {DistortionCategory::ColorShift, 4, 11}, ladder());
    bool green_changed = false;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            ASSERT_EQ(out.at(x, y, 0), img.at(x, y, 0));
            ASSERT_EQ(out.at(x, y, 2), img.at(x, y, 2));
            green_changed = green_changed || out.at(x, y, 1) != img.at(x, y, 1);
        }
    }
    EXPECT_TRUE(green_changed);
}

TEST(SpatialDistortion, Jpeg2000WithoutCodecUnavailable) {
    const auto img = fixtures::scene(32, 32);
    try {
        apply_spatial_distortion(img, {DistortionCategory::Jpeg2000Compression, 2, 0}, ladder());
        FAIL() << "expected CodecUnavailable";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CodecUnavailable);
    }
}

TEST(SpatialDistortion, QuickPsnrMonotonicity) {
    // Full sweep lives in the acceptance suite; spot-check two categories.
    const auto img = fixtures::texture(64, 48);
    for (auto cat : {DistortionCategory::WhiteNoise, DistortionCategory::JpegCompression}) {
        double prev = std::numeric_limits<double>::infinity();
        for (int sev = 1; sev <= 5; ++sev) {
            const auto out = apply_spatial_distortion(img, {cat, sev, 5}, ladder());
            const double p = psnr(img, out);
            EXPECT_LT(p, prev) << category_name(cat) << " severity " << sev;
            prev = p;
        }
    }
}

TEST(SequenceDistortion, StructuralParamsStableAcrossFrames) {
    // motion blur angle is drawn once per clip: a static clip must map to a
    // static distorted clip
    const auto seq = fixtures::static_clip(4, 48, 32);
    const auto out = apply_spatial_to_sequence(seq, {DistortionCategory::MotionBlur, 3, 77}, ladder());
    ASSERT_EQ(out.frames.size(), seq.frames.size());
    for (size_t t = 1; t < out.frames.size(); ++t) {
        EXPECT_EQ(out.frames[t].samples, out.frames[0].samples);
    }
}

TEST(Stutter, ZeroProbabilityIsIdentity) {
    SeverityLadder custom = SeverityLadder::defaults();
    custom.set(DistortionCategory::Stuttering, {{{"prob", 0.0}}, {{"prob", 0.5}}, {{"prob", 1.0}}});
    const auto seq = fixtures::clip(6, 32, 32);
    const auto out = apply_stutter(seq, 1, 42, custom);
    ASSERT_EQ(out.frames.size(), seq.frames.size());
    for (size_t t = 0; t < seq.frames.size(); ++t) {
        EXPECT_EQ(out.frames[t].samples, seq.frames[t].samples);
    }
}

TEST(Stutter, FullProbabilityFreezesFirstFrame) {
    SeverityLadder custom = SeverityLadder::defaults();
    custom.set(DistortionCategory::Stuttering, {{{"prob", 0.0}}, {{"prob", 0.5}}, {{"prob", 1.0}}});
    const auto seq = fixtures::clip(6, 32, 32);
    const auto out = apply_stutter(seq, 3, 42, custom);
    for (size_t t = 0; t < out.frames.size(); ++t) {
        EXPECT_EQ(out.frames[t].samples, seq.frames[0].samples);
    }
}

TEST(Stutter, SubstitutionCountMatchesRngReplay) {
    SeverityLadder custom = SeverityLadder::defaults();
    custom.set(DistortionCategory::Stuttering, {{{"prob", 0.25}}, {{"prob", 0.5}}, {{"prob", 1.0}}});
    const uint64_t seed = 314;
    const auto seq = fixtures::clip(100, 16, 16);
    const auto out = apply_stutter(seq, 1, seed, custom);

    // independent replay of the documented draw sequence
    Rng replay(derive_seed(seed, "", "stutter"));
    size_t expected_subs = 0;
    std::vector<bool> frozen(seq.frames.size(), false);
    for (size_t t = 1; t < seq.frames.size(); ++t) {
        if (replay.uniform() <= 0.25) {
            frozen[t] = true;
            ++expected_subs;
        }
    }
    size_t observed_subs = 0;
    for (size_t t = 1; t < seq.frames.size(); ++t) {
        if (out.frames[t].samples != seq.frames[t].samples) ++observed_subs;
        // every frozen frame must equal the previous output frame
        if (frozen[t]) EXPECT_EQ(out.frames[t].samples, out.frames[t - 1].samples);
    }
    EXPECT_GE(expected_subs, 15u);  // ~25 of 99 expected
    EXPECT_LE(expected_subs, 40u);
    // frames flagged frozen can still *equal* the source frame if the clip
    // repeats content, so compare against the replayed count directly
    size_t replay_visible = 0;
    for (size_t t = 1; t < seq.frames.size(); ++t) {
        if (frozen[t] && out.frames[t].samples != seq.frames[t].samples) ++replay_visible;
    }
    EXPECT_EQ(observed_subs, replay_visible);
}

TEST(CameraShake, ZeroAmplitudeIsIdentity) {
    SeverityLadder custom = SeverityLadder::defaults();
    custom.set(DistortionCategory::CameraShake,
               {{{"amplitude", 0.0}}, {{"amplitude", 1.0}}, {{"amplitude", 2.0}}});
    const auto seq = fixtures::clip(5, 32, 32);
    const auto out = apply_camera_shake(seq, 1, 21, custom);
    for (size_t t = 0; t < seq.frames.size(); ++t) {
        EXPECT_EQ(out.frames[t].samples, seq.frames[t].samples);
    }
}

TEST(CameraShake, EveryFrameIsSomeTranslateOfItsInput) {
    SeverityLadder custom = SeverityLadder::defaults();
    custom.set(DistortionCategory::CameraShake,
               {{{"amplitude", 2.0}}, {{"amplitude", 5.0}}, {{"amplitude", 10.0}}});
    const auto seq = fixtures::clip(6, 32, 32);
    const auto out = apply_camera_shake(seq, 1, 33, custom);
    for (size_t t = 0; t < seq.frames.size(); ++t) {
        bool matched = false;
        for (int dy = -2; dy <= 2 && !matched; ++dy) {
            for (int dx = -2; dx <= 2 && !matched; ++dx) {
                matched = translate_replicate(seq.frames[t], dx, dy).samples == out.frames[t].samples;
            }
        }
        EXPECT_TRUE(matched) << "frame " << t;
    }
}

TEST(CameraShake, Reproducible) {
    const auto seq = fixtures::clip(5, 32, 32);
    const auto a = apply_camera_shake(seq, 2, 99, ladder());
    const auto b = apply_camera_shake(seq, 2, 99, ladder());
    for (size_t t = 0; t < a.frames.size(); ++t) {
        EXPECT_EQ(a.frames[t].samples, b.frames[t].samples);
    }
}

TEST(CategoryNames, TokensRoundTrip) {
    for (auto c : all_categories()) {
        const auto parsed = parse_category(category_token(c));
        ASSERT_TRUE(parsed.has_value()) << category_token(c);
        EXPECT_EQ(*parsed, c);
    }
    EXPECT_FALSE(parse_category("sepia").has_value());
    EXPECT_EQ(all_categories().size(), 29u);
}
