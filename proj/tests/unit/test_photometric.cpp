// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "occ/error.hpp"
#include "occ/photometric.hpp"
#include "occ/volume_render.hpp"

namespace occ {
namespace {

using testing::random_image;
using testing::small_camera;
using testing::smooth_image;

constexpr double kC1 = 0.01 * 0.01;

CameraIntrinsics tiny_camera(int w, int h) { return {50.0, 50.0, (w - 1) / 2.0, (h - 1) / 2.0, w, h}; }

TEST(BilinearSample, ExactAtNodesAndInterpolatesBetween) {
    Image img(2, 2);
    img(0, 0) = Rgb(0, 0, 0);
    img(1, 0) = Rgb(1, 0, 0);
    img(0, 1) = Rgb(0, 1, 0);
    img(1, 1) = Rgb(1, 1, 1);
    EXPECT_TRUE(rgb_equal(bilinear_sample(img, 1, 1), img(1, 1)));
    const Rgb mid = bilinear_sample(img, 0.5, 0.5);
    EXPECT_FLOAT_EQ(mid[0], 0.5f);
    EXPECT_FLOAT_EQ(mid[1], 0.5f);
    EXPECT_FLOAT_EQ(mid[2], 0.25f);
}

TEST(WarpImage, IdentityIsBitExact) {
    const CameraIntrinsics K = small_camera();
    const Image src = random_image(K.width, K.height, 4);
    DepthMap depth(K.width, K.height, 7.5f);
    depth(3, 3) = kInvalidDepth;
    const WarpResult w = warp_image(src, depth, K, Pose::identity());
    for (int v = 0; v < K.height; ++v)
        for (int u = 0; u < K.width; ++u) {
            if (u == 3 && v == 3) {
                EXPECT_EQ(w.validity(u, v), 0);
                continue;
            }
            ASSERT_EQ(w.validity(u, v), 1);
            ASSERT_TRUE(rgb_equal(w.warped(u, v), src(u, v)));
        }
}

TEST(WarpImage, FrontoParallelTranslationShiftsConstantly) {
    const CameraIntrinsics K = small_camera();
    const double d = 10.0, tx = 0.37;
    const DepthMap depth(K.width, K.height, static_cast<float>(d));
    const Image src = smooth_image(K.width, K.height);
    const WarpResult w = warp_image(src, depth, K, Pose::from_translation({tx, 0, 0}));
    const double shift = K.fx * tx / d;
    std::size_t valid = 0;
    for (int v = 0; v < K.height; ++v)
        for (int u = 0; u < K.width; ++u) {
            const Pixel s = w.source_coords(u, v);
            EXPECT_NEAR(s.u, u + shift, 1e-9);
            EXPECT_NEAR(s.v, v, 1e-9);
            const bool inside = u + shift <= K.width - 1;
            EXPECT_EQ(w.validity(u, v), inside ? 1 : 0);
            if (!inside) continue;
            ++valid;
            const Rgb expected = bilinear_sample(src, u + shift, v);
            EXPECT_NEAR(w.warped(u, v)[0], expected[0], 1e-6);
        }
    EXPECT_EQ(valid, static_cast<std::size_t>(K.height) * (K.width - 4));
}

TEST(WarpImage, BehindSourceAndOutOfBoundsAreInvalid) {
    const CameraIntrinsics K = tiny_camera(9, 9);
    const Image src = random_image(9, 9, 1);
    const DepthMap depth(9, 9, 2.0f);
    const WarpResult behind = warp_image(src, depth, K, Pose::from_translation({0, 0, -5}));
    for (auto m : behind.validity.values()) EXPECT_EQ(m, 0);
    const WarpResult away = warp_image(src, depth, K, Pose::from_translation({100, 0, 0}));
    for (auto m : away.validity.values()) EXPECT_EQ(m, 0);
    for (const auto& p : away.warped.values()) EXPECT_TRUE(rgb_equal(p, Rgb::Zero()));
}

TEST(WarpImage, SizeMismatchThrows) {
    const CameraIntrinsics K = tiny_camera(9, 9);
    EXPECT_THROW(warp_image(Image(9, 9), DepthMap(8, 9, 1.0f), K, Pose::identity()), InvalidArgument);
    EXPECT_THROW(warp_image(Image(8, 9), DepthMap(8, 9, 1.0f), K, Pose::identity()), InvalidArgument);
}

TEST(WarpImage, RoundTripReproducesSmoothImage) {
    const CameraIntrinsics K = small_camera();
    const Image original = smooth_image(K.width, K.height);
    // Plane z = 12 seen from both views; a lateral baseline keeps target depths equal.
    const DepthMap depth(K.width, K.height, 12.0f);
    const Pose a_to_b = Pose::from_translation({0.55, -0.1, 0});
    const WarpResult to_b = warp_image(original, depth, K, a_to_b.inverse());
    const WarpResult back = warp_image(to_b.warped, depth, K, a_to_b);
    double sum = 0.0;
    std::size_t n = 0;
    for (int v = 0; v < K.height; ++v)
        for (int u = 0; u < K.width; ++u) {
            if (!back.validity(u, v)) continue;
            const Pixel s = back.source_coords(u, v);
            // Only pixels whose bilinear footprint saw valid data in the first warp.
            bool ok = true;
            for (int dv = 0; dv <= 1; ++dv)
                for (int du = 0; du <= 1; ++du) {
                    const int uu = std::min(static_cast<int>(std::floor(s.u)) + du, K.width - 1);
                    const int vv = std::min(static_cast<int>(std::floor(s.v)) + dv, K.height - 1);
                    ok = ok && to_b.validity(uu, vv);
                }
            if (!ok) continue;
            sum += (back.warped(u, v) - original(u, v)).abs().cast<double>().mean();
            ++n;
        }
    ASSERT_GT(n, 100000u);
    EXPECT_LT(sum / double(n), 2.0 / 255.0);
}

WarpResult all_valid(const Image& warped) {
    return {warped, Mask(warped.width(), warped.height(), 1), Raster<Pixel>(warped.width(), warped.height())};
}

TEST(TemporalAlignmentLoss, Examples) {
    const Image target(4, 4, Rgb::Constant(0.25f));
    const Raster<float> ones(4, 4, 1.0f);
    EXPECT_EQ(temporal_alignment_loss(target, all_valid(target), ones), 0.0);
    EXPECT_DOUBLE_EQ(temporal_alignment_loss(target, all_valid(Image(4, 4, Rgb::Constant(0.75f))), ones), 0.5);
}

TEST(TemporalAlignmentLoss, MaskedHalfUsesRemainingPixels) {
    Image target(2, 2, Rgb::Zero()), warped(2, 2, Rgb::Zero());
    warped(0, 0) = Rgb::Constant(0.8f);  // masked out
    warped(0, 1) = Rgb::Constant(0.6f);  // masked out
    warped(1, 0) = Rgb(0.3f, 0.0f, 0.0f);
    warped(1, 1) = Rgb::Constant(0.2f);
    Raster<float> m(2, 2, 1.0f);
    m(0, 0) = m(0, 1) = 0.0f;
    // Right column: (0.1 + 0.2) / 2.
    EXPECT_NEAR(temporal_alignment_loss(target, all_valid(warped), m), 0.15, 1e-7);
}

TEST(TemporalAlignmentLoss, EmptySupportAndNonNegativity) {
    const Image target = random_image(8, 8, 1), warped = random_image(8, 8, 2);
    EXPECT_THROW(temporal_alignment_loss(target, all_valid(warped), Raster<float>(8, 8, 0.0f)), EmptySupport);
    WarpResult none = all_valid(warped);
    none.validity = Mask(8, 8, 0);
    EXPECT_THROW(temporal_alignment_loss(target, none, Raster<float>(8, 8, 1.0f)), EmptySupport);
    EXPECT_GT(temporal_alignment_loss(target, all_valid(warped), Raster<float>(8, 8, 1.0f)), 0.0);
}

TEST(WeightMask, ValidityTimesOneMinusInconsistency) {
    Mask valid(3, 1, 1);
    valid(2, 0) = 0;
    Raster<float> rho(3, 1, 0.25f);
    rho(1, 0) = 2.0f;
    const Raster<float> m = weight_mask(valid, &rho);
    EXPECT_FLOAT_EQ(m(0, 0), 0.75f);
    EXPECT_FLOAT_EQ(m(1, 0), 0.0f);
    EXPECT_FLOAT_EQ(m(2, 0), 0.0f);
    EXPECT_FLOAT_EQ(weight_mask(valid)(0, 0), 1.0f);
}

TEST(DepthReconstructionLoss, ConversionAndSupport) {
    const CameraIntrinsics K = tiny_camera(5, 5);
    DepthMap dist(5, 5), depth(5, 5);
    for (int v = 0; v < 5; ++v)
        for (int u = 0; u < 5; ++u) {
            dist(u, v) = 10.0f + u;
            depth(u, v) = static_cast<float>(distance_to_planar_depth(K, {double(u), double(v)}, dist(u, v)));
        }
    EXPECT_NEAR(depth_reconstruction_loss(dist, depth, K).value, 0.0, 1e-5);

    // Principal point pixel only: conversion factor 1.
    DepthMap d1(5, 5, kInvalidDepth), r1(5, 5, kInvalidDepth);
    r1(2, 2) = 9.0f;
    d1(2, 2) = 7.5f;
    const SupportedLoss one = depth_reconstruction_loss(r1, d1, K);
    EXPECT_EQ(one.support, 1u);
    EXPECT_DOUBLE_EQ(one.value, 1.5);

    EXPECT_THROW(depth_reconstruction_loss(DepthMap(5, 5, kInvalidDepth), depth, K), EmptySupport);
    EXPECT_THROW(depth_reconstruction_loss(DepthMap(4, 5, 1.0f), DepthMap(4, 5, 1.0f), K), InvalidArgument);
}

TEST(DepthReconstructionLoss, RenderedWallWithinOneBin) {
    const CameraIntrinsics K{40.0, 40.0, 31.5, 15.5, 64, 32};
    const double d = 9.0;
    const AnalyticField wall = testing::wall_field(d);
    RaySampling s;
    s.near = 0.5;
    s.far = 40.0;
    s.num_samples = 128;
    const RenderedImage img = render_image(wall, K, Pose::identity(), s);
    const DepthMap planar(64, 32, static_cast<float>(d));
    EXPECT_LT(depth_reconstruction_loss(img.distance, planar, K).value, s.bin_length());
}

TEST(Ssim, SelfSimilarityAndConstants) {
    const Image a = random_image(12, 10, 5);
    const Raster<double> self = ssim(a, a);
    for (double s : self.values()) EXPECT_NEAR(s, 1.0, 1e-12);
    const Raster<double> zero_one = ssim(Image(6, 6, Rgb::Zero()), Image(6, 6, Rgb::Ones()));
    for (double s : zero_one.values()) EXPECT_NEAR(s, kC1 / (1.0 + kC1), 1e-12);
    EXPECT_NEAR(kC1 / (1.0 + kC1), 9.999e-5, 1e-8);
}

TEST(Ssim, SymmetricAndBounded) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Image a = random_image(16, 9, seed), b = random_image(16, 9, seed + 100);
        const Raster<double> ab = ssim(a, b), ba = ssim(b, a);
        for (std::size_t i = 0; i < ab.size(); ++i) {
            EXPECT_NEAR(ab[i], ba[i], 1e-12);
            EXPECT_GE(ab[i], -1.0);
            EXPECT_LE(ab[i], 1.0);
        }
    }
    EXPECT_THROW(ssim(Image(3, 3), Image(3, 4)), InvalidArgument);
}

TEST(RgbReconstructionLoss, Examples) {
    const std::vector<Image> a{random_image(8, 8, 1), random_image(8, 8, 2)};
    EXPECT_NEAR(rgb_reconstruction_loss(a, a), 0.0, 1e-12);

    const std::vector<Image> zeros{Image(8, 8, Rgb::Zero())}, ones{Image(8, 8, Rgb::Ones())};
    const double expected = 0.85 * (1.0 - kC1 / (1.0 + kC1)) / 2.0 + 0.15;
    EXPECT_NEAR(rgb_reconstruction_loss(zeros, ones), expected, 1e-12);
    EXPECT_NEAR(rgb_reconstruction_loss(zeros, ones), 0.57496, 1e-5);

    LossWeights l1;
    l1.beta1 = 0.0;
    l1.beta2 = 1.0;
    const std::vector<Image> b{random_image(8, 8, 3), random_image(8, 8, 4)};
    double manual = 0.0;
    for (int k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < a[k].size(); ++i) manual += (a[k][i].cast<double>() - b[k][i].cast<double>()).abs().mean();
    EXPECT_NEAR(rgb_reconstruction_loss(a, b, l1), manual / 128.0, 1e-12);
}

TEST(RgbReconstructionLoss, Errors) {
    EXPECT_THROW(rgb_reconstruction_loss({}, {}), EmptySupport);
    const std::vector<Image> a{Image(4, 4)}, b{Image(4, 4), Image(4, 4)}, c{Image(5, 4)};
    EXPECT_THROW(rgb_reconstruction_loss(a, b), InvalidArgument);
    EXPECT_THROW(rgb_reconstruction_loss(a, c), InvalidArgument);
    LossWeights bad;
    bad.beta1 = -1.0;
    EXPECT_THROW(rgb_reconstruction_loss(a, a, bad), InvalidArgument);
}

TEST(TotalLoss, Examples) {
    const LossWeights w;
    EXPECT_EQ(total_loss(0, 0, 0, w), 0.0);
    EXPECT_DOUBLE_EQ(total_loss(0.5, 0.2, 0.3, w), 1.0);
    LossWeights temporal_only;
    temporal_only.lambda2 = 0.0;
    EXPECT_DOUBLE_EQ(total_loss(0.5, 7.0, 9.0, temporal_only), 0.5);
    EXPECT_THROW(total_loss(std::nan(""), 0, 0, w), NumericFailure);
}

TEST(TotalLoss, LinearInEachComponent) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int t = 0; t < 100; ++t) {
        LossWeights w;
        w.lambda1 = u(rng);
        w.lambda2 = u(rng);
        const double a = u(rng), b = u(rng), c = u(rng), k = u(rng);
        EXPECT_NEAR(total_loss(a + k, b, c, w) - total_loss(a, b, c, w), w.lambda1 * k, 1e-12);
        EXPECT_NEAR(total_loss(a, b + k, c, w) - total_loss(a, b, c, w), w.lambda2 * k, 1e-12);
        EXPECT_NEAR(total_loss(a, b, c + k, w) - total_loss(a, b, c, w), w.lambda2 * k, 1e-12);
    }
}

}  // namespace
}  // namespace occ
