// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>

#include "occ/geometry.hpp"
#include "occ/raster.hpp"

namespace occ {

struct WarpResult {
    Image warped;
    Mask validity;
    /// Continuous source-image coordinates each target pixel sampled from.
    Raster<Pixel> source_coords;
};

/// Bilinear sample at continuous (u, v). Requires 0 <= u <= W-1 and 0 <= v <= H-1.
Rgb bilinear_sample(const Image& image, double u, double v);

/// Synthesizes the target view from `source`: for each target pixel with a
/// valid depth, p = D(x) K^-1 x~, p' = T p, x' = project(K, p'), and the output
/// is the bilinear sample of `source` at x'. Pixels are invalid when p'.z <= 0
/// or x' leaves [0, W-1] x [0, H-1]. T maps target-camera coordinates into
/// source-camera coordinates.
WarpResult warp_image(const Image& source, const DepthMap& target_depth, const CameraIntrinsics& K,
                      const Pose& target_to_source);

/// M(x) = validity(x) * (1 - rho(x)) with rho clamped to [0, 1]; rho defaults to 0.
Raster<float> weight_mask(const Mask& validity, const Raster<float>* inconsistency = nullptr);

/// (1/N) sum_x M(x) |I_t(x) - I_warp(x)|, channel-averaged, with N the
/// number of valid pixels having M > 0. Throws EmptySupport when N = 0.
double temporal_alignment_loss(const Image& target, const WarpResult& warp, const Raster<float>& mask);

struct SupportedLoss {
    double value = 0.0;
    std::size_t support = 0;
};

/// Mean |D_r(x) / ||K^-1 x~|| - D(x)| over pixels valid in both maps.
/// D_r holds rendered ray distances; NaN marks unrendered pixels.
SupportedLoss depth_reconstruction_loss(const DepthMap& rendered_distance, const DepthMap& predicted_depth,
                                        const CameraIntrinsics& K);

/// Windowed SSIM with a 3x3 mean filter (reflection padding),
/// C1 = 0.01^2, C2 = 0.03^2, averaged over channels.
Raster<double> ssim(const Image& a, const Image& b);

struct LossWeights {
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double beta1 = 0.85;
    double beta2 = 0.15;

    void validate() const;
};

/// beta1 * mean((1 - SSIM) / 2) + beta2 * mean |I - I_r| over a stack of
/// patch pairs. Throws EmptySupport on an empty stack.
double rgb_reconstruction_loss(std::span<const Image> reference, std::span<const Image> rendered,
                               const LossWeights& weights = {});

/// lambda1 L_ta + lambda2 (L_d + L_rgb). Throws NumericFailure on NaN input.
double total_loss(double temporal, double depth_consistency, double rgb_consistency, const LossWeights& weights);

}  // namespace occ
