// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "occ/density_field.hpp"
#include "occ/geometry.hpp"
#include "occ/raster.hpp"

namespace occ {

enum class SampleMode { Uniform, Stratified };

/// Sample placement along a ray. Bin i covers [near + i*h, near + (i+1)*h)
/// with h = (far - near) / M; uniform mode takes the left edge of each bin,
/// stratified mode a seeded uniform jitter inside it.
struct RaySampling {
    double near = 0.5;
    double far = 80.0;
    int num_samples = 64;
    SampleMode mode = SampleMode::Uniform;
    std::uint64_t seed = 0;
    /// Divide the rendered distance by the accumulated weight (when > 1e-6).
    bool expected_depth = false;

    void validate() const;
    double bin_length() const noexcept { return (far - near) / num_samples; }
};

struct RenderResult {
    Color rgb = Color::Zero();
    double distance = 0.0;
    double transmittance_final = 1.0;
    std::vector<double> weights;
    std::vector<double> sample_distances;
};

/// 1 - exp(-sigma * delta). Throws InvalidArgument on negative input.
double alpha_from_sigma(double sigma, double delta);

/// Sample distances t_1 < ... < t_M for one ray. `ray_key` selects the
/// stratification sub-stream so results do not depend on batching.
std::vector<double> sample_distances(const RaySampling& sampling, std::uint64_t ray_key = 0);

/// Discrete volume rendering quadrature:
///   rgb = sum_i T_i a_i c_i,  distance = sum_i T_i a_i t_i,
/// with a_i = 1 - exp(-sigma_i (t_{i+1} - t_i)), T_1 = 1, and the last
/// segment closed at `far`.
RenderResult render_ray(const DensityField& field, const Ray& ray, const RaySampling& sampling,
                        std::uint64_t ray_key = 0);

struct RenderedPatch {
    int u0 = 0;
    int v0 = 0;
    int size = 0;
    Image rgb;
    DepthMap distance;
};

/// Top-left pixel of the l x l patch centered on `anchor`.
/// For even l the patch spans [anchor - l/2, anchor + l/2 - 1].
inline int patch_origin(double anchor, int l) { return static_cast<int>(std::floor(anchor - l / 2.0 + 0.5)); }

/// Renders every pixel of the l x l patch around `anchor` through the
/// camera at `pose`. Ray keys are linear pixel indices, so a pixel renders
/// identically regardless of which patch or thread produced it.
RenderedPatch render_patch(const DensityField& field, const CameraIntrinsics& K, const Pose& pose,
                           const Pixel& anchor, int patch_size, const RaySampling& sampling,
                           unsigned parallelism = 1);

struct RenderedImage {
    Image rgb;
    DepthMap distance;
    Raster<float> transmittance;
};

/// Full-frame render.
RenderedImage render_image(const DensityField& field, const CameraIntrinsics& K, const Pose& pose,
                           const RaySampling& sampling, unsigned parallelism = 1);

}  // namespace occ
