// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#include "occ/volume_render.hpp"

#include <cmath>
#include <random>

#include "occ/error.hpp"
#include "occ/parallel.hpp"
#include "occ/rng.hpp"

namespace occ {

void RaySampling::validate() const {
    require(std::isfinite(near) && std::isfinite(far), "ray sampling: near/far must be finite");
    require(near >= 0.0 && near < far, "ray sampling: requires 0 <= near < far");
    require(num_samples >= 2, "ray sampling: requires at least 2 samples");
}

double alpha_from_sigma(double sigma, double delta) {
    require(sigma >= 0.0 && delta >= 0.0, "alpha_from_sigma: sigma and delta must be non-negative");
    return -std::expm1(-sigma * delta);
}

std::vector<double> sample_distances(const RaySampling& sampling, std::uint64_t ray_key) {
    sampling.validate();
    const int m = sampling.num_samples;
    const double h = sampling.bin_length();
    std::vector<double> t(m);
    if (sampling.mode == SampleMode::Uniform) {
        for (int i = 0; i < m; ++i) t[i] = sampling.near + i * h;
        return t;
    }
    Rng rng(derive_seed(sampling.seed, ray_key));
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    for (int i = 0; i < m; ++i) t[i] = sampling.near + (i + jitter(rng)) * h;
    return t;
}

RenderResult render_ray(const DensityField& field, const Ray& ray, const RaySampling& sampling,
                        std::uint64_t ray_key) {
    RenderResult out;
    out.sample_distances = sample_distances(sampling, ray_key);
    const auto& t = out.sample_distances;
    const std::size_t m = t.size();
    out.weights.resize(m);

    double transmittance = 1.0;
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double delta = (i + 1 < m ? t[i + 1] : sampling.far) - t[i];
        const Vec3 p = ray.at(t[i]);
        const double sigma = field.sigma_at(p);
        const double alpha = alpha_from_sigma(sigma, delta);
        const double w = transmittance * alpha;
        out.weights[i] = w;
        if (w > 0.0) {
            out.rgb += w * field.color_at(p);
            out.distance += w * t[i];
            weight_sum += w;
        }
        transmittance *= 1.0 - alpha;
    }
    out.transmittance_final = transmittance;
    if (sampling.expected_depth && weight_sum > 1e-6) out.distance /= weight_sum;
    return out;
}

RenderedPatch render_patch(const DensityField& field, const CameraIntrinsics& K, const Pose& pose,
                           const Pixel& anchor, int patch_size, const RaySampling& sampling,
                           unsigned parallelism) {
    require(patch_size >= 1, "render_patch: patch size must be >= 1");
    sampling.validate();
    RenderedPatch patch;
    patch.size = patch_size;
    patch.u0 = patch_origin(anchor.u, patch_size);
    patch.v0 = patch_origin(anchor.v, patch_size);
    require(patch.u0 >= 0 && patch.v0 >= 0 && patch.u0 + patch_size <= K.width &&
                patch.v0 + patch_size <= K.height,
            "render_patch: patch extends outside the image");
    patch.rgb = Image(patch_size, patch_size, Rgb::Zero());
    patch.distance = DepthMap(patch_size, patch_size, 0.0f);

    const std::size_t count = static_cast<std::size_t>(patch_size) * patch_size;
    parallel_for(count, parallelism, [&](std::size_t i) {
        const int du = static_cast<int>(i % patch_size);
        const int dv = static_cast<int>(i / patch_size);
        const int u = patch.u0 + du;
        const int v = patch.v0 + dv;
        const Ray ray = ray_through_pixel(K, pose, {double(u), double(v)});
        const auto key = static_cast<std::uint64_t>(v) * K.width + u;
        const RenderResult r = render_ray(field, ray, sampling, key);
        patch.rgb(du, dv) = r.rgb.cast<float>();
        patch.distance(du, dv) = static_cast<float>(r.distance);
    });
    return patch;
}

RenderedImage render_image(const DensityField& field, const CameraIntrinsics& K, const Pose& pose,
                           const RaySampling& sampling, unsigned parallelism) {
    K.validate();
    sampling.validate();
    RenderedImage img{Image(K.width, K.height, Rgb::Zero()), DepthMap(K.width, K.height, 0.0f),
                      Raster<float>(K.width, K.height, 1.0f)};
    parallel_for(static_cast<std::size_t>(K.height), parallelism, [&](std::size_t row) {
        const int v = static_cast<int>(row);
        for (int u = 0; u < K.width; ++u) {
            const Ray ray = ray_through_pixel(K, pose, {double(u), double(v)});
            const auto key = static_cast<std::uint64_t>(v) * K.width + u;
            const RenderResult r = render_ray(field, ray, sampling, key);
            img.rgb(u, v) = r.rgb.cast<float>();
            img.distance(u, v) = static_cast<float>(r.distance);
            img.transmittance(u, v) = static_cast<float>(r.transmittance_final);
        }
    });
    return img;
}

}  // namespace occ
