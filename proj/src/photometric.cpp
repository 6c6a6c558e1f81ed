// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#include "occ/photometric.hpp"

#include <algorithm>
#include <cmath>

#include "occ/error.hpp"

namespace occ {

namespace {

// Absorbs round-off from the reprojection chain so identity warps land on the grid.
double snap(double x) {
    const double r = std::round(x);
    return std::abs(x - r) < 1e-9 ? r : x;
}

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

int reflect(int i, int n) {
    if (n == 1) return 0;
    if (i < 0) return -i;
    if (i >= n) return 2 * (n - 1) - i;
    return i;
}

}  // namespace

Rgb bilinear_sample(const Image& image, double u, double v) {
    const int u0 = std::min(static_cast<int>(std::floor(u)), image.width() - 1);
    const int v0 = std::min(static_cast<int>(std::floor(v)), image.height() - 1);
    const double fu = u - u0;
    const double fv = v - v0;
    const int u1 = std::min(u0 + 1, image.width() - 1);
    const int v1 = std::min(v0 + 1, image.height() - 1);
    const auto px = [&](int a, int b) { return image(a, b).cast<double>(); };
    Eigen::Array3d top = px(u0, v0);
    Eigen::Array3d bottom = px(u0, v1);
    if (fu != 0.0) {
        top = (1.0 - fu) * top + fu * px(u1, v0);
        bottom = (1.0 - fu) * bottom + fu * px(u1, v1);
    }
    if (fv == 0.0) return top.cast<float>();
    return ((1.0 - fv) * top + fv * bottom).cast<float>();
}

WarpResult warp_image(const Image& source, const DepthMap& target_depth, const CameraIntrinsics& K,
                      const Pose& target_to_source) {
    require(source.same_shape(target_depth), "warp_image: depth and image sizes differ");
    require(source.same_shape(K.width, K.height), "warp_image: intrinsics do not match the image size");
    const int w = source.width();
    const int h = source.height();
    WarpResult out{Image(w, h, Rgb::Zero()), Mask(w, h, 0),
                   Raster<Pixel>(w, h, Pixel{std::nan(""), std::nan("")})};
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            const float d = target_depth(u, v);
            if (!is_valid_depth(d)) continue;
            const Vec3 p = backproject(K, {double(u), double(v)}, d);
            const Vec3 q = target_to_source.apply(p);
            if (!(q.z() > 0.0)) continue;
            const Pixel x = project(K, q);
            const double su = snap(x.u);
            const double sv = snap(x.v);
            out.source_coords(u, v) = {su, sv};
            if (!(su >= 0.0 && sv >= 0.0 && su <= w - 1 && sv <= h - 1)) continue;
            out.warped(u, v) = bilinear_sample(source, su, sv);
            out.validity(u, v) = 1;
        }
    return out;
}

Raster<float> weight_mask(const Mask& validity, const Raster<float>* inconsistency) {
    if (inconsistency) require(inconsistency->same_shape(validity), "weight_mask: size mismatch");
    Raster<float> m(validity.width(), validity.height(), 0.0f);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!validity[i]) continue;
        const float rho = inconsistency ? std::clamp((*inconsistency)[i], 0.0f, 1.0f) : 0.0f;
        m[i] = 1.0f - rho;
    }
    return m;
}

double temporal_alignment_loss(const Image& target, const WarpResult& warp, const Raster<float>& mask) {
    require(target.same_shape(warp.warped) && target.same_shape(mask) && target.same_shape(warp.validity),
            "temporal_alignment_loss: size mismatch");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (!warp.validity[i] || !(mask[i] > 0.0f)) continue;
        const double diff = (target[i].cast<double>() - warp.warped[i].cast<double>()).abs().mean();
        sum += double(mask[i]) * diff;
        ++n;
    }
    if (n == 0) throw EmptySupport("temporal_alignment_loss: no valid pixels");
    return sum / double(n);
}

SupportedLoss depth_reconstruction_loss(const DepthMap& rendered_distance, const DepthMap& predicted_depth,
                                        const CameraIntrinsics& K) {
    require(rendered_distance.same_shape(predicted_depth), "depth_reconstruction_loss: size mismatch");
    require(rendered_distance.same_shape(K.width, K.height),
            "depth_reconstruction_loss: intrinsics do not match the raster size");
    SupportedLoss out;
    double sum = 0.0;
    for (int v = 0; v < rendered_distance.height(); ++v)
        for (int u = 0; u < rendered_distance.width(); ++u) {
            const float r = rendered_distance(u, v);
            const float d = predicted_depth(u, v);
            if (!std::isfinite(r) || r < 0.0f || !is_valid_depth(d)) continue;
            sum += std::abs(distance_to_planar_depth(K, {double(u), double(v)}, r) - double(d));
            ++out.support;
        }
    if (out.support == 0) throw EmptySupport("depth_reconstruction_loss: no pixel valid in both maps");
    out.value = sum / double(out.support);
    return out;
}

Raster<double> ssim(const Image& a, const Image& b) {
    require(a.same_shape(b), "ssim: size mismatch");
    const int w = a.width();
    const int h = a.height();
    Raster<double> out(w, h, 0.0);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            Eigen::Array3d mx = Eigen::Array3d::Zero(), my = Eigen::Array3d::Zero();
            Eigen::Array3d sxx = Eigen::Array3d::Zero(), syy = Eigen::Array3d::Zero(), sxy = Eigen::Array3d::Zero();
            for (int dv = -1; dv <= 1; ++dv)
                for (int du = -1; du <= 1; ++du) {
                    const int uu = reflect(u + du, w);
                    const int vv = reflect(v + dv, h);
                    const Eigen::Array3d x = a(uu, vv).cast<double>();
                    const Eigen::Array3d y = b(uu, vv).cast<double>();
                    mx += x;
                    my += y;
                    sxx += x * x;
                    syy += y * y;
                    sxy += x * y;
                }
            mx /= 9.0;
            my /= 9.0;
            // No clamping: identical windows then give num == den bit for bit, and C2
            // keeps the denominator positive despite round-off.
            const Eigen::Array3d vx = sxx / 9.0 - mx * mx;
            const Eigen::Array3d vy = syy / 9.0 - my * my;
            const Eigen::Array3d cxy = sxy / 9.0 - mx * my;
            const Eigen::Array3d num = (2.0 * mx * my + kC1) * (2.0 * cxy + kC2);
            const Eigen::Array3d den = (mx * mx + my * my + kC1) * (vx + vy + kC2);
            out(u, v) = std::clamp((num / den).mean(), -1.0, 1.0);
        }
    return out;
}

void LossWeights::validate() const {
    require(lambda1 >= 0.0 && lambda2 >= 0.0 && beta1 >= 0.0 && beta2 >= 0.0,
            "loss weights must be non-negative");
}

double rgb_reconstruction_loss(std::span<const Image> reference, std::span<const Image> rendered,
                               const LossWeights& weights) {
    weights.validate();
    require(reference.size() == rendered.size(), "rgb_reconstruction_loss: stacks differ in length");
    if (reference.empty()) throw EmptySupport("rgb_reconstruction_loss: empty patch stack");
    double dssim = 0.0, l1 = 0.0;
    std::size_t pixels = 0;
    for (std::size_t k = 0; k < reference.size(); ++k) {
        require(reference[k].same_shape(rendered[k]), "rgb_reconstruction_loss: patch size mismatch");
        const Raster<double> s = ssim(reference[k], rendered[k]);
        for (std::size_t i = 0; i < s.size(); ++i) {
            dssim += (1.0 - s[i]) / 2.0;
            l1 += (reference[k][i].cast<double>() - rendered[k][i].cast<double>()).abs().mean();
        }
        pixels += s.size();
    }
    return weights.beta1 * dssim / double(pixels) + weights.beta2 * l1 / double(pixels);
}

double total_loss(double temporal, double depth_consistency, double rgb_consistency, const LossWeights& weights) {
    weights.validate();
    if (std::isnan(temporal) || std::isnan(depth_consistency) || std::isnan(rgb_consistency))
        throw NumericFailure("total_loss: NaN component");
    return weights.lambda1 * temporal + weights.lambda2 * (depth_consistency + rgb_consistency);
}

}  // namespace occ
