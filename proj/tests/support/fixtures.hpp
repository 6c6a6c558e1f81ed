// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "occ/density_field.hpp"
#include "occ/geometry.hpp"
#include "occ/patch_sampler.hpp"
#include "occ/raster.hpp"

namespace occ::testing {

inline std::filesystem::path fixture_path(const std::string& name) { return std::filesystem::path(OCC_FIXTURE_DIR) / name; }

/// 640 x 192 pinhole camera with a KITTI-like focal length.
inline CameraIntrinsics street_camera() { return {370.0, 370.0, 320.0, 96.0, 640, 192}; }

inline CameraIntrinsics small_camera() { return {100.0, 100.0, 320.0, 96.0, 640, 192}; }

/// Instance layout on a 640 x 192 image: four uniform regions, three cars, one pedestrian.
inline std::vector<InstanceMeta> street_instances() {
    return {
        {{320, 160}, 32, 320, 40960, "road"},
        {{320, 20}, 20, 320, 25600, "sky"},
        {{100, 70}, 40, 100, 16000, "building"},
        {{540, 80}, 40, 100, 12000, "vegetation"},
        {{200, 120}, 20, 45, 2800, "car"},
        {{430, 115}, 15, 30, 1400, "car"},
        {{560, 110}, 30, 8, 600, "pedestrian"},
        {{330, 100}, 6, 12, 200, "car"},
    };
}

/// Random Gaussian-category instances whose boxes stay at least `margin`
/// pixels away from the image border.
inline std::vector<InstanceMeta> random_instances(std::mt19937_64& rng, int width, int height, int count,
                                                  double margin = 0.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const char* cats[] = {"car", "pedestrian", "road", "building", "sky", "vegetation"};
    std::vector<InstanceMeta> out;
    for (int i = 0; i < count; ++i) {
        InstanceMeta m;
        m.category = cats[static_cast<std::size_t>(unit(rng) * 6.0) % 6];
        m.half_height = 4.0 + unit(rng) * (height / 4.0 - 4.0);
        m.half_width = 4.0 + unit(rng) * (width / 6.0 - 4.0);
        const double umin = m.half_width + margin, umax = width - 1 - m.half_width - margin;
        const double vmin = m.half_height + margin, vmax = height - 1 - m.half_height - margin;
        m.center = {umin + unit(rng) * std::max(0.0, umax - umin), vmin + unit(rng) * std::max(0.0, vmax - vmin)};
        m.area = 2.0 + unit(rng) * 4.0 * m.half_height * m.half_width;
        out.push_back(m);
    }
    return out;
}

/// Opaque slab whose front face is the plane z = depth (camera at the origin looking +z).
inline AnalyticField wall_field(double depth, double density = kHardSurfaceDensity,
                                Color color = Color(0.6, 0.5, 0.4)) {
    return AnalyticField({Primitive{BoxShape{Vec3(0, 0, depth + 5.0), Vec3(1000, 1000, 5.0)}, density, color}});
}

inline Image random_image(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> unit(0.0f, 1.0f);
    Image img(w, h);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = Rgb(unit(rng), unit(rng), unit(rng));
    return img;
}

/// Smooth image: low-frequency sinusoids per channel.
inline Image smooth_image(int w, int h) {
    Image img(w, h);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
            img(u, v) = Rgb(0.5f + 0.4f * std::sin(u * 0.05f), 0.5f + 0.4f * std::cos(v * 0.07f),
                            0.5f + 0.3f * std::sin((u + v) * 0.03f));
    return img;
}

}  // namespace occ::testing
