// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "occ/depth_align.hpp"
#include "occ/occupancy_eval.hpp"
#include "occ/photometric.hpp"
#include "occ/volume_render.hpp"

namespace occ::cli {

struct SamplerConfig {
    std::size_t num_patches = 64;
    int patch_size = 8;
    double gamma = 0.3;
    std::size_t max_attempts = 10000;
    /// Runs per bench-sampler invocation.
    std::size_t runs = 1000;
};

struct RenderConfig {
    double near = 0.5;
    double far = 80.0;
    int num_samples = 64;
    SampleMode mode = SampleMode::Uniform;
    bool expected_depth = false;
    /// When set, the analytic scene is baked into a GridField of this
    /// resolution and the grid is rendered instead.
    std::optional<std::array<int, 3>> grid_resolution;
    /// World-frame extent of the baked grid.
    Aabb grid_bounds{Vec3(-20.0, -10.0, 0.0), Vec3(20.0, 10.0, 80.0)};
};

struct AlignConfig {
    FitOptions fit;
    int target_stride = 1;
};

struct EvalConfig {
    EvalCuboid cuboid;
    double tau = 0.5;
    double depth_cap = 80.0;
    DepthScaling scaling = DepthScaling::None;
    double band = 4.0;
};

struct RunConfig {
    std::uint64_t seed = 0;
    unsigned threads = 1;
    SamplerConfig sampler;
    RenderConfig render;
    LossWeights loss;
    AlignConfig align;
    EvalConfig eval;

    /// Checks every parameter against its consumer's preconditions.
    void validate() const;

    RaySampling ray_sampling() const;
};

/// Missing fields keep their defaults; unknown fields are rejected.
RunConfig config_from_json(const nlohmann::json& j, const std::string& source = "config");
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace occ::cli
