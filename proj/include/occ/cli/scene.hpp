// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "occ/cli/json_reader.hpp"
#include "occ/density_field.hpp"
#include "occ/geometry.hpp"
#include "occ/occupancy_eval.hpp"
#include "occ/patch_sampler.hpp"

namespace occ::cli {

struct PseudoDepthSpec {
    enum class Mode { Exact, Scaled, Noise };
    Mode mode = Mode::Exact;
    /// Multiplier for Scaled.
    double scale = 1.0;
    /// Noise: pseudo = gt * scale * exp(n), n ~ N(0, relative_std^2) per pixel.
    double relative_std = 0.0;
};

/// Range-sensor sweep used for ground-truth carving.
struct SweepSpec {
    enum class Kind { Colocated, Grid };
    Kind kind = Kind::Colocated;
    /// Sensor-to-world (Grid only).
    Pose pose;
    /// {min, max} in degrees and sample count, per angle (Grid only).
    std::array<double, 2> azimuth_deg{-45.0, 45.0};
    int azimuth_count = 181;
    std::array<double, 2> elevation_deg{-25.0, 5.0};
    int elevation_count = 61;
    double max_range = 120.0;

    /// Expands into a concrete sweep. Sensor frame: x right, y down, z forward.
    Sweep build(const EvalCuboid& cuboid, const Camera& camera) const;
};

struct SceneDescriptor {
    CameraIntrinsics intrinsics;
    /// Evaluation camera, camera-to-world.
    Pose camera_pose;
    /// Auxiliary views (e.g. neighboring frames), camera-to-world.
    std::vector<Pose> aux_poses;
    Color background = Color::Zero();
    std::vector<Primitive> primitives;
    std::vector<InstanceMeta> instances;
    PseudoDepthSpec pseudo_depth;
    std::vector<SweepSpec> sweeps;

    AnalyticField field() const { return AnalyticField(primitives, background); }
    Camera camera() const { return {intrinsics, camera_pose}; }
};

CameraIntrinsics parse_intrinsics(JsonReader reader);
Pose parse_pose(JsonReader reader);
std::vector<InstanceMeta> parse_instances(const JsonReader& reader);

/// `base_dir` resolves an "instances_file" reference.
SceneDescriptor parse_scene(const nlohmann::json& j, const std::string& source,
                            const std::filesystem::path& base_dir = {});
SceneDescriptor load_scene(const std::filesystem::path& path);
std::vector<InstanceMeta> load_instances(const std::filesystem::path& path);

nlohmann::json intrinsics_to_json(const CameraIntrinsics& K);
nlohmann::json pose_to_json(const Pose& pose);
nlohmann::json instances_to_json(std::span<const InstanceMeta> instances);

}  // namespace occ::cli
