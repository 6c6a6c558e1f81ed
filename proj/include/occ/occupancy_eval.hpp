// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "occ/density_field.hpp"
#include "occ/geometry.hpp"
#include "occ/raster.hpp"

namespace occ {

/// Evaluation volume in the evaluation camera frame (x right, y down, z
/// forward): x in [-4, 4], y in [-1, 0], z in [4, 20] meters by default.
struct EvalCuboid {
    Vec3 min{-4.0, -1.0, 4.0};
    Vec3 max{4.0, 0.0, 20.0};
    std::array<int, 3> resolution{64, 16, 128};

    void validate() const;
    Vec3 voxel_size() const;
    double voxel_diagonal() const { return voxel_size().norm(); }
    std::size_t voxel_count() const {
        return static_cast<std::size_t>(resolution[0]) * resolution[1] * resolution[2];
    }
    /// x fastest, then y, then z.
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * resolution[1] + j) * resolution[0] + i;
    }
    std::array<int, 3> coords(std::size_t index) const;
    Vec3 voxel_center(int i, int j, int k) const;
    Vec3 voxel_center(std::size_t index) const;
};

struct Camera {
    CameraIntrinsics intrinsics;
    /// Camera-to-world.
    Pose pose;
};

struct VoxelGrid {
    EvalCuboid cuboid;
    std::vector<std::uint8_t> occupancy;
    std::vector<std::uint8_t> visibility;

    explicit VoxelGrid(const EvalCuboid& c)
        : cuboid(c), occupancy(c.voxel_count(), 0), visibility(c.voxel_count(), 0) {}

    std::size_t occupied_count() const;
};

/// 1 - exp(-sigma * voxel diagonal) > tau at every voxel center.
/// Throws InvalidArgument unless tau is in (0, 1).
VoxelGrid voxelize_prediction(const DensityField& field, const EvalCuboid& cuboid, const Camera& camera,
                              double tau = 0.5, unsigned parallelism = 1);

/// One range-sensor sweep: rays from the sensor center along `directions`
/// (sensor frame). Rays without a return are free up to `max_range`.
struct Sweep {
    Pose pose;
    std::vector<Vec3> directions;
    double max_range = std::numeric_limits<double>::infinity();
};

/// Directions from the eval camera center toward every voxel center, expressed
/// in the frame of a sensor co-located with the camera.
Sweep colocated_voxel_sweep(const EvalCuboid& cuboid, const Camera& camera);

/// Voxels pierced by the segment ray(t), t in [t_begin, t_end), visited in
/// order with their entry parameter. The ray is in the cuboid frame.
void traverse_voxels(const EvalCuboid& cuboid, const Ray& ray, double t_begin, double t_end,
                     const std::function<void(std::size_t index, double t_enter)>& visit);

/// Space carving: a voxel is free iff some sweep ray enters it strictly
/// before that ray's first analytic hit. Everything else is occupied.
VoxelGrid carve_ground_truth(const AnalyticField& scene, std::span<const Sweep> sweeps, const EvalCuboid& cuboid,
                             const Camera& eval_camera);

/// Fills grid.visibility: a voxel is visible iff its center projects into
/// the image and its distance from the camera is at most the surface
/// distance at that pixel plus half a voxel diagonal. Pixels without a
/// valid depth see to infinity.
void visibility_partition(VoxelGrid& grid, const CameraIntrinsics& K, const DepthMap& gt_depth);

struct OccupancyMetrics {
    double o_acc = 0.0;
    std::optional<double> ie_acc;
    std::optional<double> ie_rec;
    std::size_t voxels = 0;
    std::size_t invisible = 0;
    std::size_t invisible_occupied = 0;
};

/// Metrics against gt, whose visibility defines the invisible set. An
/// optional per-voxel mask restricts every count (object-level variants).
OccupancyMetrics occupancy_metrics(const VoxelGrid& pred, const VoxelGrid& gt,
                                   const std::vector<std::uint8_t>* mask = nullptr);

/// Depth-only baseline: occupied iff the voxel's distance r satisfies
/// d_s <= r <= d_s + band at its projected pixel (d_s = surface distance).
VoxelGrid depth_to_occupancy_band(const DepthMap& depth, const CameraIntrinsics& K, const EvalCuboid& cuboid,
                                  double band = 4.0);

enum class DepthScaling { None, Median };

struct DepthEvalReport {
    double abs_rel = 0.0;
    double sq_rel = 0.0;
    double rmse = 0.0;
    double rmse_log = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
    DepthScaling scaling = DepthScaling::None;
    double scale_factor = 1.0;
    std::size_t pixels = 0;
};

/// Standard monocular depth metrics over pixels with gt in (0, cap] and a
/// valid prediction. Median scaling multiplies predictions by
/// median(gt) / median(pred) first. Throws EmptySupport without overlap.
DepthEvalReport depth_metrics(const DepthMap& pred, const DepthMap& gt, double cap = 80.0,
                              DepthScaling scaling = DepthScaling::None);

}  // namespace occ
