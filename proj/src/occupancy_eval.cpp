// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#include "occ/occupancy_eval.hpp"

#include <algorithm>
#include <cmath>

#include "occ/error.hpp"
#include "occ/parallel.hpp"

namespace occ {

void EvalCuboid::validate() const {
    require((max.array() > min.array()).all(), "eval cuboid: ranges must be non-degenerate");
    for (int n : resolution) require(n >= 2, "eval cuboid: resolution must be >= 2 per axis");
}

Vec3 EvalCuboid::voxel_size() const {
    return (max - min).cwiseQuotient(Vec3(resolution[0], resolution[1], resolution[2]));
}

std::array<int, 3> EvalCuboid::coords(std::size_t index) const {
    const auto nx = static_cast<std::size_t>(resolution[0]);
    const auto ny = static_cast<std::size_t>(resolution[1]);
    return {static_cast<int>(index % nx), static_cast<int>((index / nx) % ny), static_cast<int>(index / (nx * ny))};
}

Vec3 EvalCuboid::voxel_center(int i, int j, int k) const {
    return min + (Vec3(i, j, k).array() + 0.5).matrix().cwiseProduct(voxel_size());
}

Vec3 EvalCuboid::voxel_center(std::size_t index) const {
    const auto c = coords(index);
    return voxel_center(c[0], c[1], c[2]);
}

std::size_t VoxelGrid::occupied_count() const {
    return static_cast<std::size_t>(std::count(occupancy.begin(), occupancy.end(), 1));
}

VoxelGrid voxelize_prediction(const DensityField& field, const EvalCuboid& cuboid, const Camera& camera,
                              double tau, unsigned parallelism) {
    cuboid.validate();
    require(tau > 0.0 && tau < 1.0, "voxelize_prediction: tau must lie in (0, 1)");
    VoxelGrid grid(cuboid);
    const double diag = cuboid.voxel_diagonal();
    parallel_for(cuboid.voxel_count(), parallelism, [&](std::size_t idx) {
        const Vec3 world = camera.pose.apply(cuboid.voxel_center(idx));
        const double score = -std::expm1(-field.sigma_at(world) * diag);
        grid.occupancy[idx] = score > tau ? 1 : 0;
    });
    return grid;
}

Sweep colocated_voxel_sweep(const EvalCuboid& cuboid, const Camera& camera) {
    cuboid.validate();
    Sweep sweep;
    sweep.pose = camera.pose;
    sweep.directions.reserve(cuboid.voxel_count());
    for (std::size_t idx = 0; idx < cuboid.voxel_count(); ++idx)
        sweep.directions.push_back(cuboid.voxel_center(idx).normalized());
    return sweep;
}

void traverse_voxels(const EvalCuboid& cuboid, const Ray& ray, double t_begin, double t_end,
                     const std::function<void(std::size_t, double)>& visit) {
    // Clip the segment to the cuboid (slab test).
    double t0 = t_begin;
    double t1 = t_end;
    for (int a = 0; a < 3; ++a) {
        const double d = ray.direction[a];
        const double o = ray.origin[a];
        if (d == 0.0) {
            if (o < cuboid.min[a] || o >= cuboid.max[a]) return;
            continue;
        }
        double ta = (cuboid.min[a] - o) / d;
        double tb = (cuboid.max[a] - o) / d;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    if (!(t0 < t1)) return;

    const Vec3 size = cuboid.voxel_size();
    std::array<int, 3> cell{}, step{};
    std::array<double, 3> t_next{}, t_delta{};
    const Vec3 entry = ray.at(t0);
    for (int a = 0; a < 3; ++a) {
        const int n = cuboid.resolution[a];
        cell[a] = std::clamp(static_cast<int>(std::floor((entry[a] - cuboid.min[a]) / size[a])), 0, n - 1);
        const double d = ray.direction[a];
        if (d > 0.0) {
            step[a] = 1;
            t_next[a] = (cuboid.min[a] + (cell[a] + 1) * size[a] - ray.origin[a]) / d;
            t_delta[a] = size[a] / d;
        } else if (d < 0.0) {
            step[a] = -1;
            t_next[a] = (cuboid.min[a] + cell[a] * size[a] - ray.origin[a]) / d;
            t_delta[a] = -size[a] / d;
        } else {
            step[a] = 0;
            t_next[a] = std::numeric_limits<double>::infinity();
            t_delta[a] = std::numeric_limits<double>::infinity();
        }
    }

    double t_enter = t0;
    while (t_enter < t1) {
        visit(cuboid.index(cell[0], cell[1], cell[2]), t_enter);
        int axis = 0;
        if (t_next[1] < t_next[axis]) axis = 1;
        if (t_next[2] < t_next[axis]) axis = 2;
        t_enter = t_next[axis];
        cell[axis] += step[axis];
        if (cell[axis] < 0 || cell[axis] >= cuboid.resolution[axis]) break;
        t_next[axis] += t_delta[axis];
    }
}

VoxelGrid carve_ground_truth(const AnalyticField& scene, std::span<const Sweep> sweeps, const EvalCuboid& cuboid,
                             const Camera& eval_camera) {
    cuboid.validate();
    require(!sweeps.empty(), "carve_ground_truth: at least one sweep is required");
    VoxelGrid grid(cuboid);
    std::fill(grid.occupancy.begin(), grid.occupancy.end(), 1);
    const Pose world_to_camera = eval_camera.pose.inverse();
    constexpr double kHitTolerance = 1e-9;

    for (const auto& sweep : sweeps) {
        for (const auto& dir : sweep.directions) {
            const Vec3 d_world = (sweep.pose.rotation * dir).normalized();
            const Ray world_ray{sweep.pose.translation, d_world};
            const auto hit = analytic_first_hit(scene, world_ray);
            const double t_hit = hit ? *hit : std::numeric_limits<double>::infinity();
            const double t_stop = std::min(t_hit, sweep.max_range);
            if (!(t_stop > 0.0)) continue;
            const Ray cam_ray{world_to_camera.apply(world_ray.origin), world_to_camera.rotation * d_world};
            const double limit = std::isfinite(t_stop) ? t_stop - kHitTolerance : t_stop;
            traverse_voxels(cuboid, cam_ray, 0.0, limit, [&](std::size_t idx, double) { grid.occupancy[idx] = 0; });
        }
    }
    return grid;
}

void visibility_partition(VoxelGrid& grid, const CameraIntrinsics& K, const DepthMap& gt_depth) {
    require(gt_depth.same_shape(K.width, K.height), "visibility_partition: depth map does not match intrinsics");
    const double half_diag = 0.5 * grid.cuboid.voxel_diagonal();
    for (std::size_t idx = 0; idx < grid.cuboid.voxel_count(); ++idx) {
        const Vec3 p = grid.cuboid.voxel_center(idx);
        grid.visibility[idx] = 0;
        if (!(p.z() > 0.0)) continue;
        const Pixel x = project(K, p);
        const int u = static_cast<int>(std::lround(x.u));
        const int v = static_cast<int>(std::lround(x.v));
        if (!gt_depth.contains(u, v)) continue;
        const float d = gt_depth(u, v);
        if (!is_valid_depth(d)) {
            grid.visibility[idx] = 1;
            continue;
        }
        const double surface = double(d) * pixel_ray_norm(K, x);
        grid.visibility[idx] = p.norm() <= surface + half_diag ? 1 : 0;
    }
}

OccupancyMetrics occupancy_metrics(const VoxelGrid& pred, const VoxelGrid& gt, const std::vector<std::uint8_t>* mask) {
    require(pred.occupancy.size() == gt.occupancy.size() && pred.cuboid.resolution == gt.cuboid.resolution &&
                pred.cuboid.min == gt.cuboid.min && pred.cuboid.max == gt.cuboid.max,
            "occupancy_metrics: cuboids differ");
    if (mask) require(mask->size() == gt.occupancy.size(), "occupancy_metrics: mask size mismatch");
    OccupancyMetrics m;
    std::size_t agree = 0, invisible_agree = 0, invisible_hit = 0;
    for (std::size_t i = 0; i < gt.occupancy.size(); ++i) {
        if (mask && !(*mask)[i]) continue;
        ++m.voxels;
        const bool same = pred.occupancy[i] == gt.occupancy[i];
        agree += same;
        if (gt.visibility[i]) continue;
        ++m.invisible;
        invisible_agree += same;
        if (gt.occupancy[i]) {
            ++m.invisible_occupied;
            invisible_hit += pred.occupancy[i] != 0;
        }
    }
    if (m.voxels == 0) throw EmptySupport("occupancy_metrics: no voxels selected");
    m.o_acc = double(agree) / double(m.voxels);
    if (m.invisible) m.ie_acc = double(invisible_agree) / double(m.invisible);
    if (m.invisible_occupied) m.ie_rec = double(invisible_hit) / double(m.invisible_occupied);
    return m;
}

VoxelGrid depth_to_occupancy_band(const DepthMap& depth, const CameraIntrinsics& K, const EvalCuboid& cuboid,
                                  double band) {
    cuboid.validate();
    require(depth.same_shape(K.width, K.height), "depth_to_occupancy_band: depth map does not match intrinsics");
    require(band >= 0.0, "depth_to_occupancy_band: band must be non-negative");
    VoxelGrid grid(cuboid);
    for (std::size_t idx = 0; idx < cuboid.voxel_count(); ++idx) {
        const Vec3 p = cuboid.voxel_center(idx);
        if (!(p.z() > 0.0)) continue;
        const Pixel x = project(K, p);
        const int u = static_cast<int>(std::lround(x.u));
        const int v = static_cast<int>(std::lround(x.v));
        if (!depth.contains(u, v) || !is_valid_depth(depth(u, v))) continue;
        const double surface = double(depth(u, v)) * pixel_ray_norm(K, x);
        const double r = p.norm();
        grid.occupancy[idx] = (r >= surface && r <= surface + band) ? 1 : 0;
    }
    return grid;
}

namespace {

double median(std::vector<double> xs) {
    const std::size_t n = xs.size();
    const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(xs.begin(), mid, xs.end());
    const double upper = *mid;
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(xs.begin(), mid);
    return 0.5 * (lower + upper);
}

}  // namespace

DepthEvalReport depth_metrics(const DepthMap& pred, const DepthMap& gt, double cap, DepthScaling scaling) {
    require(pred.same_shape(gt), "depth_metrics: size mismatch");
    require(cap > 0.0, "depth_metrics: cap must be positive");
    std::vector<double> p, g;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        const float gv = gt[i];
        if (!is_valid_depth(gv) || gv > cap || !is_valid_depth(pred[i])) continue;
        g.push_back(gv);
        p.push_back(pred[i]);
    }
    if (g.empty()) throw EmptySupport("depth_metrics: no overlapping valid pixels");

    DepthEvalReport r;
    r.scaling = scaling;
    r.pixels = g.size();
    if (scaling == DepthScaling::Median) {
        r.scale_factor = median(g) / median(p);
        for (double& x : p) x *= r.scale_factor;
    }
    const double t1 = 1.25, t2 = 1.25 * 1.25, t3 = 1.25 * 1.25 * 1.25;
    double abs_rel = 0, sq_rel = 0, se = 0, sle = 0;
    std::size_t d1 = 0, d2 = 0, d3 = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double diff = p[i] - g[i];
        abs_rel += std::abs(diff) / g[i];
        sq_rel += diff * diff / g[i];
        se += diff * diff;
        const double ld = std::log(p[i]) - std::log(g[i]);
        sle += ld * ld;
        const double ratio = std::max(p[i] / g[i], g[i] / p[i]);
        d1 += ratio < t1;
        d2 += ratio < t2;
        d3 += ratio < t3;
    }
    const double n = double(g.size());
    r.abs_rel = abs_rel / n;
    r.sq_rel = sq_rel / n;
    r.rmse = std::sqrt(se / n);
    r.rmse_log = std::sqrt(sle / n);
    r.delta1 = double(d1) / n;
    r.delta2 = double(d2) / n;
    r.delta3 = double(d3) / n;
    return r;
}

}  // namespace occ
