// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#include "occ/cli/scene.hpp"

#include <cmath>
#include <numbers>

#include "occ/io.hpp"

namespace occ::cli {

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

Color color_field(JsonReader& r, const std::string& key, const Color& fallback) {
    if (!r.has(key)) return fallback;
    return r.vec3(key).array();
}

Primitive parse_primitive(JsonReader r) {
    Primitive p;
    const std::string type = r.string("type");
    if (type == "box") {
        BoxShape b;
        b.center = r.vec3("center");
        b.half_extents = r.vec3("half_extents");
        if ((b.half_extents.array() <= 0.0).any()) r.fail("half_extents", "must be positive");
        p.shape = b;
    } else if (type == "sphere") {
        SphereShape s;
        s.center = r.vec3("center");
        s.radius = r.number("radius");
        if (s.radius <= 0.0) r.fail("radius", "must be positive");
        p.shape = s;
    } else if (type == "half_space") {
        HalfSpaceShape h;
        h.normal = r.vec3("normal");
        if (h.normal.norm() == 0.0) r.fail("normal", "must be non-zero");
        h.offset = r.number("offset");
        // Express the plane with a unit normal.
        const double n = h.normal.norm();
        h.normal /= n;
        h.offset /= n;
        p.shape = h;
    } else {
        r.fail("type", "expected \"box\", \"sphere\" or \"half_space\", got \"" + type + "\"");
    }
    p.density = r.number("density", kHardSurfaceDensity);
    if (p.density < 0.0) r.fail("density", "must be non-negative");
    p.color = color_field(r, "color", Color::Constant(0.5));
    r.finish();
    return p;
}

std::array<double, 2> range_field(JsonReader& r, const std::string& key, std::array<double, 2> fallback,
                                  int& count) {
    if (!r.has(key)) return fallback;
    const auto v = r.numbers(key, 3);
    if (v[2] < 1 || v[2] != std::floor(v[2])) r.fail(key, "count must be a positive integer");
    if (v[1] < v[0]) r.fail(key, "max must be >= min");
    count = static_cast<int>(v[2]);
    return {v[0], v[1]};
}

SweepSpec parse_sweep(JsonReader r) {
    SweepSpec s;
    const std::string type = r.string("type");
    if (type == "colocated") {
        s.kind = SweepSpec::Kind::Colocated;
    } else if (type == "grid") {
        s.kind = SweepSpec::Kind::Grid;
        if (r.has("pose")) s.pose = parse_pose(r.child("pose"));
        s.azimuth_deg = range_field(r, "azimuth_deg", s.azimuth_deg, s.azimuth_count);
        s.elevation_deg = range_field(r, "elevation_deg", s.elevation_deg, s.elevation_count);
        s.max_range = r.number("max_range", s.max_range);
        if (s.max_range <= 0.0) r.fail("max_range", "must be positive");
    } else {
        r.fail("type", "expected \"colocated\" or \"grid\"");
    }
    r.finish();
    return s;
}

PseudoDepthSpec parse_pseudo(JsonReader r) {
    PseudoDepthSpec p;
    const std::string mode = r.string("mode", "exact");
    if (mode == "exact") {
        p.mode = PseudoDepthSpec::Mode::Exact;
    } else if (mode == "scaled") {
        p.mode = PseudoDepthSpec::Mode::Scaled;
        p.scale = r.number("scale");
    } else if (mode == "noise") {
        p.mode = PseudoDepthSpec::Mode::Noise;
        p.scale = r.number("scale", 1.0);
        p.relative_std = r.number("relative_std");
        if (p.relative_std < 0.0) r.fail("relative_std", "must be non-negative");
    } else {
        r.fail("mode", "expected \"exact\", \"scaled\" or \"noise\"");
    }
    if (p.scale <= 0.0) r.fail("scale", "must be positive");
    r.finish();
    return p;
}

}  // namespace

Sweep SweepSpec::build(const EvalCuboid& cuboid, const Camera& camera) const {
    if (kind == Kind::Colocated) return colocated_voxel_sweep(cuboid, camera);
    Sweep sweep;
    sweep.pose = pose;
    sweep.max_range = max_range;
    for (int e = 0; e < elevation_count; ++e) {
        const double el = elevation_count == 1 ? elevation_deg[0]
                                               : elevation_deg[0] + (elevation_deg[1] - elevation_deg[0]) * e /
                                                                        (elevation_count - 1);
        for (int a = 0; a < azimuth_count; ++a) {
            const double az = azimuth_count == 1 ? azimuth_deg[0]
                                                 : azimuth_deg[0] + (azimuth_deg[1] - azimuth_deg[0]) * a /
                                                                        (azimuth_count - 1);
            const double c = std::cos(el * kDegree);
            sweep.directions.emplace_back(c * std::sin(az * kDegree), -std::sin(el * kDegree),
                                          c * std::cos(az * kDegree));
        }
    }
    return sweep;
}

CameraIntrinsics parse_intrinsics(JsonReader r) {
    CameraIntrinsics K;
    K.fx = r.number("fx");
    K.fy = r.number("fy");
    K.cx = r.number("cx");
    K.cy = r.number("cy");
    const long long w = r.integer("width");
    const long long h = r.integer("height");
    if (w < 1 || w > 1 << 16) r.fail("width", "out of range");
    if (h < 1 || h > 1 << 16) r.fail("height", "out of range");
    K.width = static_cast<int>(w);
    K.height = static_cast<int>(h);
    r.finish();
    try {
        K.validate();
    } catch (const InvalidArgument& e) {
        r.fail(e.what());
    }
    return K;
}

Pose parse_pose(JsonReader r) {
    Pose pose;
    pose.translation = r.vec3("translation", Vec3::Zero());
    if (r.has("rotation") && r.has("axis_angle_deg")) r.fail("give either rotation or axis_angle_deg, not both");
    if (r.has("rotation")) {
        auto rot = r.child("rotation");
        if (!rot.is_array() || rot.size() != 3) rot.fail("expected a 3x3 row-major matrix");
        for (std::size_t i = 0; i < 3; ++i) pose.rotation.row(static_cast<int>(i)) = rot.element(i).as_vec3();
    } else if (r.has("axis_angle_deg")) {
        const auto v = r.numbers("axis_angle_deg", 4);
        const Vec3 axis(v[0], v[1], v[2]);
        if (axis.norm() == 0.0) r.fail("axis_angle_deg", "axis must be non-zero");
        pose.rotation = Eigen::AngleAxisd(v[3] * kDegree, axis.normalized()).toRotationMatrix();
    }
    r.finish();
    try {
        pose.validate();
    } catch (const InvalidArgument& e) {
        r.fail(e.what());
    }
    return pose;
}

std::vector<InstanceMeta> parse_instances(const JsonReader& reader) {
    if (!reader.is_array()) reader.fail("expected an array of instances");
    std::vector<InstanceMeta> out;
    for (std::size_t i = 0; i < reader.size(); ++i) {
        JsonReader r = reader.element(i);
        InstanceMeta m;
        m.category = r.string("category");
        const auto c = r.numbers("center", 2);
        m.center = {c[0], c[1]};
        const auto b = r.numbers("half_extents", 2);
        m.half_height = b[0];
        m.half_width = b[1];
        if (m.half_height <= 0.0 || m.half_width <= 0.0) r.fail("half_extents", "must be positive");
        m.area = r.number("area");
        if (m.area < 0.0) r.fail("area", "must be non-negative");
        r.finish();
        out.push_back(std::move(m));
    }
    return out;
}

SceneDescriptor parse_scene(const nlohmann::json& j, const std::string& source,
                            const std::filesystem::path& base_dir) {
    SceneDescriptor s;
    JsonReader root(j, source);
    s.intrinsics = parse_intrinsics(root.child("intrinsics"));
    if (root.has("camera_pose")) s.camera_pose = parse_pose(root.child("camera_pose"));
    if (root.has("aux_poses")) {
        auto list = root.child("aux_poses");
        for (std::size_t i = 0; i < list.size(); ++i) s.aux_poses.push_back(parse_pose(list.element(i)));
    }
    s.background = color_field(root, "background", Color::Zero());
    if (root.has("primitives")) {
        auto list = root.child("primitives");
        for (std::size_t i = 0; i < list.size(); ++i) s.primitives.push_back(parse_primitive(list.element(i)));
    }
    if (root.has("instances") && root.has("instances_file"))
        root.fail("give either instances or instances_file, not both");
    if (root.has("instances")) s.instances = parse_instances(root.child("instances"));
    if (root.has("instances_file")) s.instances = load_instances(base_dir / root.string("instances_file"));
    if (root.has("pseudo_depth")) s.pseudo_depth = parse_pseudo(root.child("pseudo_depth"));
    if (root.has("sweeps")) {
        auto list = root.child("sweeps");
        for (std::size_t i = 0; i < list.size(); ++i) s.sweeps.push_back(parse_sweep(list.element(i)));
    }
    if (s.sweeps.empty()) s.sweeps.emplace_back();
    root.finish();
    return s;
}

SceneDescriptor load_scene(const std::filesystem::path& path) {
    return parse_scene(io::read_json(path), path.string(), path.parent_path());
}

std::vector<InstanceMeta> load_instances(const std::filesystem::path& path) {
    const auto j = io::read_json(path);
    return parse_instances(JsonReader(j, path.string()));
}

nlohmann::json intrinsics_to_json(const CameraIntrinsics& K) {
    return {{"fx", K.fx}, {"fy", K.fy}, {"cx", K.cx}, {"cy", K.cy}, {"width", K.width}, {"height", K.height}};
}

nlohmann::json pose_to_json(const Pose& pose) {
    nlohmann::json rot = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) rot.push_back({pose.rotation(i, 0), pose.rotation(i, 1), pose.rotation(i, 2)});
    return {{"rotation", rot},
            {"translation", {pose.translation.x(), pose.translation.y(), pose.translation.z()}}};
}

nlohmann::json instances_to_json(std::span<const InstanceMeta> instances) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& m : instances)
        out.push_back({{"category", m.category},
                       {"center", {m.center.u, m.center.v}},
                       {"half_extents", {m.half_height, m.half_width}},
                       {"area", m.area}});
    return out;
}

}  // namespace occ::cli
