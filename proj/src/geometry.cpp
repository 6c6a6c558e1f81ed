// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#include "occ/geometry.hpp"

#include <cmath>
#include <string>

#include "occ/error.hpp"

namespace occ {

namespace {
constexpr double kRotationTolerance = 1e-9;
}

void CameraIntrinsics::validate() const {
    require(std::isfinite(fx) && fx > 0.0, "intrinsics: fx must be positive");
    require(std::isfinite(fy) && fy > 0.0, "intrinsics: fy must be positive");
    require(width > 0 && height > 0, "intrinsics: image size must be positive");
    require(cx >= 0.0 && cx < width, "intrinsics: cx must lie in [0, width)");
    require(cy >= 0.0 && cy < height, "intrinsics: cy must lie in [0, height)");
}

Mat3 CameraIntrinsics::matrix() const {
    Mat3 K;
    K << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return K;
}

Mat3 CameraIntrinsics::inverse_matrix() const {
    Mat3 Kinv;
    Kinv << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
    return Kinv;
}

void Pose::validate() const {
    require(rotation.allFinite() && translation.allFinite(), "pose: non-finite entries");
    const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    require(ortho <= kRotationTolerance, "pose: rotation is not orthonormal");
    require(std::abs(rotation.determinant() - 1.0) <= kRotationTolerance, "pose: rotation determinant is not +1");
}

Pose Pose::inverse() const {
    const Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
}

Pose Pose::operator*(const Pose& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
}

Vec3 backproject(const CameraIntrinsics& K, const Pixel& x, double depth) {
    require(std::isfinite(x.u) && std::isfinite(x.v), "backproject: pixel must be finite");
    require(std::isfinite(depth) && depth > 0.0, "backproject: depth must be positive");
    return depth * K.unproject(x);
}

Pixel project(const CameraIntrinsics& K, const Vec3& p) {
    if (!(p.z() > 0.0)) throw BehindCamera("project: point has non-positive z");
    return {K.fx * p.x() / p.z() + K.cx, K.fy * p.y() / p.z() + K.cy};
}

Ray ray_through_pixel(const CameraIntrinsics& K, const Pose& pose, const Pixel& x) {
    require(K.in_image(x), "ray_through_pixel: pixel (" + std::to_string(x.u) + ", " + std::to_string(x.v) +
                               ") outside the image");
    return {pose.translation, (pose.rotation * K.unproject(x)).normalized()};
}

double pixel_ray_norm(const CameraIntrinsics& K, const Pixel& x) noexcept { return K.unproject(x).norm(); }

double distance_to_planar_depth(const CameraIntrinsics& K, const Pixel& x, double dist) {
    require(dist >= 0.0, "distance_to_planar_depth: distance must be non-negative");
    return dist / pixel_ray_norm(K, x);
}

double planar_depth_to_distance(const CameraIntrinsics& K, const Pixel& x, double depth) {
    require(depth >= 0.0, "planar_depth_to_distance: depth must be non-negative");
    return depth * pixel_ray_norm(K, x);
}

}  // namespace occ
