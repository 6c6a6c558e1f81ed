// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace occ {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Continuous image coordinates. u runs along the width, v along the height,
/// and (0, 0) is the center of the top-left pixel.
struct Pixel {
    double u = 0.0;
    double v = 0.0;

    friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Pinhole intrinsics.
struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;

    /// Throws InvalidArgument unless fx, fy > 0 and the principal point lies inside the image.
    void validate() const;

    Mat3 matrix() const;
    Mat3 inverse_matrix() const;

    /// K^-1 (u, v, 1).
    Vec3 unproject(const Pixel& x) const noexcept {
        return {(x.u - cx) / fx, (x.v - cy) / fy, 1.0};
    }

    /// True when x lies on the image plane covered by pixels, i.e. within
    /// half a pixel of the outermost pixel centers.
    bool in_image(const Pixel& x) const noexcept {
        return x.u >= -0.5 && x.v >= -0.5 && x.u <= width - 0.5 && x.v <= height - 0.5;
    }
};

/// Rigid transform x -> rotation * x + translation. Camera poses are
/// camera-to-world, so the translation is the camera center.
struct Pose {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static Pose identity() { return {}; }
    static Pose from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }

    /// Throws InvalidArgument when rotation is not orthonormal with det +1 (tolerance 1e-9).
    void validate() const;

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    Pose inverse() const;
    /// (this * other).apply(p) == this->apply(other.apply(p)).
    Pose operator*(const Pose& other) const;
};

struct Ray {
    Vec3 origin = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();

    Vec3 at(double t) const { return origin + t * direction; }
};

/// p = depth * K^-1 (u, v, 1). Throws InvalidArgument for depth <= 0 or non-finite input.
Vec3 backproject(const CameraIntrinsics& K, const Pixel& x, double depth);

/// (fx px/pz + cx, fy py/pz + cy). Throws BehindCamera for pz <= 0.
Pixel project(const CameraIntrinsics& K, const Vec3& p);

/// World-frame ray through pixel x of a camera at `pose`.
/// Throws InvalidArgument when x is outside the image.
Ray ray_through_pixel(const CameraIntrinsics& K, const Pose& pose, const Pixel& x);

/// ||K^-1 (u, v, 1)||_2, the ratio between ray distance and planar depth at x.
double pixel_ray_norm(const CameraIntrinsics& K, const Pixel& x) noexcept;

/// Converts a distance along the pixel ray into planar (z) depth.
double distance_to_planar_depth(const CameraIntrinsics& K, const Pixel& x, double dist);

/// Inverse of distance_to_planar_depth.
double planar_depth_to_distance(const CameraIntrinsics& K, const Pixel& x, double depth);

}  // namespace occ
