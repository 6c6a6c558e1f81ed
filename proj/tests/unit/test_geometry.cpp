// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "occ/error.hpp"
#include "occ/geometry.hpp"

namespace occ {
namespace {

using testing::small_camera;

Mat3 random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    return q.normalized().toRotationMatrix();
}

TEST(Intrinsics, ValidateRejectsBadValues) {
    EXPECT_NO_THROW(small_camera().validate());
    CameraIntrinsics K = small_camera();
    K.fx = 0.0;
    EXPECT_THROW(K.validate(), InvalidArgument);
    K = small_camera();
    K.cx = 640.0;
    EXPECT_THROW(K.validate(), InvalidArgument);
    K = small_camera();
    K.cy = -1.0;
    EXPECT_THROW(K.validate(), InvalidArgument);
}

TEST(Intrinsics, InverseMatrixMatchesEigenInverse) {
    const CameraIntrinsics K = testing::street_camera();
    EXPECT_LT((K.inverse_matrix() - K.matrix().inverse()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Backproject, PrincipalPointIsOpticalAxis) {
    const Vec3 p = backproject(small_camera(), {320, 96}, 5.0);
    EXPECT_EQ(p, Vec3(0, 0, 5));
}

TEST(Backproject, OffAxisMatchesMatrixOracle) {
    const CameraIntrinsics K = small_camera();
    const Vec3 p = backproject(K, {420, 96}, 5.0);
    const Vec3 oracle = 5.0 * (K.matrix().inverse() * Vec3(420, 96, 1));
    EXPECT_NEAR((p - oracle).norm(), 0.0, 1e-12);
    EXPECT_NEAR((p - Vec3(5, 0, 5)).norm(), 0.0, 1e-12);
}

TEST(Backproject, RejectsNonPositiveDepth) {
    EXPECT_THROW(backproject(small_camera(), {1, 1}, 0.0), InvalidArgument);
    EXPECT_THROW(backproject(small_camera(), {1, 1}, -2.0), InvalidArgument);
    EXPECT_THROW(backproject(small_camera(), {NAN, 1}, 1.0), InvalidArgument);
}

TEST(Project, OpticalAxisHitsPrincipalPoint) {
    const Pixel x = project(small_camera(), {0, 0, 1});
    EXPECT_DOUBLE_EQ(x.u, 320.0);
    EXPECT_DOUBLE_EQ(x.v, 96.0);
}

TEST(Project, DirectFormula) {
    const Pixel x = project(small_camera(), {1, 0, 2});
    EXPECT_DOUBLE_EQ(x.u, 370.0);
    EXPECT_DOUBLE_EQ(x.v, 96.0);
    const Vec3 back = backproject(small_camera(), x, 2.0);
    EXPECT_NEAR((back - Vec3(1, 0, 2)).norm(), 0.0, 1e-12);
}

TEST(Project, BehindCameraThrows) {
    EXPECT_THROW(project(small_camera(), {0, 0, -1}), BehindCamera);
    EXPECT_THROW(project(small_camera(), {0, 0, 0}), BehindCamera);
    try {
        project(small_camera(), {0, 0, -1});
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BehindCamera);
    }
}

TEST(Project, RoundTripRandom) {
    const CameraIntrinsics K = small_camera();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-50.0, 700.0), v(-50.0, 250.0), d(0.1, 100.0);
    for (int i = 0; i < 100; ++i) {
        const Pixel x{u(rng), v(rng)};
        const double depth = d(rng);
        const Vec3 p = backproject(K, x, depth);
        EXPECT_DOUBLE_EQ(p.z(), depth);
        const Pixel y = project(K, p);
        EXPECT_NEAR(y.u, x.u, 1e-9);
        EXPECT_NEAR(y.v, x.v, 1e-9);
    }
}

TEST(RayThroughPixel, IdentityPoseOnAxis) {
    const Ray r = ray_through_pixel(small_camera(), Pose::identity(), {320, 96});
    EXPECT_EQ(r.origin, Vec3::Zero());
    EXPECT_EQ(r.direction, Vec3::UnitZ());
}

TEST(RayThroughPixel, TranslationMovesOriginOnly) {
    const Ray r = ray_through_pixel(small_camera(), Pose::from_translation({1, 0, 0}), {320, 96});
    EXPECT_EQ(r.origin, Vec3(1, 0, 0));
    EXPECT_EQ(r.direction, Vec3::UnitZ());
}

TEST(RayThroughPixel, DirectionParallelToRotatedBackprojection) {
    const CameraIntrinsics K = small_camera();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 639.0), v(0.0, 191.0);
    for (int i = 0; i < 50; ++i) {
        const Pose pose{random_rotation(rng), Vec3(u(rng) * 0.01, 0.5, -1.0)};
        const Pixel x{u(rng), v(rng)};
        const Ray r = ray_through_pixel(K, pose, x);
        const Vec3 expected = (pose.rotation * backproject(K, x, 1.0)).normalized();
        EXPECT_NEAR(r.direction.norm(), 1.0, 1e-12);
        EXPECT_NEAR((r.direction - expected).norm(), 0.0, 1e-12);
        EXPECT_EQ(r.origin, pose.translation);
    }
}

TEST(RayThroughPixel, OutOfBoundsThrows) {
    EXPECT_THROW(ray_through_pixel(small_camera(), Pose::identity(), {-1.0, 5.0}), InvalidArgument);
    EXPECT_THROW(ray_through_pixel(small_camera(), Pose::identity(), {5.0, 192.0}), InvalidArgument);
    EXPECT_NO_THROW(ray_through_pixel(small_camera(), Pose::identity(), {639.0, 191.0}));
}

TEST(DistanceConversion, PrincipalPointIsIdentity) {
    EXPECT_DOUBLE_EQ(distance_to_planar_depth(small_camera(), {320, 96}, 7.25), 7.25);
}

TEST(DistanceConversion, OffAxisExample) {
    EXPECT_NEAR(distance_to_planar_depth(small_camera(), {420, 96}, std::sqrt(2.0)), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(distance_to_planar_depth(small_camera(), {420, 96}, 0.0), 0.0);
}

TEST(DistanceConversion, LinearAndInverse) {
    const CameraIntrinsics K = small_camera();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 639.0), v(0.0, 191.0), d(0.0, 80.0);
    for (int i = 0; i < 100; ++i) {
        const Pixel x{u(rng), v(rng)};
        const double a = d(rng), b = d(rng);
        EXPECT_NEAR(distance_to_planar_depth(K, x, a + b),
                    distance_to_planar_depth(K, x, a) + distance_to_planar_depth(K, x, b), 1e-12);
        EXPECT_NEAR(planar_depth_to_distance(K, x, distance_to_planar_depth(K, x, a)), a, 1e-12);
    }
    EXPECT_THROW(distance_to_planar_depth(K, {1, 1}, -1.0), InvalidArgument);
}

TEST(Pose, ValidateRejectsNonRotations) {
    Pose p;
    EXPECT_NO_THROW(p.validate());
    p.rotation(0, 0) = 1.001;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p.rotation = -Mat3::Identity();  // orthonormal, det -1
    EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(Pose, InverseAndCompositionOnRandomPoints) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> c(-10.0, 10.0);
    for (int i = 0; i < 100; ++i) {
        const Pose a{random_rotation(rng), Vec3(c(rng), c(rng), c(rng))};
        const Pose b{random_rotation(rng), Vec3(c(rng), c(rng), c(rng))};
        EXPECT_NO_THROW(a.validate());
        const Vec3 p(c(rng), c(rng), c(rng));
        EXPECT_NEAR((a.inverse().apply(a.apply(p)) - p).norm(), 0.0, 1e-9);
        EXPECT_NEAR(((a * b).apply(p) - a.apply(b.apply(p))).norm(), 0.0, 1e-9);
    }
}

}  // namespace
}  // namespace occ
