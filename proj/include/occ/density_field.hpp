// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "occ/geometry.hpp"
#include "occ/raster.hpp"

namespace occ {

/// Linear RGB used by fields and the renderer (double precision).
using Color = Eigen::Array3d;

/// Volume density source sigma: R^3 -> [0, inf), in 1/meters, plus a
/// view-independent radiance. Implementations are immutable and safe to
/// query from many threads.
class DensityField {
public:
    virtual ~DensityField() = default;
    virtual double sigma_at(const Vec3& p) const = 0;
    virtual Color color_at(const Vec3& p) const = 0;
};

/// Opacity used for hard-surface fixtures: effectively opaque over 1 mm.
inline constexpr double kHardSurfaceDensity = 1e4;

struct BoxShape {
    Vec3 center = Vec3::Zero();
    Vec3 half_extents = Vec3::Ones();
};

struct SphereShape {
    Vec3 center = Vec3::Zero();
    double radius = 1.0;
};

/// Closed half-space {p : dot(normal, p) <= offset}; the normal points out of the solid.
struct HalfSpaceShape {
    Vec3 normal = -Vec3::UnitY();
    double offset = 0.0;
};

using Shape = std::variant<BoxShape, SphereShape, HalfSpaceShape>;

struct Primitive {
    Shape shape;
    double density = kHardSurfaceDensity;
    Color color = Color::Zero();
};

bool contains(const Shape& shape, const Vec3& p);

/// Entry distance of the ray into the shape: 0 when the origin is inside,
/// the smallest positive crossing otherwise, nullopt on a miss.
std::optional<double> ray_entry(const Shape& shape, const Ray& ray);

/// Union of analytic primitives. Overlaps take the maximum density; the color
/// is that of the densest primitive containing the point (first on ties).
class AnalyticField final : public DensityField {
public:
    AnalyticField() = default;
    explicit AnalyticField(std::vector<Primitive> primitives, Color background = Color::Zero());

    double sigma_at(const Vec3& p) const override;
    Color color_at(const Vec3& p) const override;

    const std::vector<Primitive>& primitives() const noexcept { return primitives_; }
    const Color& background() const noexcept { return background_; }

    /// First entry distance into a primitive whose density exceeds
    /// `hard_threshold`, together with that primitive's index.
    struct Hit {
        double distance;
        std::size_t primitive;
    };
    std::optional<Hit> first_hit(const Ray& ray, double hard_threshold = 0.0) const;

private:
    std::vector<Primitive> primitives_;
    Color background_ = Color::Zero();
};

std::optional<double> analytic_first_hit(const AnalyticField& field, const Ray& ray, double hard_threshold = 0.0);

/// Axis-aligned cuboid [min, max].
struct Aabb {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Ones();

    bool contains(const Vec3& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
};

/// Node-sampled density on a regular lattice spanning `bounds`, with
/// resolution nodes per axis (node i at min + i * (max - min) / (n - 1)).
/// Queries interpolate trilinearly; points outside the bounds read 0.
class GridField final : public DensityField {
public:
    GridField(std::array<int, 3> resolution, Aabb bounds, std::vector<float> values,
              std::optional<std::vector<Rgb>> colors = std::nullopt, Color background = Color::Zero());

    /// Samples `source` at every lattice node.
    static GridField sample(const DensityField& source, std::array<int, 3> resolution, Aabb bounds,
                            bool with_colors = true);

    double sigma_at(const Vec3& p) const override;
    Color color_at(const Vec3& p) const override;

    const std::array<int, 3>& resolution() const noexcept { return resolution_; }
    const Aabb& bounds() const noexcept { return bounds_; }
    const std::vector<float>& values() const noexcept { return values_; }
    const std::optional<std::vector<Rgb>>& colors() const noexcept { return colors_; }
    const Color& background() const noexcept { return background_; }

    std::size_t node_index(int i, int j, int k) const noexcept {
        return (static_cast<std::size_t>(k) * resolution_[1] + j) * resolution_[0] + i;
    }

private:
    struct Stencil {
        std::array<std::size_t, 8> nodes;
        std::array<double, 8> weights;
    };
    std::optional<Stencil> stencil(const Vec3& p) const;

    std::array<int, 3> resolution_;
    Aabb bounds_;
    std::vector<float> values_;
    std::optional<std::vector<Rgb>> colors_;
    Color background_;
};

}  // namespace occ
