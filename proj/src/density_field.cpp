// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#include "occ/density_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "occ/error.hpp"

namespace occ {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::optional<double> box_entry(const BoxShape& box, const Ray& ray) {
    double t_near = -std::numeric_limits<double>::infinity();
    double t_far = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        const double lo = box.center[a] - box.half_extents[a];
        const double hi = box.center[a] + box.half_extents[a];
        const double o = ray.origin[a];
        const double d = ray.direction[a];
        if (d == 0.0) {
            if (o < lo || o > hi) return std::nullopt;
            continue;
        }
        double t0 = (lo - o) / d;
        double t1 = (hi - o) / d;
        if (t0 > t1) std::swap(t0, t1);
        t_near = std::max(t_near, t0);
        t_far = std::min(t_far, t1);
    }
    if (t_near > t_far || t_far < 0.0) return std::nullopt;
    return std::max(t_near, 0.0);
}

std::optional<double> sphere_entry(const SphereShape& s, const Ray& ray) {
    const Vec3 oc = ray.origin - s.center;
    const double c = oc.squaredNorm() - s.radius * s.radius;
    if (c <= 0.0) return 0.0;
    const double b = oc.dot(ray.direction);
    if (b >= 0.0) return std::nullopt;
    const double disc = b * b - c;
    if (disc < 0.0) return std::nullopt;
    // Stable form of -b - sqrt(disc) for the near root.
    return c / (-b + std::sqrt(disc));
}

std::optional<double> half_space_entry(const HalfSpaceShape& h, const Ray& ray) {
    const double side = h.normal.dot(ray.origin) - h.offset;
    if (side <= 0.0) return 0.0;
    const double rate = h.normal.dot(ray.direction);
    if (rate >= 0.0) return std::nullopt;
    return side / -rate;
}

void validate_primitive(const Primitive& prim) {
    require(std::isfinite(prim.density) && prim.density >= 0.0, "primitive density must be non-negative");
    std::visit(overloaded{
                   [](const BoxShape& b) {
                       require((b.half_extents.array() > 0.0).all(), "box half extents must be positive");
                   },
                   [](const SphereShape& s) { require(s.radius > 0.0, "sphere radius must be positive"); },
                   [](const HalfSpaceShape& h) {
                       require(h.normal.norm() > 0.0, "half-space normal must be non-zero");
                   },
               },
               prim.shape);
}

}  // namespace

bool contains(const Shape& shape, const Vec3& p) {
    return std::visit(overloaded{
                          [&](const BoxShape& b) {
                              return ((p - b.center).cwiseAbs().array() <= b.half_extents.array()).all();
                          },
                          [&](const SphereShape& s) { return (p - s.center).squaredNorm() <= s.radius * s.radius; },
                          [&](const HalfSpaceShape& h) { return h.normal.dot(p) <= h.offset; },
                      },
                      shape);
}

std::optional<double> ray_entry(const Shape& shape, const Ray& ray) {
    return std::visit(overloaded{
                          [&](const BoxShape& b) { return box_entry(b, ray); },
                          [&](const SphereShape& s) { return sphere_entry(s, ray); },
                          [&](const HalfSpaceShape& h) { return half_space_entry(h, ray); },
                      },
                      shape);
}

AnalyticField::AnalyticField(std::vector<Primitive> primitives, Color background)
    : primitives_(std::move(primitives)), background_(background) {
    for (auto& prim : primitives_) {
        validate_primitive(prim);
        if (auto* h = std::get_if<HalfSpaceShape>(&prim.shape)) {
            const double n = h->normal.norm();
            h->normal /= n;
            h->offset /= n;
        }
    }
}

double AnalyticField::sigma_at(const Vec3& p) const {
    double sigma = 0.0;
    for (const auto& prim : primitives_)
        if (prim.density > sigma && contains(prim.shape, p)) sigma = prim.density;
    return sigma;
}

Color AnalyticField::color_at(const Vec3& p) const {
    double sigma = 0.0;
    const Color* color = &background_;
    for (const auto& prim : primitives_) {
        if (prim.density > sigma && contains(prim.shape, p)) {
            sigma = prim.density;
            color = &prim.color;
        }
    }
    return *color;
}

std::optional<AnalyticField::Hit> AnalyticField::first_hit(const Ray& ray, double hard_threshold) const {
    std::optional<Hit> best;
    for (std::size_t i = 0; i < primitives_.size(); ++i) {
        if (primitives_[i].density <= hard_threshold) continue;
        const auto t = ray_entry(primitives_[i].shape, ray);
        if (t && (!best || *t < best->distance)) best = Hit{*t, i};
    }
    return best;
}

std::optional<double> analytic_first_hit(const AnalyticField& field, const Ray& ray, double hard_threshold) {
    if (auto hit = field.first_hit(ray, hard_threshold)) return hit->distance;
    return std::nullopt;
}

GridField::GridField(std::array<int, 3> resolution, Aabb bounds, std::vector<float> values,
                     std::optional<std::vector<Rgb>> colors, Color background)
    : resolution_(resolution),
      bounds_(bounds),
      values_(std::move(values)),
      colors_(std::move(colors)),
      background_(background) {
    for (int n : resolution_) require(n >= 2, "grid field: resolution must be >= 2 per axis");
    require((bounds_.max.array() > bounds_.min.array()).all(), "grid field: bounds are degenerate");
    const std::size_t count = static_cast<std::size_t>(resolution_[0]) * resolution_[1] * resolution_[2];
    require(values_.size() == count, "grid field: value count does not match resolution");
    for (float v : values_) require(std::isfinite(v) && v >= 0.0f, "grid field: densities must be finite and >= 0");
    if (colors_) require(colors_->size() == count, "grid field: color count does not match resolution");
}

GridField GridField::sample(const DensityField& source, std::array<int, 3> resolution, Aabb bounds,
                            bool with_colors) {
    for (int n : resolution) require(n >= 2, "grid field: resolution must be >= 2 per axis");
    const std::size_t count = static_cast<std::size_t>(resolution[0]) * resolution[1] * resolution[2];
    std::vector<float> values(count);
    std::vector<Rgb> colors(with_colors ? count : 0);
    const Vec3 step = (bounds.max - bounds.min).cwiseQuotient(
        Vec3(resolution[0] - 1, resolution[1] - 1, resolution[2] - 1));
    std::size_t idx = 0;
    for (int k = 0; k < resolution[2]; ++k)
        for (int j = 0; j < resolution[1]; ++j)
            for (int i = 0; i < resolution[0]; ++i, ++idx) {
                const Vec3 p = bounds.min + Vec3(i, j, k).cwiseProduct(step);
                values[idx] = static_cast<float>(source.sigma_at(p));
                if (with_colors) colors[idx] = source.color_at(p).cast<float>();
            }
    if (!with_colors) return GridField(resolution, bounds, std::move(values));
    return GridField(resolution, bounds, std::move(values), std::move(colors));
}

std::optional<GridField::Stencil> GridField::stencil(const Vec3& p) const {
    if (!bounds_.contains(p)) return std::nullopt;
    Stencil s{};
    std::array<int, 3> base{};
    std::array<double, 3> frac{};
    for (int a = 0; a < 3; ++a) {
        const double cells = resolution_[a] - 1;
        const double g = (p[a] - bounds_.min[a]) / (bounds_.max[a] - bounds_.min[a]) * cells;
        const int i = std::clamp(static_cast<int>(std::floor(g)), 0, resolution_[a] - 2);
        base[a] = i;
        frac[a] = std::clamp(g - i, 0.0, 1.0);
    }
    int n = 0;
    for (int dk = 0; dk < 2; ++dk)
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di, ++n) {
                s.nodes[n] = node_index(base[0] + di, base[1] + dj, base[2] + dk);
                s.weights[n] = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]) *
                               (dk ? frac[2] : 1.0 - frac[2]);
            }
    return s;
}

double GridField::sigma_at(const Vec3& p) const {
    const auto s = stencil(p);
    if (!s) return 0.0;
    double sigma = 0.0;
    for (int n = 0; n < 8; ++n) sigma += s->weights[n] * values_[s->nodes[n]];
    return std::max(sigma, 0.0);
}

Color GridField::color_at(const Vec3& p) const {
    const auto s = stencil(p);
    if (!s || !colors_) return background_;
    Color c = Color::Zero();
    for (int n = 0; n < 8; ++n) c += s->weights[n] * (*colors_)[s->nodes[n]].cast<double>();
    return c.max(0.0).min(1.0);
}

}  // namespace occ
