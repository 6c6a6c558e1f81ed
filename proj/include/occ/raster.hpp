// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "occ/error.hpp"

namespace occ {

/// Linear RGB triple. Channel values are nominally in [0, 1].
using Rgb = Eigen::Array3f;

/// Dense row-major H x W raster. Pixel (u, v) lives at index v * width + u.
template <typename T>
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, const T& fill = T{})
        : width_(width), height_(height), data_(checked_size(width, height), fill) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    bool contains(int u, int v) const noexcept { return u >= 0 && v >= 0 && u < width_ && v < height_; }
    bool same_shape(int w, int h) const noexcept { return width_ == w && height_ == h; }
    template <typename U>
    bool same_shape(const Raster<U>& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    T& operator()(int u, int v) { return data_[index(u, v)]; }
    const T& operator()(int u, int v) const { return data_[index(u, v)]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    std::size_t index(int u, int v) const noexcept {
        return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(u);
    }

    bool operator==(const Raster& other) const
        requires std::equality_comparable<T>
    {
        return width_ == other.width_ && height_ == other.height_ && data_ == other.data_;
    }

private:
    static std::size_t checked_size(int width, int height) {
        require(width > 0 && height > 0, "raster dimensions must be positive");
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

/// Depth in meters; NaN marks an invalid pixel.
using DepthMap = Raster<float>;
using Image = Raster<Rgb>;
/// Boolean raster. uint8_t rather than bool so the storage is addressable.
using Mask = Raster<std::uint8_t>;

inline constexpr float kInvalidDepth = std::numeric_limits<float>::quiet_NaN();

inline bool is_valid_depth(float d) noexcept { return std::isfinite(d) && d > 0.0f; }

/// Rgb equality for tests and raster comparisons.
inline bool rgb_equal(const Rgb& a, const Rgb& b) noexcept { return (a == b).all(); }

}  // namespace occ
