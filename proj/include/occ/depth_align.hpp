// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <vector>

#include "occ/geometry.hpp"
#include "occ/raster.hpp"

namespace occ {

/// Residual inverse depth r(x) = 1/D_refined(x) - 1/D_pseudo(x) in 1/meters,
/// parameterized by a rows x cols control grid and interpolated bilinearly.
/// Control node (i, j) sits at pixel (j (W-1)/(cols-1), i (H-1)/(rows-1)).
class ResidualField {
public:
    ResidualField(int rows, int cols, int width, int height, std::vector<double> values = {});

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    double& at(int i, int j) { return values_[static_cast<std::size_t>(i) * cols_ + j]; }
    double at(int i, int j) const { return values_[static_cast<std::size_t>(i) * cols_ + j]; }

    /// Bilinear weights of the (up to) four control nodes affecting x.
    struct Stencil {
        std::array<std::size_t, 4> nodes;
        std::array<double, 4> weights;
    };
    Stencil stencil(const Pixel& x) const;
    double evaluate(const Pixel& x) const;
    Raster<float> to_raster() const;

private:
    int rows_, cols_, width_, height_;
    std::vector<double> values_;
};

/// D_refined = 1 / (1/D_pseudo + r + epsilon); pixels with a non-positive
/// denominator or invalid input become NaN. Throws InvalidArgument when
/// epsilon <= 0 or the field and map sizes differ.
DepthMap refine_depth(const DepthMap& pseudo, const ResidualField& residual, double epsilon);

struct DepthTarget {
    int u = 0;
    int v = 0;
    double depth = 0.0;
};

enum class FitMethod { GradientDescent, Lbfgs };

struct FitOptions {
    FitMethod method = FitMethod::Lbfgs;
    /// Correction pairs kept by L-BFGS.
    int history = 8;
    int grid_rows = 12;
    int grid_cols = 40;
    double epsilon = 1e-6;
    double huber_delta = 1e-3;
    double smoothness = 1e-2;
    int max_iterations = 2000;
    double initial_step = 1e-3;
    double armijo = 1e-4;
    double tolerance = 1e-12;
};

struct FitResult {
    ResidualField field;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    int iterations = 0;
    /// Objective after every accepted step (non-increasing).
    std::vector<double> loss_history;
};

/// Objective used by fit_residual:
///   mean_t huber(D_refined(x_t) - D_t) + smoothness * sum_neighbors (r_a - r_b)^2.
/// Returns +inf when any target's denominator is non-positive. When `grad`
/// is non-null it receives the analytic gradient w.r.t. the control values.
double alignment_objective(const DepthMap& pseudo, std::span<const DepthTarget> targets, const ResidualField& field,
                           const FitOptions& options, std::vector<double>* grad = nullptr);

/// Full-batch descent (L-BFGS or steepest descent) with Armijo backtracking,
/// so the objective is non-increasing across accepted steps.
/// Throws InvalidArgument without valid targets and NumericFailure on divergence.
FitResult fit_residual(const DepthMap& pseudo, std::span<const DepthTarget> targets, const FitOptions& options = {});

/// Dense targets from every pixel valid in both maps (optionally strided).
std::vector<DepthTarget> targets_from_depth(const DepthMap& pseudo, const DepthMap& gt, int stride = 1);

struct DistributionSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;
    double min = 0.0;
    double max = 0.0;
    /// 5, 25, 50, 75, 95th percentiles.
    std::array<double, 5> quantiles{};
    double hist_lo = 0.0;
    double hist_hi = 0.0;
    std::vector<std::size_t> histogram;

    double range() const noexcept { return max - min; }
};

struct ResidualStatistics {
    DistributionSummary depth;    // D_gt - D_p
    DistributionSummary inverse;  // 1/D_gt - 1/D_p
};

/// Throws InvalidArgument when no pixel is valid in both maps.
ResidualStatistics residual_statistics(const DepthMap& pseudo, const DepthMap& gt, int bins = 32);

}  // namespace occ
