// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#include "occ/depth_align.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "occ/error.hpp"

namespace occ {

ResidualField::ResidualField(int rows, int cols, int width, int height, std::vector<double> values)
    : rows_(rows), cols_(cols), width_(width), height_(height), values_(std::move(values)) {
    require(rows_ >= 2 && cols_ >= 2, "residual field: control grid must be at least 2 x 2");
    require(width_ > 0 && height_ > 0, "residual field: image size must be positive");
    const std::size_t count = static_cast<std::size_t>(rows_) * cols_;
    if (values_.empty()) values_.assign(count, 0.0);
    require(values_.size() == count, "residual field: value count does not match the control grid");
    for (double v : values_) require(std::isfinite(v), "residual field: values must be finite");
}

ResidualField::Stencil ResidualField::stencil(const Pixel& x) const {
    const double gu = width_ > 1 ? x.u / (width_ - 1) * (cols_ - 1) : 0.0;
    const double gv = height_ > 1 ? x.v / (height_ - 1) * (rows_ - 1) : 0.0;
    const int j = std::clamp(static_cast<int>(std::floor(gu)), 0, cols_ - 2);
    const int i = std::clamp(static_cast<int>(std::floor(gv)), 0, rows_ - 2);
    const double fu = std::clamp(gu - j, 0.0, 1.0);
    const double fv = std::clamp(gv - i, 0.0, 1.0);
    const auto idx = [&](int a, int b) { return static_cast<std::size_t>(a) * cols_ + b; };
    return {{idx(i, j), idx(i, j + 1), idx(i + 1, j), idx(i + 1, j + 1)},
            {(1 - fu) * (1 - fv), fu * (1 - fv), (1 - fu) * fv, fu * fv}};
}

double ResidualField::evaluate(const Pixel& x) const {
    const Stencil s = stencil(x);
    double r = 0.0;
    for (int n = 0; n < 4; ++n) r += s.weights[n] * values_[s.nodes[n]];
    return r;
}

Raster<float> ResidualField::to_raster() const {
    Raster<float> out(width_, height_, 0.0f);
    for (int v = 0; v < height_; ++v)
        for (int u = 0; u < width_; ++u) out(u, v) = static_cast<float>(evaluate({double(u), double(v)}));
    return out;
}

DepthMap refine_depth(const DepthMap& pseudo, const ResidualField& residual, double epsilon) {
    require(epsilon > 0.0, "refine_depth: epsilon must be positive");
    require(pseudo.same_shape(residual.width(), residual.height()), "refine_depth: residual field size mismatch");
    DepthMap out(pseudo.width(), pseudo.height(), kInvalidDepth);
    for (int v = 0; v < pseudo.height(); ++v)
        for (int u = 0; u < pseudo.width(); ++u) {
            const float d = pseudo(u, v);
            if (!is_valid_depth(d)) continue;
            const double den = 1.0 / double(d) + residual.evaluate({double(u), double(v)}) + epsilon;
            if (den > 0.0) out(u, v) = static_cast<float>(1.0 / den);
        }
    return out;
}

namespace {

double huber(double e, double delta) {
    const double a = std::abs(e);
    return a <= delta ? 0.5 * e * e / delta : a - 0.5 * delta;
}

double huber_slope(double e, double delta) {
    return std::abs(e) <= delta ? e / delta : (e > 0.0 ? 1.0 : -1.0);
}

}  // namespace

namespace {

// Targets with their fixed per-fit quantities precomputed.
struct PreparedTarget {
    ResidualField::Stencil stencil;
    double inv_pseudo;
    double depth;
};

std::vector<PreparedTarget> prepare(const DepthMap& pseudo, std::span<const DepthTarget> targets,
                                    const ResidualField& field) {
    std::vector<PreparedTarget> out;
    out.reserve(targets.size());
    for (const auto& t : targets)
        out.push_back({field.stencil({double(t.u), double(t.v)}), 1.0 / double(pseudo(t.u, t.v)), t.depth});
    return out;
}

double objective(std::span<const PreparedTarget> targets, const ResidualField& field, const FitOptions& options,
                 std::vector<double>* grad) {
    const auto c = field.values();
    if (grad) grad->assign(c.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(targets.size());

    double data = 0.0;
    for (const auto& t : targets) {
        const auto& s = t.stencil;
        double r = 0.0;
        for (int n = 0; n < 4; ++n) r += s.weights[n] * c[s.nodes[n]];
        const double den = t.inv_pseudo + r + options.epsilon;
        if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
        const double refined = 1.0 / den;
        const double e = refined - t.depth;
        data += huber(e, options.huber_delta);
        if (grad) {
            // d refined / d r = -refined^2
            const double g = -huber_slope(e, options.huber_delta) * refined * refined * inv_n;
            for (int n = 0; n < 4; ++n) (*grad)[s.nodes[n]] += g * s.weights[n];
        }
    }

    double smooth = 0.0;
    const int rows = field.rows();
    const int cols = field.cols();
    const auto pair = [&](std::size_t a, std::size_t b) {
        const double d = c[a] - c[b];
        smooth += d * d;
        if (grad) {
            (*grad)[a] += 2.0 * options.smoothness * d;
            (*grad)[b] -= 2.0 * options.smoothness * d;
        }
    };
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const std::size_t a = static_cast<std::size_t>(i) * cols + j;
            if (j + 1 < cols) pair(a, a + 1);
            if (i + 1 < rows) pair(a, a + cols);
        }
    return data * inv_n + options.smoothness * smooth;
}

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Two-loop recursion: returns -H g for the limited-memory inverse Hessian H.
std::vector<double> lbfgs_direction(const std::vector<double>& g, const std::deque<std::vector<double>>& s_hist,
                                    const std::deque<std::vector<double>>& y_hist) {
    std::vector<double> q = g;
    const std::size_t m = s_hist.size();
    std::vector<double> alpha(m), rho(m);
    for (std::size_t k = m; k-- > 0;) {
        rho[k] = 1.0 / dot(y_hist[k], s_hist[k]);
        alpha[k] = rho[k] * dot(s_hist[k], q);
        for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * y_hist[k][i];
    }
    if (m > 0) {
        const double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
        for (double& x : q) x *= gamma;
    }
    for (std::size_t k = 0; k < m; ++k) {
        const double beta = rho[k] * dot(y_hist[k], q);
        for (std::size_t i = 0; i < q.size(); ++i) q[i] += (alpha[k] - beta) * s_hist[k][i];
    }
    for (double& x : q) x = -x;
    return q;
}

}  // namespace

double alignment_objective(const DepthMap& pseudo, std::span<const DepthTarget> targets, const ResidualField& field,
                           const FitOptions& options, std::vector<double>* grad) {
    require(!targets.empty(), "alignment_objective: no targets");
    require(pseudo.same_shape(field.width(), field.height()), "alignment_objective: field and depth sizes differ");
    return objective(prepare(pseudo, targets, field), field, options, grad);
}

FitResult fit_residual(const DepthMap& pseudo, std::span<const DepthTarget> targets, const FitOptions& options) {
    require(options.epsilon > 0.0, "fit_residual: epsilon must be positive");
    require(options.huber_delta > 0.0, "fit_residual: huber delta must be positive");
    require(options.smoothness >= 0.0, "fit_residual: smoothness weight must be >= 0");
    require(options.grid_rows >= 2 && options.grid_cols >= 2, "fit_residual: control grid must be at least 2 x 2");
    require(options.history >= 1, "fit_residual: history must be >= 1");

    std::vector<DepthTarget> valid;
    valid.reserve(targets.size());
    for (const auto& t : targets) {
        require(pseudo.contains(t.u, t.v), "fit_residual: target outside the image");
        if (std::isfinite(t.depth) && t.depth > 0.0 && is_valid_depth(pseudo(t.u, t.v))) valid.push_back(t);
    }
    require(!valid.empty(), "fit_residual: no valid targets");

    FitResult result{ResidualField(options.grid_rows, options.grid_cols, pseudo.width(), pseudo.height()), 0.0, 0.0,
                     0, {}};
    ResidualField& field = result.field;
    const auto prepared = prepare(pseudo, valid, field);
    std::vector<double> grad;
    double loss = objective(prepared, field, options, &grad);
    if (!std::isfinite(loss)) throw NumericFailure("fit_residual: initial loss is not finite");
    result.initial_loss = loss;
    result.loss_history.push_back(loss);

    const bool quasi_newton = options.method == FitMethod::Lbfgs;
    std::deque<std::vector<double>> s_hist, y_hist;
    ResidualField trial = field;
    std::vector<double> trial_grad;
    double gd_step = options.initial_step;
    for (int it = 0; it < options.max_iterations; ++it) {
        const double gnorm2 = dot(grad, grad);
        if (gnorm2 == 0.0) break;

        std::vector<double> dir;
        double step = gd_step;
        if (quasi_newton) {
            dir = lbfgs_direction(grad, s_hist, y_hist);
            if (dot(dir, grad) >= 0.0) {
                // Not a descent direction: restart from steepest descent.
                s_hist.clear();
                y_hist.clear();
                dir = lbfgs_direction(grad, s_hist, y_hist);
            }
            step = s_hist.empty() ? options.initial_step : 1.0;
        } else {
            dir.resize(grad.size());
            for (std::size_t k = 0; k < grad.size(); ++k) dir[k] = -grad[k];
        }
        const double slope = dot(dir, grad);

        double trial_loss = loss;
        bool accepted = false;
        while (step > 1e-30) {
            auto tv = trial.values();
            const auto cv = field.values();
            for (std::size_t k = 0; k < tv.size(); ++k) tv[k] = cv[k] + step * dir[k];
            trial_loss = objective(prepared, trial, options, &trial_grad);
            if (std::isnan(trial_loss)) throw NumericFailure("fit_residual: loss became NaN");
            if (trial_loss <= loss + options.armijo * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        if (quasi_newton) {
            std::vector<double> s(grad.size()), y(grad.size());
            const auto tv = trial.values();
            const auto cv = field.values();
            for (std::size_t k = 0; k < s.size(); ++k) {
                s[k] = tv[k] - cv[k];
                y[k] = trial_grad[k] - grad[k];
            }
            // Keep the pair only when it preserves positive curvature.
            if (dot(s, y) > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
                s_hist.push_back(std::move(s));
                y_hist.push_back(std::move(y));
                if (s_hist.size() > static_cast<std::size_t>(options.history)) {
                    s_hist.pop_front();
                    y_hist.pop_front();
                }
            }
        } else {
            gd_step = 2.0 * step;
        }

        const double improvement = loss - trial_loss;
        std::swap(field, trial);
        std::swap(grad, trial_grad);
        loss = trial_loss;
        result.loss_history.push_back(loss);
        result.iterations = it + 1;
        if (improvement <= options.tolerance * std::max(1.0, std::abs(loss))) break;
    }
    result.final_loss = loss;
    return result;
}

std::vector<DepthTarget> targets_from_depth(const DepthMap& pseudo, const DepthMap& gt, int stride) {
    require(pseudo.same_shape(gt), "targets_from_depth: size mismatch");
    require(stride >= 1, "targets_from_depth: stride must be >= 1");
    std::vector<DepthTarget> targets;
    for (int v = 0; v < gt.height(); v += stride)
        for (int u = 0; u < gt.width(); u += stride)
            if (is_valid_depth(gt(u, v)) && is_valid_depth(pseudo(u, v))) targets.push_back({u, v, double(gt(u, v))});
    return targets;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * double(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double f = pos - double(lo);
    return sorted[lo] + f * (sorted[hi] - sorted[lo]);
}

DistributionSummary summarize(std::vector<double> xs, int bins) {
    DistributionSummary s;
    s.count = xs.size();
    std::sort(xs.begin(), xs.end());
    s.min = xs.front();
    s.max = xs.back();
    // Two-pass variance.
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.variance = ss / double(xs.size());
    const double qs[5] = {0.05, 0.25, 0.5, 0.75, 0.95};
    for (int i = 0; i < 5; ++i) s.quantiles[i] = quantile_sorted(xs, qs[i]);
    s.hist_lo = s.min;
    s.hist_hi = s.max;
    s.histogram.assign(static_cast<std::size_t>(bins), 0);
    const double span = s.max - s.min;
    for (double x : xs) {
        std::size_t b = span > 0.0 ? static_cast<std::size_t>((x - s.min) / span * bins) : 0;
        s.histogram[std::min(b, s.histogram.size() - 1)]++;
    }
    return s;
}

}  // namespace

ResidualStatistics residual_statistics(const DepthMap& pseudo, const DepthMap& gt, int bins) {
    require(pseudo.same_shape(gt), "residual_statistics: size mismatch");
    require(bins >= 1, "residual_statistics: bins must be >= 1");
    std::vector<double> depth, inverse;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (!is_valid_depth(gt[i]) || !is_valid_depth(pseudo[i])) continue;
        const double g = gt[i];
        const double p = pseudo[i];
        depth.push_back(g - p);
        inverse.push_back(1.0 / g - 1.0 / p);
    }
    require(!depth.empty(), "residual_statistics: no pixel is valid in both maps");
    return {summarize(std::move(depth), bins), summarize(std::move(inverse), bins)};
}

}  // namespace occ
