// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "occ/geometry.hpp"
#include "occ/raster.hpp"
#include "occ/rng.hpp"

namespace occ {

/// Detector output for one instance: bounding-box center, half extents
/// (half-height, half-width), segmented area, and the category label.
struct InstanceMeta {
    Pixel center;
    double half_height = 1.0;
    double half_width = 1.0;
    double area = 2.0;
    std::string category = "unlabeled";
};

enum class SamplingStrategy { Gaussian, Uniform };

/// Category -> strategy lookup. Labels are matched case-insensitively.
class SamplingStrategyTable {
public:
    /// road, building, vegetation, sky, unlabeled -> uniform; car, pedestrian -> gaussian.
    static SamplingStrategyTable standard();

    void set(const std::string& category, SamplingStrategy strategy);
    std::optional<SamplingStrategy> find(const std::string& category) const;
    /// Throws InvalidArgument for categories without an entry.
    SamplingStrategy at(const std::string& category) const;
    const std::map<std::string, SamplingStrategy>& entries() const noexcept { return table_; }

private:
    std::map<std::string, SamplingStrategy> table_;
};

struct GaussianComponent {
    Pixel mean;
    /// Diagonal covariance entries along u (from the half width) and v (from the half height).
    double variance_u = 1.0;
    double variance_v = 1.0;
    double weight = 1.0;
    std::size_t instance = 0;

    double sigma_u() const { return std::sqrt(variance_u); }
    double sigma_v() const { return std::sqrt(variance_v); }
};

struct UniformRegion {
    std::string category;
    double area = 0.0;
};

/// Instance-aware sampling density over an image:
///   p(x) = (1 - gamma) sum_k w_k N(x | mu_k, Sigma_k) + gamma U(x | s).
/// The uniform term is supported on `uniform_support`; `uniform_area` is that
/// support's pixel count, so the term integrates to gamma over the image.
struct MixturePdf {
    int width = 0;
    int height = 0;
    std::vector<GaussianComponent> gaussians;
    std::vector<UniformRegion> uniform_regions;
    double gamma = 1.0;
    /// Area registered from metadata: uniform-category areas plus unlabeled background.
    double registered_uniform_area = 0.0;
    Mask uniform_support;
    double uniform_area = 0.0;
    /// Linear indices of uniform_support pixels (draw table).
    std::vector<std::uint32_t> uniform_pixels;

    /// Gamma actually used when selecting components (1 when there are no Gaussians).
    double effective_gamma() const noexcept { return gaussians.empty() ? 1.0 : gamma; }
};

struct MixtureOptions {
    /// Explicit support for the uniform component. Defaults to the image minus
    /// Gaussian-instance bounding boxes.
    std::optional<Mask> uniform_support;
};

/// Builds the sampling density: mu_k = l_k, Sigma_k = diag(b_k o b_k / 4),
/// w_k = log s_k / sum_j log s_j over Gaussian-strategy instances.
/// Throws InvalidArgument for gamma outside [0, 1], Gaussian instances with
/// area <= 1 or non-positive extents, and unmapped categories.
MixturePdf build_mixture(std::span<const InstanceMeta> instances, const SamplingStrategyTable& table, double gamma,
                         int width, int height, const MixtureOptions& options = {});

/// Density at x in 1/pixel^2; 0 outside the image.
double pdf_eval(const MixturePdf& pdf, const Pixel& x);

/// Eq.-6 style proximity test: false iff an existing anchor lies at squared
/// distance < 2 l^2 from x.
bool conditioned_accept(std::span<const Pixel> anchors, const Pixel& x, int patch_size);

struct PatchSet {
    std::vector<Pixel> anchors;
    int patch_size = 8;
    std::size_t requested = 0;
    std::size_t attempts = 0;
    std::size_t rejected_count = 0;
    std::size_t rejected_out_of_domain = 0;
    std::size_t rejected_overlap = 0;

    bool complete() const noexcept { return anchors.size() == requested; }
};

/// Raw Gaussian draw statistics, collected before truncation or rejection.
struct GaussianDrawTrace {
    std::size_t draws = 0;
    std::size_t within_u = 0;
    std::size_t within_v = 0;
    std::size_t within_box = 0;

    double rate_u() const { return draws ? double(within_u) / draws : 0.0; }
    double rate_v() const { return draws ? double(within_v) / draws : 0.0; }
    double rate_box() const { return draws ? double(within_box) / draws : 0.0; }
};

struct SamplerOptions {
    std::size_t num_patches = 64;
    int patch_size = 8;
    std::uint64_t seed = 0;
    std::size_t max_attempts = 10000;
};

/// Anchors are integer pixels whose l x l footprint lies inside the image.
struct AnchorDomain {
    int u_min, u_max, v_min, v_max;
    bool contains(const Pixel& a) const noexcept {
        return a.u >= u_min && a.u <= u_max && a.v >= v_min && a.v <= v_max;
    }
};
AnchorDomain anchor_domain(int width, int height, int patch_size);

/// One unconstrained draw from Gaussian component `g`.
Pixel draw_gaussian(const GaussianComponent& g, Rng& rng);

/// Draws up to n anchors: pick a component (gamma for uniform, (1-gamma) w_k
/// for Gaussian k), draw, snap to the pixel grid, and reject draws that leave
/// the anchor domain or violate conditioned_accept. Stops early after
/// max_attempts draws; the shortfall is reported in the PatchSet.
PatchSet sample_patches(const MixturePdf& pdf, const SamplerOptions& options, GaussianDrawTrace* trace = nullptr);

/// Unconstrained uniform patch sampler (the baseline): n anchors drawn
/// uniformly from the anchor domain, overlaps allowed.
PatchSet sample_patches_random(int width, int height, const SamplerOptions& options);

struct SamplerEfficiency {
    double valid_rays = 0.0;          // N_v
    double valid_crucial_rays = 0.0;  // N_vc
    double crucial_ratio_percent = 0.0;  // psi_v
    std::size_t runs = 0;
};

/// Coverage footprint of a PatchSet as a mask.
Mask patch_footprint(const PatchSet& set, int width, int height);

/// N_v = mean unique covered pixels per run, N_vc = mean covered pixels inside
/// the run's crucial mask, psi_v = mean per-run N_vc / N_v in percent.
SamplerEfficiency sampler_efficiency(std::span<const PatchSet> runs, std::span<const Mask> crucial_masks);
/// Same, with one mask shared by every run.
SamplerEfficiency sampler_efficiency(std::span<const PatchSet> runs, const Mask& crucial_mask);

/// Pixels inside any Gaussian-strategy instance's bounding box.
Mask crucial_mask(std::span<const InstanceMeta> instances, const SamplingStrategyTable& table, int width,
                  int height);

/// PDF sampled at every pixel center (for heatmaps and integration).
Raster<float> pdf_heatmap(const MixturePdf& pdf);

}  // namespace occ
