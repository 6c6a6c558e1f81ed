// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#include "occ/patch_sampler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>

#include "occ/error.hpp"

namespace occ {

namespace {

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

struct PixelBox {
    int u0, u1, v0, v1;  // inclusive
};

// Pixel centers inside center +/- half extents, clipped to the image.
std::optional<PixelBox> instance_pixels(const InstanceMeta& inst, int width, int height) {
    PixelBox b{static_cast<int>(std::ceil(inst.center.u - inst.half_width)),
               static_cast<int>(std::floor(inst.center.u + inst.half_width)),
               static_cast<int>(std::ceil(inst.center.v - inst.half_height)),
               static_cast<int>(std::floor(inst.center.v + inst.half_height))};
    b.u0 = std::max(b.u0, 0);
    b.v0 = std::max(b.v0, 0);
    b.u1 = std::min(b.u1, width - 1);
    b.v1 = std::min(b.v1, height - 1);
    if (b.u0 > b.u1 || b.v0 > b.v1) return std::nullopt;
    return b;
}

void fill_box(Mask& mask, const PixelBox& b, std::uint8_t value) {
    for (int v = b.v0; v <= b.v1; ++v)
        for (int u = b.u0; u <= b.u1; ++u) mask(u, v) = value;
}

}  // namespace

SamplingStrategyTable SamplingStrategyTable::standard() {
    SamplingStrategyTable t;
    for (const char* c : {"road", "building", "vegetation", "sky", "unlabeled"}) t.set(c, SamplingStrategy::Uniform);
    for (const char* c : {"car", "pedestrian"}) t.set(c, SamplingStrategy::Gaussian);
    return t;
}

void SamplingStrategyTable::set(const std::string& category, SamplingStrategy strategy) {
    table_[lowercase(category)] = strategy;
}

std::optional<SamplingStrategy> SamplingStrategyTable::find(const std::string& category) const {
    const auto it = table_.find(lowercase(category));
    if (it == table_.end()) return std::nullopt;
    return it->second;
}

SamplingStrategy SamplingStrategyTable::at(const std::string& category) const {
    const auto s = find(category);
    if (!s) throw InvalidArgument("no sampling strategy for category '" + category + "'");
    return *s;
}

MixturePdf build_mixture(std::span<const InstanceMeta> instances, const SamplingStrategyTable& table, double gamma,
                         int width, int height, const MixtureOptions& options) {
    require(gamma >= 0.0 && gamma <= 1.0, "build_mixture: gamma must lie in [0, 1]");
    require(width > 0 && height > 0, "build_mixture: image size must be positive");

    MixturePdf pdf;
    pdf.width = width;
    pdf.height = height;
    pdf.gamma = gamma;

    double log_total = 0.0;
    double instance_area = 0.0;
    for (std::size_t k = 0; k < instances.size(); ++k) {
        const auto& inst = instances[k];
        require(std::isfinite(inst.area) && inst.area >= 0.0, "build_mixture: instance area must be >= 0");
        instance_area += inst.area;
        if (table.at(inst.category) == SamplingStrategy::Uniform) {
            pdf.uniform_regions.push_back({lowercase(inst.category), inst.area});
            pdf.registered_uniform_area += inst.area;
            continue;
        }
        require(inst.half_height > 0.0 && inst.half_width > 0.0,
                "build_mixture: Gaussian instance half extents must be positive");
        require(inst.area > 1.0, "build_mixture: Gaussian instance area must exceed 1 (log-space weights)");
        GaussianComponent g;
        g.mean = inst.center;
        g.variance_u = inst.half_width * inst.half_width / 4.0;
        g.variance_v = inst.half_height * inst.half_height / 4.0;
        g.weight = std::log(inst.area);
        g.instance = k;
        log_total += g.weight;
        pdf.gaussians.push_back(g);
    }
    for (auto& g : pdf.gaussians) g.weight /= log_total;

    const double background = std::max(0.0, double(width) * height - instance_area);
    pdf.uniform_regions.push_back({"unlabeled", background});
    pdf.registered_uniform_area += background;

    if (options.uniform_support) {
        require(options.uniform_support->same_shape(width, height), "build_mixture: uniform support size mismatch");
        pdf.uniform_support = *options.uniform_support;
    } else {
        pdf.uniform_support = Mask(width, height, 1);
        for (const auto& g : pdf.gaussians)
            if (auto box = instance_pixels(instances[g.instance], width, height)) fill_box(pdf.uniform_support, *box, 0);
    }
    for (std::size_t i = 0; i < pdf.uniform_support.size(); ++i)
        if (pdf.uniform_support[i]) pdf.uniform_pixels.push_back(static_cast<std::uint32_t>(i));
    if (pdf.uniform_pixels.empty()) {
        // Gaussian boxes cover the frame; fall back to the whole image.
        pdf.uniform_support = Mask(width, height, 1);
        pdf.uniform_pixels.resize(pdf.uniform_support.size());
        for (std::size_t i = 0; i < pdf.uniform_pixels.size(); ++i) pdf.uniform_pixels[i] = static_cast<std::uint32_t>(i);
    }
    pdf.uniform_area = static_cast<double>(pdf.uniform_pixels.size());
    return pdf;
}

double pdf_eval(const MixturePdf& pdf, const Pixel& x) {
    if (!(x.u >= -0.5 && x.v >= -0.5 && x.u <= pdf.width - 0.5 && x.v <= pdf.height - 0.5)) return 0.0;
    const double gamma = pdf.effective_gamma();
    double gauss = 0.0;
    for (const auto& g : pdf.gaussians) {
        const double du = x.u - g.mean.u;
        const double dv = x.v - g.mean.v;
        const double q = du * du / g.variance_u + dv * dv / g.variance_v;
        gauss += g.weight * std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(g.variance_u * g.variance_v));
    }
    const int pu = std::clamp(static_cast<int>(std::lround(x.u)), 0, pdf.width - 1);
    const int pv = std::clamp(static_cast<int>(std::lround(x.v)), 0, pdf.height - 1);
    const double uniform = pdf.uniform_support(pu, pv) ? 1.0 / pdf.uniform_area : 0.0;
    return (1.0 - gamma) * gauss + gamma * uniform;
}

bool conditioned_accept(std::span<const Pixel> anchors, const Pixel& x, int patch_size) {
    const double limit = 2.0 * double(patch_size) * double(patch_size);
    for (const auto& a : anchors) {
        const double du = x.u - a.u;
        const double dv = x.v - a.v;
        if (du * du + dv * dv < limit) return false;
    }
    return true;
}

AnchorDomain anchor_domain(int width, int height, int patch_size) {
    // Anchor a covers pixels [origin(a), origin(a) + l - 1] with origin(a) = floor(a - l/2 + 1/2).
    const int lead = patch_size / 2;
    return {lead, width - patch_size + lead, lead, height - patch_size + lead};
}

Pixel draw_gaussian(const GaussianComponent& g, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double u = g.mean.u + g.sigma_u() * normal(rng);
    const double v = g.mean.v + g.sigma_v() * normal(rng);
    return {u, v};
}

PatchSet sample_patches(const MixturePdf& pdf, const SamplerOptions& options, GaussianDrawTrace* trace) {
    require(options.num_patches >= 1, "sample_patches: n must be >= 1");
    require(options.patch_size >= 1, "sample_patches: patch size must be >= 1");
    const AnchorDomain domain = anchor_domain(pdf.width, pdf.height, options.patch_size);
    require(domain.u_min <= domain.u_max && domain.v_min <= domain.v_max,
            "sample_patches: image is smaller than one patch");

    PatchSet set;
    set.patch_size = options.patch_size;
    set.requested = options.num_patches;
    set.anchors.reserve(options.num_patches);

    const double gamma = pdf.effective_gamma();
    std::vector<double> component_weights;
    component_weights.reserve(pdf.gaussians.size() + 1);
    for (const auto& g : pdf.gaussians) component_weights.push_back((1.0 - gamma) * g.weight);
    component_weights.push_back(gamma);
    std::discrete_distribution<std::size_t> pick(component_weights.begin(), component_weights.end());
    std::uniform_int_distribution<std::size_t> pick_pixel(0, pdf.uniform_pixels.size() - 1);

    Rng rng(options.seed);
    while (set.anchors.size() < options.num_patches && set.attempts < options.max_attempts) {
        ++set.attempts;
        const std::size_t c = pick(rng);
        Pixel anchor;
        if (c < pdf.gaussians.size()) {
            const auto& g = pdf.gaussians[c];
            const Pixel raw = draw_gaussian(g, rng);
            if (trace) {
                const bool in_u = std::abs(raw.u - g.mean.u) <= 2.0 * g.sigma_u();
                const bool in_v = std::abs(raw.v - g.mean.v) <= 2.0 * g.sigma_v();
                ++trace->draws;
                trace->within_u += in_u;
                trace->within_v += in_v;
                trace->within_box += in_u && in_v;
            }
            anchor = {std::round(raw.u), std::round(raw.v)};
        } else {
            const std::uint32_t idx = pdf.uniform_pixels[pick_pixel(rng)];
            anchor = {double(idx % pdf.width), double(idx / pdf.width)};
        }
        if (!domain.contains(anchor)) {
            ++set.rejected_out_of_domain;
            continue;
        }
        if (!conditioned_accept(set.anchors, anchor, options.patch_size)) {
            ++set.rejected_overlap;
            continue;
        }
        set.anchors.push_back(anchor);
    }
    set.rejected_count = set.rejected_out_of_domain + set.rejected_overlap;
    return set;
}

PatchSet sample_patches_random(int width, int height, const SamplerOptions& options) {
    require(options.num_patches >= 1, "sample_patches_random: n must be >= 1");
    require(options.patch_size >= 1, "sample_patches_random: patch size must be >= 1");
    const AnchorDomain domain = anchor_domain(width, height, options.patch_size);
    require(domain.u_min <= domain.u_max && domain.v_min <= domain.v_max,
            "sample_patches_random: image is smaller than one patch");
    PatchSet set;
    set.patch_size = options.patch_size;
    set.requested = options.num_patches;
    Rng rng(options.seed);
    std::uniform_int_distribution<int> du(domain.u_min, domain.u_max);
    std::uniform_int_distribution<int> dv(domain.v_min, domain.v_max);
    for (std::size_t i = 0; i < options.num_patches; ++i) {
        const int u = du(rng);
        const int v = dv(rng);
        set.anchors.push_back({double(u), double(v)});
    }
    set.attempts = options.num_patches;
    return set;
}

Mask patch_footprint(const PatchSet& set, int width, int height) {
    Mask mask(width, height, 0);
    const int l = set.patch_size;
    for (const auto& a : set.anchors) {
        const int u0 = static_cast<int>(std::floor(a.u - l / 2.0 + 0.5));
        const int v0 = static_cast<int>(std::floor(a.v - l / 2.0 + 0.5));
        for (int v = std::max(v0, 0); v < std::min(v0 + l, height); ++v)
            for (int u = std::max(u0, 0); u < std::min(u0 + l, width); ++u) mask(u, v) = 1;
    }
    return mask;
}

namespace {

SamplerEfficiency efficiency_impl(std::span<const PatchSet> runs, auto&& mask_for_run) {
    require(!runs.empty(), "sampler_efficiency: no runs");
    const Mask& first = mask_for_run(0);
    const int width = first.width();
    const int height = first.height();
    // Generation stamps avoid clearing a coverage raster per run.
    Raster<std::uint32_t> stamp(width, height, 0);
    SamplerEfficiency eff;
    eff.runs = runs.size();
    double sum_valid = 0.0, sum_crucial = 0.0, sum_ratio = 0.0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const Mask& mask = mask_for_run(r);
        require(mask.same_shape(width, height), "sampler_efficiency: mask size mismatch");
        const auto gen = static_cast<std::uint32_t>(r + 1);
        const int l = runs[r].patch_size;
        std::size_t valid = 0, crucial = 0;
        for (const auto& a : runs[r].anchors) {
            const int u0 = static_cast<int>(std::floor(a.u - l / 2.0 + 0.5));
            const int v0 = static_cast<int>(std::floor(a.v - l / 2.0 + 0.5));
            require(u0 >= 0 && v0 >= 0 && u0 + l <= width && v0 + l <= height,
                    "sampler_efficiency: patch outside the mask extent");
            for (int v = v0; v < v0 + l; ++v)
                for (int u = u0; u < u0 + l; ++u) {
                    auto& s = stamp(u, v);
                    if (s == gen) continue;
                    s = gen;
                    ++valid;
                    crucial += mask(u, v) != 0;
                }
        }
        sum_valid += double(valid);
        sum_crucial += double(crucial);
        sum_ratio += valid ? double(crucial) / double(valid) : 0.0;
    }
    const double n = double(runs.size());
    eff.valid_rays = sum_valid / n;
    eff.valid_crucial_rays = sum_crucial / n;
    eff.crucial_ratio_percent = sum_ratio / n * 100.0;
    return eff;
}

}  // namespace

SamplerEfficiency sampler_efficiency(std::span<const PatchSet> runs, std::span<const Mask> crucial_masks) {
    require(crucial_masks.size() == runs.size(), "sampler_efficiency: one crucial mask per run required");
    return efficiency_impl(runs, [&](std::size_t r) -> const Mask& { return crucial_masks[r]; });
}

SamplerEfficiency sampler_efficiency(std::span<const PatchSet> runs, const Mask& crucial_mask) {
    return efficiency_impl(runs, [&](std::size_t) -> const Mask& { return crucial_mask; });
}

Mask crucial_mask(std::span<const InstanceMeta> instances, const SamplingStrategyTable& table, int width,
                  int height) {
    Mask mask(width, height, 0);
    for (const auto& inst : instances)
        if (table.at(inst.category) == SamplingStrategy::Gaussian)
            if (auto box = instance_pixels(inst, width, height)) fill_box(mask, *box, 1);
    return mask;
}

Raster<float> pdf_heatmap(const MixturePdf& pdf) {
    Raster<float> heat(pdf.width, pdf.height, 0.0f);
    for (int v = 0; v < pdf.height; ++v)
        for (int u = 0; u < pdf.width; ++u) heat(u, v) = static_cast<float>(pdf_eval(pdf, {double(u), double(v)}));
    return heat;
}

}  // namespace occ
