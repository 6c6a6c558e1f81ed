// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#include "occ/cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <random>

#include <CLI11.hpp>

#include "occ/depth_align.hpp"
#include "occ/io.hpp"
#include "occ/occupancy_eval.hpp"
#include "occ/parallel.hpp"
#include "occ/patch_sampler.hpp"
#include "occ/photometric.hpp"
#include "occ/volume_render.hpp"

namespace occ::cli {

namespace fs = std::filesystem;
using nlohmann::json;

AnalyticView trace_view(const AnalyticField& field, const CameraIntrinsics& K, const Pose& pose,
                        unsigned parallelism) {
    K.validate();
    AnalyticView view{Image(K.width, K.height), DepthMap(K.width, K.height, kInvalidDepth)};
    const Color bg = field.background();
    parallel_for(static_cast<std::size_t>(K.height), parallelism, [&](std::size_t row) {
        const int v = static_cast<int>(row);
        for (int u = 0; u < K.width; ++u) {
            const Pixel x{double(u), double(v)};
            const Ray ray = ray_through_pixel(K, pose, x);
            const auto hit = field.first_hit(ray);
            if (!hit) {
                view.rgb(u, v) = bg.cast<float>();
                continue;
            }
            view.rgb(u, v) = field.primitives()[hit->primitive].color.cast<float>();
            if (hit->distance > 0.0)
                view.depth(u, v) = static_cast<float>(distance_to_planar_depth(K, x, hit->distance));
        }
    });
    return view;
}

DepthMap make_pseudo_depth(const DepthMap& gt, const PseudoDepthSpec& spec, std::uint64_t seed) {
    DepthMap out(gt.width(), gt.height(), kInvalidDepth);
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (!is_valid_depth(gt[i])) continue;
        switch (spec.mode) {
            case PseudoDepthSpec::Mode::Exact:
                out[i] = gt[i];
                break;
            case PseudoDepthSpec::Mode::Scaled:
                out[i] = static_cast<float>(spec.scale * double(gt[i]));
                break;
            case PseudoDepthSpec::Mode::Noise:
                out[i] = static_cast<float>(spec.scale * double(gt[i]) * std::exp(spec.relative_std * noise(rng)));
                break;
        }
    }
    return out;
}

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string out_dir;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "Run configuration (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Override the configured seed");
    cmd->add_option("--threads", c.threads, "Override the configured thread count")->check(CLI::PositiveNumber);
    cmd->add_option("--out", c.out_dir, "Output directory")->required();
}

RunConfig effective_config(const Common& c) {
    RunConfig config = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
    if (c.seed) config.seed = *c.seed;
    if (c.threads) config.threads = *c.threads;
    config.validate();
    return config;
}

std::string frame_name(std::size_t index, const std::string& ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06zu%s", index, ext.c_str());
    return buf;
}

json summary_json(const DistributionSummary& s) {
    return {{"count", s.count},
            {"mean", s.mean},
            {"variance", s.variance},
            {"min", s.min},
            {"max", s.max},
            {"range", s.range()},
            {"quantiles", {{"p05", s.quantiles[0]}, {"p25", s.quantiles[1]}, {"p50", s.quantiles[2]},
                           {"p75", s.quantiles[3]}, {"p95", s.quantiles[4]}}},
            {"histogram", {{"lo", s.hist_lo}, {"hi", s.hist_hi}, {"counts", s.histogram}}}};
}

json depth_report_json(const DepthEvalReport& r) {
    return {{"abs_rel", r.abs_rel},
            {"sq_rel", r.sq_rel},
            {"rmse", r.rmse},
            {"rmse_log", r.rmse_log},
            {"delta1", r.delta1},
            {"delta2", r.delta2},
            {"delta3", r.delta3},
            {"scaling", r.scaling == DepthScaling::Median ? "median" : "none"},
            {"scale_factor", r.scale_factor},
            {"pixels", r.pixels}};
}

json occupancy_json(const OccupancyMetrics& m) {
    json j = {{"o_acc", m.o_acc},
              {"voxels", m.voxels},
              {"invisible", m.invisible},
              {"invisible_occupied", m.invisible_occupied}};
    j["ie_acc"] = m.ie_acc ? json(*m.ie_acc) : json(nullptr);
    j["ie_rec"] = m.ie_rec ? json(*m.ie_rec) : json(nullptr);
    return j;
}

std::size_t valid_count(const DepthMap& d) {
    std::size_t n = 0;
    for (float x : d.values()) n += is_valid_depth(x) ? 1 : 0;
    return n;
}

/// Instances plus image size, from a scene file or an instance list.
struct SamplerInputs {
    std::vector<InstanceMeta> instances;
    int width = 0;
    int height = 0;
    json description;
};

struct SamplerArgs {
    std::string scene;
    std::string instances;
    int width = 640;
    int height = 192;
};

void add_sampler_inputs(CLI::App* cmd, SamplerArgs& a) {
    auto* scene = cmd->add_option("--scene", a.scene, "Scene descriptor supplying instances and image size")
                      ->check(CLI::ExistingFile);
    auto* inst = cmd->add_option("--instances", a.instances, "Instance metadata list (JSON)")->check(CLI::ExistingFile);
    scene->excludes(inst);
    cmd->add_option("--width", a.width, "Image width when --instances is used")->check(CLI::PositiveNumber);
    cmd->add_option("--height", a.height, "Image height when --instances is used")->check(CLI::PositiveNumber);
}

SamplerInputs sampler_inputs(const SamplerArgs& a) {
    SamplerInputs in;
    if (!a.scene.empty()) {
        const auto scene = load_scene(a.scene);
        in.instances = scene.instances;
        in.width = scene.intrinsics.width;
        in.height = scene.intrinsics.height;
        in.description = {{"scene", a.scene}};
    } else {
        if (!a.instances.empty()) in.instances = load_instances(a.instances);
        in.width = a.width;
        in.height = a.height;
        in.description = {{"instances", a.instances}, {"width", a.width}, {"height", a.height}};
    }
    return in;
}

json mixture_json(const MixturePdf& pdf, std::span<const InstanceMeta> instances) {
    json gaussians = json::array();
    for (const auto& g : pdf.gaussians)
        gaussians.push_back({{"instance", g.instance},
                             {"category", instances[g.instance].category},
                             {"mean", {g.mean.u, g.mean.v}},
                             {"sigma", {g.sigma_u(), g.sigma_v()}},
                             {"weight", g.weight}});
    json uniform = json::array();
    for (const auto& r : pdf.uniform_regions) uniform.push_back({{"category", r.category}, {"area", r.area}});
    return {{"gamma", pdf.gamma},
            {"effective_gamma", pdf.effective_gamma()},
            {"gaussians", gaussians},
            {"uniform_regions", uniform},
            {"registered_uniform_area", pdf.registered_uniform_area},
            {"uniform_support_area", pdf.uniform_area}};
}

json anchors_json(const PatchSet& set) {
    json anchors = json::array();
    for (const auto& a : set.anchors) anchors.push_back({a.u, a.v});
    return {{"patch_size", set.patch_size},
            {"requested", set.requested},
            {"anchors", anchors},
            {"attempts", set.attempts},
            {"rejected", set.rejected_count},
            {"rejected_out_of_domain", set.rejected_out_of_domain},
            {"rejected_overlap", set.rejected_overlap},
            {"complete", set.complete()}};
}

/// Writes report.json and echoes it on `out`.
void emit_report(const fs::path& out_dir, const std::string& command, const RunConfig& config, json inputs,
                 json results, std::vector<std::string> outputs, std::ostream& out) {
    outputs.push_back("report.json");
    std::sort(outputs.begin(), outputs.end());
    json report = {{"command", command},
                   {"config", config_to_json(config)},
                   {"inputs", std::move(inputs)},
                   {"results", std::move(results)},
                   {"outputs", outputs}};
    io::write_json(out_dir / "report.json", report);
    out << report.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string scene;
};

void cmd_synth(const Common& common, const SynthArgs& a, std::ostream& out) {
    const RunConfig config = effective_config(common);
    const auto scene = load_scene(a.scene);
    const AnalyticField field = scene.field();
    const fs::path dir = common.out_dir;

    std::vector<Pose> poses{scene.camera_pose};
    poses.insert(poses.end(), scene.aux_poses.begin(), scene.aux_poses.end());

    std::vector<std::string> outputs;
    json frames = json::array();
    json stats = json::array();
    const std::uint64_t pseudo_seed = derive_seed(config.seed, "pseudo_depth");
    for (std::size_t i = 0; i < poses.size(); ++i) {
        const AnalyticView view = trace_view(field, scene.intrinsics, poses[i], config.threads);
        const DepthMap pseudo = make_pseudo_depth(view.depth, scene.pseudo_depth, derive_seed(pseudo_seed, i));
        const std::string image = "images/" + frame_name(i, ".ppm");
        const std::string gt = "depth_gt/" + frame_name(i, ".pfm");
        const std::string ps = "depth_pseudo/" + frame_name(i, ".pfm");
        io::write_ppm(dir / image, view.rgb);
        io::write_pfm(dir / gt, view.depth);
        io::write_pfm(dir / ps, pseudo);
        outputs.insert(outputs.end(), {image, gt, ps});
        frames.push_back({{"index", i}, {"image", image}, {"depth_gt", gt}, {"depth_pseudo", ps},
                          {"pose", pose_to_json(poses[i])}});
        double lo = 0.0, hi = 0.0;
        bool any = false;
        for (float d : view.depth.values()) {
            if (!is_valid_depth(d)) continue;
            lo = any ? std::min(lo, double(d)) : d;
            hi = any ? std::max(hi, double(d)) : d;
            any = true;
        }
        stats.push_back({{"index", i},
                         {"valid_depth_pixels", valid_count(view.depth)},
                         {"depth_min", any ? json(lo) : json(nullptr)},
                         {"depth_max", any ? json(hi) : json(nullptr)}});
    }
    const std::string inst = "instances/" + frame_name(0, ".json");
    io::write_json(dir / inst, instances_to_json(scene.instances));
    io::write_json(dir / "poses.json", {{"intrinsics", intrinsics_to_json(scene.intrinsics)}, {"frames", frames}});
    outputs.insert(outputs.end(), {inst, "poses.json"});

    const char* mode = scene.pseudo_depth.mode == PseudoDepthSpec::Mode::Exact    ? "exact"
                       : scene.pseudo_depth.mode == PseudoDepthSpec::Mode::Scaled ? "scaled"
                                                                                  : "noise";
    emit_report(dir, "synth", config, {{"scene", a.scene}},
                {{"frames", stats},
                 {"instances", scene.instances.size()},
                 {"primitives", scene.primitives.size()},
                 {"pseudo_depth", {{"mode", mode}, {"scale", scene.pseudo_depth.scale},
                                   {"relative_std", scene.pseudo_depth.relative_std}}}},
                outputs, out);
}

// ---------------------------------------------------------------------------

struct RenderArgs {
    std::string scene;
    std::string grid;
    std::size_t view = 0;
};

Pose view_pose(const SceneDescriptor& scene, std::size_t view) {
    if (view == 0) return scene.camera_pose;
    require(view <= scene.aux_poses.size(), "view index " + std::to_string(view) + " is out of range");
    return scene.aux_poses[view - 1];
}

void cmd_render(const Common& common, const RenderArgs& a, std::ostream& out) {
    const RunConfig config = effective_config(common);
    const auto scene = load_scene(a.scene);
    const AnalyticField analytic = scene.field();
    const fs::path dir = common.out_dir;
    const Pose pose = view_pose(scene, a.view);
    const RaySampling sampling = config.ray_sampling();
    std::vector<std::string> outputs;

    std::optional<GridField> grid;
    std::string field_kind = "analytic";
    if (!a.grid.empty()) {
        grid = io::load_grid_field(a.grid);
        field_kind = "grid_file";
    } else if (config.render.grid_resolution) {
        grid = GridField::sample(analytic, *config.render.grid_resolution, config.render.grid_bounds);
        io::save_grid_field(dir / "field", *grid);
        outputs.insert(outputs.end(), {"field.bin", "field.json"});
        field_kind = "baked_grid";
    }
    const DensityField& field = grid ? static_cast<const DensityField&>(*grid) : analytic;
    const RenderedImage img = render_image(field, scene.intrinsics, pose, sampling, config.threads);

    const CameraIntrinsics& K = scene.intrinsics;
    DepthMap planar(K.width, K.height, kInvalidDepth);
    std::size_t hits = 0, within_bin = 0;
    double max_err = 0.0, sum_err = 0.0;
    for (int v = 0; v < K.height; ++v)
        for (int u = 0; u < K.width; ++u) {
            const Pixel x{double(u), double(v)};
            const double dist = img.distance(u, v);
            if (std::isfinite(dist) && dist > 0.0) planar(u, v) = float(distance_to_planar_depth(K, x, dist));
            const auto hit = analytic_first_hit(analytic, ray_through_pixel(K, pose, x));
            if (!hit || *hit < sampling.near || *hit > sampling.far) continue;
            const double err = std::abs(dist - *hit);
            ++hits;
            within_bin += err <= sampling.bin_length() ? 1 : 0;
            max_err = std::max(max_err, err);
            sum_err += err;
        }
    io::write_ppm(dir / "rgb.ppm", img.rgb);
    io::write_pfm(dir / "distance.pfm", img.distance);
    io::write_pfm(dir / "depth.pfm", planar);
    io::write_pfm(dir / "transmittance.pfm", img.transmittance);
    outputs.insert(outputs.end(), {"rgb.ppm", "distance.pfm", "depth.pfm", "transmittance.pfm"});

    json results = {{"field", field_kind},
                    {"view", a.view},
                    {"bin_length", sampling.bin_length()},
                    {"surface_pixels", hits},
                    {"surface_within_one_bin", within_bin}};
    results["surface_error_max"] = hits ? json(max_err) : json(nullptr);
    results["surface_error_mean"] = hits ? json(sum_err / double(hits)) : json(nullptr);
    json inputs = {{"scene", a.scene}};
    if (!a.grid.empty()) inputs["grid"] = a.grid;
    emit_report(dir, "render", config, inputs, results, outputs, out);
}

// ---------------------------------------------------------------------------

struct SampleArgs {
    SamplerArgs inputs;
    std::string image;
};

void draw_patch_outline(Image& img, const Pixel& anchor, int l, const Rgb& color) {
    const int u0 = patch_origin(anchor.u, l);
    const int v0 = patch_origin(anchor.v, l);
    for (int d = 0; d < l; ++d) {
        for (const auto& [u, v] : {std::pair{u0 + d, v0}, {u0 + d, v0 + l - 1}, {u0, v0 + d}, {u0 + l - 1, v0 + d}})
            if (img.contains(u, v)) img(u, v) = color;
    }
}

void cmd_sample(const Common& common, const SampleArgs& a, std::ostream& out) {
    const RunConfig config = effective_config(common);
    const SamplerInputs in = sampler_inputs(a.inputs);
    const fs::path dir = common.out_dir;
    const auto table = SamplingStrategyTable::standard();
    const MixturePdf pdf = build_mixture(in.instances, table, config.sampler.gamma, in.width, in.height);
    SamplerOptions opts{config.sampler.num_patches, config.sampler.patch_size, derive_seed(config.seed, "sampler"),
                        config.sampler.max_attempts};
    const PatchSet set = sample_patches(pdf, opts);

    const Raster<float> heat = pdf_heatmap(pdf);
    io::write_pfm(dir / "pdf.pfm", heat);
    Image overlay;
    if (!a.image.empty()) {
        overlay = io::read_ppm(a.image);
        require(overlay.same_shape(in.width, in.height), "sample: --image does not match the instance image size");
    } else {
        float peak = 0.0f;
        for (float p : heat.values()) peak = std::max(peak, p);
        overlay = Image(in.width, in.height);
        for (std::size_t i = 0; i < heat.size(); ++i) overlay[i] = Rgb::Constant(peak > 0 ? heat[i] / peak : 0.0f);
    }
    for (const auto& anchor : set.anchors) draw_patch_outline(overlay, anchor, set.patch_size, Rgb(1.0f, 0.0f, 0.0f));
    io::write_ppm(dir / "overlay.ppm", overlay);
    io::write_json(dir / "anchors.json", anchors_json(set));

    const Mask crucial = crucial_mask(in.instances, table, in.width, in.height);
    const auto eff = sampler_efficiency(std::span(&set, 1), crucial);
    json inputs = in.description;
    if (!a.image.empty()) inputs["image"] = a.image;
    emit_report(dir, "sample", config, inputs,
                {{"mixture", mixture_json(pdf, in.instances)},
                 {"patches", anchors_json(set)},
                 {"valid_rays", eff.valid_rays},
                 {"valid_crucial_rays", eff.valid_crucial_rays},
                 {"crucial_ratio_percent", eff.crucial_ratio_percent}},
                {"pdf.pfm", "overlay.ppm", "anchors.json"}, out);
}

// ---------------------------------------------------------------------------

struct AlignArgs {
    std::string pseudo;
    std::string gt;
};

void cmd_align(const Common& common, const AlignArgs& a, std::ostream& out) {
    const RunConfig config = effective_config(common);
    const DepthMap pseudo = io::read_pfm(a.pseudo);
    const DepthMap gt = io::read_pfm(a.gt);
    require(pseudo.same_shape(gt), "align: pseudo and gt depth sizes differ");
    const fs::path dir = common.out_dir;

    const auto targets = targets_from_depth(pseudo, gt, config.align.target_stride);
    const FitResult fit = fit_residual(pseudo, targets, config.align.fit);
    const DepthMap refined = refine_depth(pseudo, fit.field, config.align.fit.epsilon);
    io::write_pfm(dir / "refined.pfm", refined);
    io::write_pfm(dir / "residual.pfm", fit.field.to_raster());
    io::save_residual_field(dir / "residual", fit.field);

    const auto before = depth_metrics(pseudo, gt, config.eval.depth_cap, DepthScaling::None);
    const auto after = depth_metrics(refined, gt, config.eval.depth_cap, DepthScaling::None);
    const auto stats = residual_statistics(pseudo, gt);
    emit_report(dir, "align", config, {{"pseudo", a.pseudo}, {"gt", a.gt}},
                {{"targets", targets.size()},
                 {"initial_loss", fit.initial_loss},
                 {"final_loss", fit.final_loss},
                 {"iterations", fit.iterations},
                 {"before", depth_report_json(before)},
                 {"after", depth_report_json(after)},
                 {"residuals", {{"depth", summary_json(stats.depth)}, {"inverse_depth", summary_json(stats.inverse)}}}},
                {"refined.pfm", "residual.pfm", "residual.bin", "residual.json"}, out);
}

// ---------------------------------------------------------------------------

struct LossArgs {
    std::string scene;
    std::string bundle;
    std::string depth;
    std::size_t source_view = 1;
};

void cmd_loss(const Common& common, const LossArgs& a, std::ostream& out) {
    const RunConfig config = effective_config(common);
    const auto scene = load_scene(a.scene);
    const CameraIntrinsics& K = scene.intrinsics;
    const fs::path bundle = a.bundle;
    const fs::path dir = common.out_dir;
    require(a.source_view >= 1, "loss: --source-view must be >= 1");

    const Image target = io::read_ppm(bundle / "images" / frame_name(0, ".ppm"));
    const Image source = io::read_ppm(bundle / "images" / frame_name(a.source_view, ".ppm"));
    const fs::path depth_path = a.depth.empty() ? bundle / "depth_gt" / frame_name(0, ".pfm") : fs::path(a.depth);
    const DepthMap depth = io::read_pfm(depth_path);
    require(target.same_shape(K.width, K.height) && source.same_shape(target) && depth.same_shape(target),
            "loss: bundle rasters do not match the scene intrinsics");

    // Target-camera coordinates -> source-camera coordinates.
    const Pose target_to_source = view_pose(scene, a.source_view).inverse() * scene.camera_pose;
    const WarpResult warp = warp_image(source, depth, K, target_to_source);
    const Raster<float> mask = weight_mask(warp.validity);
    std::optional<double> l_ta;
    std::size_t warp_support = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) warp_support += (warp.validity[i] && mask[i] > 0.0f) ? 1 : 0;
    if (warp_support > 0) l_ta = temporal_alignment_loss(target, warp, mask);

    // Patch renders at sampler anchors.
    const auto table = SamplingStrategyTable::standard();
    const MixturePdf pdf = build_mixture(scene.instances, table, config.sampler.gamma, K.width, K.height);
    SamplerOptions opts{config.sampler.num_patches, config.sampler.patch_size, derive_seed(config.seed, "sampler"),
                        config.sampler.max_attempts};
    const PatchSet set = sample_patches(pdf, opts);
    const AnalyticField field = scene.field();
    const RaySampling sampling = config.ray_sampling();
    DepthMap rendered_distance(K.width, K.height, kInvalidDepth);
    std::vector<Image> reference, rendered;
    for (const auto& anchor : set.anchors) {
        const RenderedPatch p = render_patch(field, K, scene.camera_pose, anchor, set.patch_size, sampling,
                                             config.threads);
        Image ref(p.size, p.size);
        for (int dv = 0; dv < p.size; ++dv)
            for (int du = 0; du < p.size; ++du) {
                ref(du, dv) = target(p.u0 + du, p.v0 + dv);
                rendered_distance(p.u0 + du, p.v0 + dv) = p.distance(du, dv);
            }
        reference.push_back(std::move(ref));
        rendered.push_back(p.rgb);
    }
    const SupportedLoss l_d = depth_reconstruction_loss(rendered_distance, depth, K);
    const double l_rgb = rgb_reconstruction_loss(reference, rendered, config.loss);
    json results = {{"temporal_support", warp_support},
                    {"depth_consistency", l_d.support ? json(l_d.value) : json(nullptr)},
                    {"depth_support", l_d.support},
                    {"rgb_consistency", l_rgb},
                    {"patches", set.anchors.size()},
                    {"bin_length", sampling.bin_length()}};
    results["temporal_alignment"] = l_ta ? json(*l_ta) : json(nullptr);
    if (l_ta && l_d.support)
        results["total"] = total_loss(*l_ta, l_d.value, l_rgb, config.loss);
    else
        results["total"] = nullptr;
    io::write_ppm(dir / "warped.ppm", warp.warped);
    io::write_pfm(dir / "rendered_distance.pfm", rendered_distance);
    emit_report(dir, "loss", config,
                {{"scene", a.scene}, {"bundle", a.bundle}, {"depth", depth_path.string()},
                 {"source_view", a.source_view}},
                results, {"warped.ppm", "rendered_distance.pfm"}, out);
}

// ---------------------------------------------------------------------------

struct EvalOccArgs {
    std::string scene;
    std::string grid;
    std::string depth;
};

void cmd_eval_occ(const Common& common, const EvalOccArgs& a, std::ostream& out) {
    const RunConfig config = effective_config(common);
    const auto scene = load_scene(a.scene);
    const AnalyticField field = scene.field();
    const Camera camera = scene.camera();
    const EvalCuboid& cuboid = config.eval.cuboid;
    const fs::path dir = common.out_dir;

    std::vector<Sweep> sweeps;
    for (const auto& s : scene.sweeps) sweeps.push_back(s.build(cuboid, camera));
    VoxelGrid gt = carve_ground_truth(field, sweeps, cuboid, camera);
    const AnalyticView view = trace_view(field, scene.intrinsics, scene.camera_pose, config.threads);
    visibility_partition(gt, scene.intrinsics, view.depth);

    std::string kind = "analytic";
    std::optional<VoxelGrid> pred;
    if (!a.depth.empty()) {
        pred = depth_to_occupancy_band(io::read_pfm(a.depth), scene.intrinsics, cuboid, config.eval.band);
        kind = "depth_band";
    } else if (!a.grid.empty()) {
        pred = voxelize_prediction(io::load_grid_field(a.grid), cuboid, camera, config.eval.tau, config.threads);
        kind = "grid";
    } else {
        pred = voxelize_prediction(field, cuboid, camera, config.eval.tau, config.threads);
    }
    pred->visibility = gt.visibility;
    const OccupancyMetrics m = occupancy_metrics(*pred, gt);
    io::save_voxel_grid(dir / "gt", gt);
    io::save_voxel_grid(dir / "pred", *pred);

    json inputs = {{"scene", a.scene}};
    if (!a.grid.empty()) inputs["grid"] = a.grid;
    if (!a.depth.empty()) inputs["depth"] = a.depth;
    emit_report(dir, "eval-occ", config, inputs,
                {{"prediction", kind},
                 {"metrics", occupancy_json(m)},
                 {"gt_occupied", gt.occupied_count()},
                 {"pred_occupied", pred->occupied_count()},
                 {"sweeps", sweeps.size()}},
                {"gt.json", "gt.occupancy.bin", "gt.visibility.bin", "pred.json", "pred.occupancy.bin",
                 "pred.visibility.bin"},
                out);
}

// ---------------------------------------------------------------------------

struct EvalDepthArgs {
    std::string pred;
    std::string gt;
};

void cmd_eval_depth(const Common& common, const EvalDepthArgs& a, std::ostream& out) {
    const RunConfig config = effective_config(common);
    const DepthMap pred = io::read_pfm(a.pred);
    const DepthMap gt = io::read_pfm(a.gt);
    require(pred.same_shape(gt), "eval-depth: prediction and gt sizes differ");
    const auto r = depth_metrics(pred, gt, config.eval.depth_cap, config.eval.scaling);
    emit_report(common.out_dir, "eval-depth", config, {{"pred", a.pred}, {"gt", a.gt}},
                {{"metrics", depth_report_json(r)}}, {}, out);
}

// ---------------------------------------------------------------------------

json efficiency_json(const SamplerEfficiency& e, std::span<const PatchSet> runs) {
    std::size_t complete = 0, attempts = 0, out_of_domain = 0, overlap = 0;
    for (const auto& r : runs) {
        complete += r.complete() ? 1 : 0;
        attempts += r.attempts;
        out_of_domain += r.rejected_out_of_domain;
        overlap += r.rejected_overlap;
    }
    const double n = double(runs.size());
    return {{"valid_rays", e.valid_rays},
            {"valid_crucial_rays", e.valid_crucial_rays},
            {"crucial_ratio_percent", e.crucial_ratio_percent},
            {"runs", e.runs},
            {"complete_runs", complete},
            {"mean_attempts", attempts / n},
            {"mean_rejected_out_of_domain", out_of_domain / n},
            {"mean_rejected_overlap", overlap / n}};
}

void cmd_bench_sampler(const Common& common, const SamplerArgs& a, std::ostream& out) {
    const RunConfig config = effective_config(common);
    const SamplerInputs in = sampler_inputs(a);
    const auto table = SamplingStrategyTable::standard();
    const MixturePdf pdf = build_mixture(in.instances, table, config.sampler.gamma, in.width, in.height);
    const Mask crucial = crucial_mask(in.instances, table, in.width, in.height);
    const std::size_t runs = config.sampler.runs;

    const std::uint64_t guided_seed = derive_seed(config.seed, "sampler");
    const std::uint64_t random_seed = derive_seed(config.seed, "random_sampler");
    std::vector<PatchSet> guided(runs), random(runs);
    parallel_for(runs, config.threads, [&](std::size_t r) {
        SamplerOptions opts{config.sampler.num_patches, config.sampler.patch_size, derive_seed(guided_seed, r),
                            config.sampler.max_attempts};
        guided[r] = sample_patches(pdf, opts);
        opts.seed = derive_seed(random_seed, r);
        random[r] = sample_patches_random(in.width, in.height, opts);
    });
    const auto e_guided = sampler_efficiency(guided, crucial);
    const auto e_random = sampler_efficiency(random, crucial);
    emit_report(common.out_dir, "bench-sampler", config, in.description,
                {{"mixture", mixture_json(pdf, in.instances)},
                 {"instance_aware", efficiency_json(e_guided, guided)},
                 {"random", efficiency_json(e_random, random)},
                 {"valid_ray_gain_percent", 100.0 * (e_guided.valid_rays - e_random.valid_rays) / e_random.valid_rays}},
                {}, out);
}

json error_json(std::string_view kind, const std::string& message, const std::string& command) {
    return {{"error", {{"kind", kind}, {"message", message}, {"command", command}}}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Occupancy-prediction core: rendering, sampling, alignment, losses and evaluation."};
    app.name("occ");
    app.require_subcommand(1, 1);

    Common common;
    SynthArgs synth;
    RenderArgs render;
    SampleArgs sample;
    AlignArgs align;
    LossArgs loss;
    EvalOccArgs eval_occ;
    EvalDepthArgs eval_depth;
    SamplerArgs bench;
    std::function<void()> action;

    auto* c_synth = app.add_subcommand("synth", "Generate a fixture bundle from a scene descriptor");
    add_common(c_synth, common);
    c_synth->add_option("--scene", synth.scene, "Scene descriptor (JSON)")->required()->check(CLI::ExistingFile);
    c_synth->callback([&] { action = [&] { cmd_synth(common, synth, out); }; });

    auto* c_render = app.add_subcommand("render", "Volume-render a view of the scene");
    add_common(c_render, common);
    c_render->add_option("--scene", render.scene, "Scene descriptor (JSON)")->required()->check(CLI::ExistingFile);
    c_render->add_option("--grid", render.grid, "Render a saved grid field (path stem) instead of the scene");
    c_render->add_option("--view", render.view, "0 = evaluation camera, k = k-th auxiliary pose");
    c_render->callback([&] { action = [&] { cmd_render(common, render, out); }; });

    auto* c_sample = app.add_subcommand("sample", "Draw one patch set with the instance-aware sampler");
    add_common(c_sample, common);
    add_sampler_inputs(c_sample, sample.inputs);
    c_sample->add_option("--image", sample.image, "Background image (PPM) for the overlay")->check(CLI::ExistingFile);
    c_sample->callback([&] { action = [&] { cmd_sample(common, sample, out); }; });

    auto* c_align = app.add_subcommand("align", "Fit an inverse-depth residual to align pseudo depth with gt");
    add_common(c_align, common);
    c_align->add_option("--pseudo", align.pseudo, "Pseudo depth (PFM)")->required()->check(CLI::ExistingFile);
    c_align->add_option("--gt", align.gt, "Reference depth (PFM)")->required()->check(CLI::ExistingFile);
    c_align->callback([&] { action = [&] { cmd_align(common, align, out); }; });

    auto* c_loss = app.add_subcommand("loss", "Evaluate the training losses on a fixture bundle");
    add_common(c_loss, common);
    c_loss->add_option("--scene", loss.scene, "Scene descriptor (JSON)")->required()->check(CLI::ExistingFile);
    c_loss->add_option("--bundle", loss.bundle, "Bundle directory written by synth")
        ->required()
        ->check(CLI::ExistingDirectory);
    c_loss->add_option("--depth", loss.depth, "Predicted depth (PFM); defaults to the bundle gt")
        ->check(CLI::ExistingFile);
    c_loss->add_option("--source-view", loss.source_view, "Auxiliary view used as warp source");
    c_loss->callback([&] { action = [&] { cmd_loss(common, loss, out); }; });

    auto* c_occ = app.add_subcommand("eval-occ", "Occupancy metrics against carved ground truth");
    add_common(c_occ, common);
    c_occ->add_option("--scene", eval_occ.scene, "Scene descriptor (JSON)")->required()->check(CLI::ExistingFile);
    auto* o_grid = c_occ->add_option("--grid", eval_occ.grid, "Predicted grid field (path stem)");
    auto* o_depth = c_occ->add_option("--depth", eval_occ.depth, "Depth map (PFM) for the depth-band baseline")
                        ->check(CLI::ExistingFile);
    o_grid->excludes(o_depth);
    c_occ->callback([&] { action = [&] { cmd_eval_occ(common, eval_occ, out); }; });

    auto* c_depth = app.add_subcommand("eval-depth", "Monocular depth metrics");
    add_common(c_depth, common);
    c_depth->add_option("--pred", eval_depth.pred, "Predicted depth (PFM)")->required()->check(CLI::ExistingFile);
    c_depth->add_option("--gt", eval_depth.gt, "Ground-truth depth (PFM)")->required()->check(CLI::ExistingFile);
    c_depth->callback([&] { action = [&] { cmd_eval_depth(common, eval_depth, out); }; });

    auto* c_bench = app.add_subcommand("bench-sampler", "Sampler efficiency over many runs");
    add_common(c_bench, common);
    add_sampler_inputs(c_bench, bench);
    c_bench->callback([&] { action = [&] { cmd_bench_sampler(common, bench, out); }; });

    std::vector<std::string> storage{"occ"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    const auto start = std::chrono::steady_clock::now();
    try {
        action();
    } catch (const Error& e) {
        err << error_json(to_string(e.kind()), e.what(), command).dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << error_json("internal", e.what(), command).dump() << "\n";
        return 1;
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    err << "occ " << command << ": " << ms << " ms\n";
    return 0;
}

}  // namespace occ::cli
