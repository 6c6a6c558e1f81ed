// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#include "occ/cli/config.hpp"

#include "occ/cli/json_reader.hpp"
#include "occ/io.hpp"
#include "occ/rng.hpp"

namespace occ::cli {

void RunConfig::validate() const {
    require(threads >= 1, "config: threads must be >= 1");
    require(sampler.num_patches >= 1, "config: sampler.num_patches must be >= 1");
    require(sampler.patch_size >= 1, "config: sampler.patch_size must be >= 1");
    require(sampler.gamma >= 0.0 && sampler.gamma <= 1.0, "config: sampler.gamma must be in [0, 1]");
    require(sampler.max_attempts >= 1, "config: sampler.max_attempts must be >= 1");
    require(sampler.runs >= 1, "config: sampler.runs must be >= 1");
    ray_sampling().validate();
    if (render.grid_resolution)
        for (int n : *render.grid_resolution) require(n >= 2, "config: render.grid_resolution entries must be >= 2");
    loss.validate();
    require(align.fit.grid_rows >= 2 && align.fit.grid_cols >= 2, "config: align grid must be at least 2 x 2");
    require(align.fit.epsilon > 0.0, "config: align.epsilon must be > 0");
    require(align.fit.huber_delta >= 0.0, "config: align.huber_delta must be >= 0");
    require(align.fit.smoothness >= 0.0, "config: align.smoothness must be >= 0");
    require(align.fit.history >= 1, "config: align.history must be >= 1");
    require(align.fit.max_iterations >= 0, "config: align.max_iterations must be >= 0");
    require(align.fit.initial_step > 0.0, "config: align.initial_step must be > 0");
    require(align.target_stride >= 1, "config: align.target_stride must be >= 1");
    eval.cuboid.validate();
    require(eval.tau > 0.0 && eval.tau < 1.0, "config: eval.tau must be in (0, 1)");
    require(eval.depth_cap > 0.0, "config: eval.depth_cap must be > 0");
    require(eval.band >= 0.0, "config: eval.band must be >= 0");
}

RaySampling RunConfig::ray_sampling() const {
    RaySampling s;
    s.near = render.near;
    s.far = render.far;
    s.num_samples = render.num_samples;
    s.mode = render.mode;
    s.expected_depth = render.expected_depth;
    s.seed = derive_seed(seed, "stratification");
    return s;
}

namespace {

std::size_t positive_size(JsonReader& r, const std::string& key, std::size_t fallback) {
    const long long v = r.integer(key, static_cast<long long>(fallback));
    if (v < 1) r.fail(key, "must be >= 1");
    return static_cast<std::size_t>(v);
}

int int_field(JsonReader& r, const std::string& key, int fallback) {
    const long long v = r.integer(key, fallback);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) r.fail(key, "out of range");
    return static_cast<int>(v);
}

std::array<int, 3> resolution_field(JsonReader& r, const std::string& key) {
    const auto v = r.numbers(key, 3);
    std::array<int, 3> out{};
    for (int i = 0; i < 3; ++i) {
        if (v[i] != std::floor(v[i]) || v[i] < 1 || v[i] > 1e6) r.fail(key, "expected positive integers");
        out[i] = static_cast<int>(v[i]);
    }
    return out;
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j, const std::string& source) {
    RunConfig c;
    JsonReader root(j, source);
    c.seed = root.unsigned_integer("seed", c.seed);
    c.threads = static_cast<unsigned>(positive_size(root, "threads", c.threads));

    if (root.has("sampler")) {
        auto s = root.child("sampler");
        c.sampler.num_patches = positive_size(s, "num_patches", c.sampler.num_patches);
        c.sampler.patch_size = int_field(s, "patch_size", c.sampler.patch_size);
        c.sampler.gamma = s.number("gamma", c.sampler.gamma);
        c.sampler.max_attempts = positive_size(s, "max_attempts", c.sampler.max_attempts);
        c.sampler.runs = positive_size(s, "runs", c.sampler.runs);
        s.finish();
    }
    if (root.has("render")) {
        auto s = root.child("render");
        c.render.near = s.number("near", c.render.near);
        c.render.far = s.number("far", c.render.far);
        c.render.num_samples = int_field(s, "num_samples", c.render.num_samples);
        const std::string mode = s.string("mode", "uniform");
        if (mode == "uniform") {
            c.render.mode = SampleMode::Uniform;
        } else if (mode == "stratified") {
            c.render.mode = SampleMode::Stratified;
        } else {
            s.fail("mode", "expected \"uniform\" or \"stratified\"");
        }
        c.render.expected_depth = s.boolean("expected_depth", c.render.expected_depth);
        if (s.has("grid_resolution")) c.render.grid_resolution = resolution_field(s, "grid_resolution");
        if (s.has("grid_bounds")) {
            auto b = s.child("grid_bounds");
            c.render.grid_bounds.min = b.vec3("min");
            c.render.grid_bounds.max = b.vec3("max");
            b.finish();
            if ((c.render.grid_bounds.max.array() <= c.render.grid_bounds.min.array()).any())
                s.fail("grid_bounds", "max must exceed min on every axis");
        }
        s.finish();
    }
    if (root.has("loss")) {
        auto s = root.child("loss");
        c.loss.lambda1 = s.number("lambda1", c.loss.lambda1);
        c.loss.lambda2 = s.number("lambda2", c.loss.lambda2);
        c.loss.beta1 = s.number("beta1", c.loss.beta1);
        c.loss.beta2 = s.number("beta2", c.loss.beta2);
        s.finish();
    }
    if (root.has("align")) {
        auto s = root.child("align");
        const std::string method = s.string("method", "lbfgs");
        if (method == "lbfgs") {
            c.align.fit.method = FitMethod::Lbfgs;
        } else if (method == "gradient_descent") {
            c.align.fit.method = FitMethod::GradientDescent;
        } else {
            s.fail("method", "expected \"lbfgs\" or \"gradient_descent\"");
        }
        c.align.fit.history = int_field(s, "history", c.align.fit.history);
        c.align.fit.grid_rows = int_field(s, "grid_rows", c.align.fit.grid_rows);
        c.align.fit.grid_cols = int_field(s, "grid_cols", c.align.fit.grid_cols);
        c.align.fit.epsilon = s.number("epsilon", c.align.fit.epsilon);
        c.align.fit.huber_delta = s.number("huber_delta", c.align.fit.huber_delta);
        c.align.fit.smoothness = s.number("smoothness", c.align.fit.smoothness);
        c.align.fit.max_iterations = int_field(s, "max_iterations", c.align.fit.max_iterations);
        c.align.fit.initial_step = s.number("initial_step", c.align.fit.initial_step);
        c.align.fit.armijo = s.number("armijo", c.align.fit.armijo);
        c.align.fit.tolerance = s.number("tolerance", c.align.fit.tolerance);
        c.align.target_stride = int_field(s, "target_stride", c.align.target_stride);
        s.finish();
    }
    if (root.has("eval")) {
        auto s = root.child("eval");
        if (s.has("cuboid")) {
            auto cb = s.child("cuboid");
            c.eval.cuboid.min = cb.vec3("min", c.eval.cuboid.min);
            c.eval.cuboid.max = cb.vec3("max", c.eval.cuboid.max);
            if (cb.has("resolution")) c.eval.cuboid.resolution = resolution_field(cb, "resolution");
            cb.finish();
        }
        c.eval.tau = s.number("tau", c.eval.tau);
        c.eval.depth_cap = s.number("depth_cap", c.eval.depth_cap);
        const std::string scaling = s.string("scaling", "none");
        if (scaling == "none") {
            c.eval.scaling = DepthScaling::None;
        } else if (scaling == "median") {
            c.eval.scaling = DepthScaling::Median;
        } else {
            s.fail("scaling", "expected \"none\" or \"median\"");
        }
        c.eval.band = s.number("band", c.eval.band);
        s.finish();
    }
    root.finish();
    try {
        c.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(source + ": " + e.what());
    }
    return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json render = {
        {"near", c.render.near},
        {"far", c.render.far},
        {"num_samples", c.render.num_samples},
        {"mode", c.render.mode == SampleMode::Uniform ? "uniform" : "stratified"},
        {"expected_depth", c.render.expected_depth},
    };
    if (c.render.grid_resolution) {
        render["grid_resolution"] = *c.render.grid_resolution;
        const auto& b = c.render.grid_bounds;
        render["grid_bounds"] = {{"min", {b.min.x(), b.min.y(), b.min.z()}}, {"max", {b.max.x(), b.max.y(), b.max.z()}}};
    }
    return {
        {"seed", c.seed},
        {"threads", c.threads},
        {"sampler",
         {{"num_patches", c.sampler.num_patches},
          {"patch_size", c.sampler.patch_size},
          {"gamma", c.sampler.gamma},
          {"max_attempts", c.sampler.max_attempts},
          {"runs", c.sampler.runs}}},
        {"render", render},
        {"loss",
         {{"lambda1", c.loss.lambda1},
          {"lambda2", c.loss.lambda2},
          {"beta1", c.loss.beta1},
          {"beta2", c.loss.beta2}}},
        {"align",
         {{"method", c.align.fit.method == FitMethod::Lbfgs ? "lbfgs" : "gradient_descent"},
          {"history", c.align.fit.history},
          {"grid_rows", c.align.fit.grid_rows},
          {"grid_cols", c.align.fit.grid_cols},
          {"epsilon", c.align.fit.epsilon},
          {"huber_delta", c.align.fit.huber_delta},
          {"smoothness", c.align.fit.smoothness},
          {"max_iterations", c.align.fit.max_iterations},
          {"initial_step", c.align.fit.initial_step},
          {"armijo", c.align.fit.armijo},
          {"tolerance", c.align.fit.tolerance},
          {"target_stride", c.align.target_stride}}},
        {"eval",
         {{"cuboid", io::cuboid_to_json(c.eval.cuboid)},
          {"tau", c.eval.tau},
          {"depth_cap", c.eval.depth_cap},
          {"scaling", c.eval.scaling == DepthScaling::None ? "none" : "median"},
          {"band", c.eval.band}}},
    };
}

RunConfig load_config(const std::filesystem::path& path) {
    return config_from_json(io::read_json(path), path.string());
}

}  // namespace occ::cli
