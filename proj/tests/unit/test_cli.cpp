// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "occ/cli/commands.hpp"
#include "occ/cli/config.hpp"
#include "occ/cli/scene.hpp"
#include "occ/error.hpp"
#include "occ/io.hpp"

namespace occ {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::fixture_path;

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
    json report() const { return json::parse(out); }
};

Outcome run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    Outcome o;
    o.code = cli::run(args, out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("occ_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    std::string fixture(const std::string& name) const { return fixture_path(name).string(); }

    /// Small run config: fewer sampler runs keep the tests fast.
    std::string small_config(std::size_t runs = 50) {
        cli::RunConfig c;
        c.sampler.runs = runs;
        const std::string p = path("config.json");
        io::write_json(p, cli::config_to_json(c));
        return p;
    }

    fs::path dir_;
};

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = io::read_bytes(e.path());
    return files;
}

TEST_F(CliTest, SynthWallProducesConstantDepthAndExactScaledPseudo) {
    const Outcome o = run_cli({"synth", "--scene", fixture("wall.json"), "--out", path("wall")});
    ASSERT_EQ(o.code, 0) << o.err;
    const DepthMap gt = io::read_pfm(path("wall/depth_gt/000000.pfm"));
    const DepthMap pseudo = io::read_pfm(path("wall/depth_pseudo/000000.pfm"));
    for (std::size_t i = 0; i < gt.size(); ++i) {
        ASSERT_NEAR(gt[i], 10.0f, 1e-5f);
        ASSERT_EQ(pseudo[i], 2.0f * gt[i]);
    }
    EXPECT_TRUE(fs::exists(path("wall/images/000000.ppm")));
    EXPECT_TRUE(fs::exists(path("wall/instances/000000.json")));
    EXPECT_TRUE(fs::exists(path("wall/poses.json")));
    EXPECT_EQ(o.report()["command"], "synth");
    EXPECT_EQ(io::read_json(path("wall/report.json")), o.report());
}

TEST_F(CliTest, SynthEmptySceneGivesBackgroundAndNoDepth) {
    ASSERT_EQ(run_cli({"synth", "--scene", fixture("empty.json"), "--out", path("empty")}).code, 0);
    const DepthMap gt = io::read_pfm(path("empty/depth_gt/000000.pfm"));
    for (float d : gt.values()) ASSERT_TRUE(std::isnan(d));
    const Image img = io::read_ppm(path("empty/images/000000.ppm"));
    const auto scene = cli::load_scene(fixture_path("empty.json"));
    for (const auto& p : img.values()) {
        for (int c = 0; c < 3; ++c) ASSERT_NEAR(p[c], scene.background[c], 0.5 / 255.0 + 1e-6);
    }
}

TEST_F(CliTest, RenderWallLocalizesSurface) {
    const Outcome o = run_cli({"render", "--scene", fixture("wall.json"), "--out", path("render")});
    ASSERT_EQ(o.code, 0) << o.err;
    const json r = o.report()["results"];
    EXPECT_EQ(r["surface_within_one_bin"], r["surface_pixels"]);
    EXPECT_LE(r["surface_error_max"].get<double>(), r["bin_length"].get<double>());
    for (const char* f : {"rgb.ppm", "distance.pfm", "depth.pfm", "transmittance.pfm", "report.json"})
        EXPECT_TRUE(fs::exists(path(std::string("render/") + f))) << f;
}

TEST_F(CliTest, BenchSamplerReportsFullCoverage) {
    const Outcome o = run_cli({"bench-sampler", "--config", small_config(), "--scene", fixture("street.json"),
                               "--out", path("bench")});
    ASSERT_EQ(o.code, 0) << o.err;
    const json r = o.report()["results"];
    EXPECT_EQ(r["instance_aware"]["valid_rays"].get<double>(), 4096.0);
    EXPECT_EQ(r["instance_aware"]["complete_runs"], 50);
    EXPECT_LT(r["random"]["valid_rays"].get<double>(), 4096.0);
    EXPECT_GT(r["valid_ray_gain_percent"].get<double>(), 0.0);
}

TEST_F(CliTest, SampleWithInstancesFile) {
    const Outcome o = run_cli({"sample", "--instances", fixture("instances_standard.json"), "--width", "640",
                               "--height", "192", "--seed", "3", "--out", path("sample")});
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_EQ(o.report()["results"]["valid_rays"].get<double>(), 4096.0);
    const json anchors = io::read_json(path("sample/anchors.json"));
    EXPECT_EQ(anchors["anchors"].size(), 64u);
    const Raster<float> pdf = io::read_pfm(path("sample/pdf.pfm"));
    EXPECT_EQ(pdf.width(), 640);
    EXPECT_EQ(pdf.height(), 192);
    const Outcome both = run_cli({"sample", "--instances", fixture("instances_standard.json"), "--scene",
                                  fixture("street.json"), "--out", path("s2")});
    EXPECT_EQ(both.code, 2);
}

TEST_F(CliTest, AlignRecoversScaledPseudoDepth) {
    ASSERT_EQ(run_cli({"synth", "--scene", fixture("wall.json"), "--out", path("wall")}).code, 0);
    const Outcome o = run_cli({"align", "--pseudo", path("wall/depth_pseudo/000000.pfm"), "--gt",
                               path("wall/depth_gt/000000.pfm"), "--out", path("align")});
    ASSERT_EQ(o.code, 0) << o.err;
    const json r = o.report()["results"];
    EXPECT_NEAR(r["before"]["abs_rel"].get<double>(), 1.0, 1e-6);
    EXPECT_LT(r["after"]["abs_rel"].get<double>(), 1e-3);
    EXPECT_NEAR(r["residuals"]["inverse_depth"]["mean"].get<double>(), 0.05, 1e-6);
    const ResidualField f = io::load_residual_field(path("align/residual"));
    EXPECT_EQ(f.rows(), 12);
    EXPECT_EQ(f.cols(), 40);
}

TEST_F(CliTest, LossOnSelfConsistentWall) {
    ASSERT_EQ(run_cli({"synth", "--scene", fixture("wall.json"), "--out", path("wall")}).code, 0);
    const Outcome o = run_cli({"loss", "--scene", fixture("wall.json"), "--bundle", path("wall"), "--out",
                               path("loss")});
    ASSERT_EQ(o.code, 0) << o.err;
    const json r = o.report()["results"];
    EXPECT_LT(r["depth_consistency"].get<double>(), r["bin_length"].get<double>());
    EXPECT_NEAR(r["temporal_alignment"].get<double>(), 0.0, 1e-6);
    EXPECT_GE(r["rgb_consistency"].get<double>(), 0.0);
    EXPECT_NEAR(r["total"].get<double>(),
                r["temporal_alignment"].get<double>() + r["depth_consistency"].get<double>() +
                    r["rgb_consistency"].get<double>(),
                1e-12);
}

TEST_F(CliTest, EvalOccOnBoxScene) {
    const Outcome o = run_cli({"eval-occ", "--scene", fixture("box.json"), "--out", path("occ")});
    ASSERT_EQ(o.code, 0) << o.err;
    const json m = o.report()["results"]["metrics"];
    EXPECT_GE(m["o_acc"].get<double>(), 0.98);
    EXPECT_EQ(m["ie_rec"].get<double>(), 1.0);
    const VoxelGrid gt = io::load_voxel_grid(path("occ/gt"));
    EXPECT_EQ(gt.occupied_count(), o.report()["results"]["gt_occupied"].get<std::size_t>());
}

TEST_F(CliTest, EvalOccDepthBandBaseline) {
    ASSERT_EQ(run_cli({"synth", "--scene", fixture("wall.json"), "--out", path("wall")}).code, 0);
    const Outcome o = run_cli({"eval-occ", "--scene", fixture("wall.json"), "--depth",
                               path("wall/depth_gt/000000.pfm"), "--out", path("band")});
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_GT(o.report()["results"]["pred_occupied"].get<std::size_t>(), 0u);
    const Outcome both = run_cli({"eval-occ", "--scene", fixture("wall.json"), "--depth",
                                  path("wall/depth_gt/000000.pfm"), "--grid", path("x"), "--out", path("b2")});
    EXPECT_EQ(both.code, 2);
}

TEST_F(CliTest, EvalDepthIdentityIsZero) {
    ASSERT_EQ(run_cli({"synth", "--scene", fixture("street.json"), "--out", path("street")}).code, 0);
    const std::string gt = path("street/depth_gt/000000.pfm");
    const Outcome o = run_cli({"eval-depth", "--pred", gt, "--gt", gt, "--out", path("ed")});
    ASSERT_EQ(o.code, 0) << o.err;
    const json m = o.report()["results"]["metrics"];
    for (const char* k : {"abs_rel", "sq_rel", "rmse", "rmse_log"}) EXPECT_EQ(m[k].get<double>(), 0.0) << k;
    for (const char* k : {"delta1", "delta2", "delta3"}) EXPECT_EQ(m[k].get<double>(), 1.0) << k;
}

TEST_F(CliTest, LibraryErrorsAreStructuredJson) {
    io::write_bytes(path("bad.json"), "{\n  \"intrinsics\": [1, 2\n}\n");
    const Outcome parse = run_cli({"synth", "--scene", path("bad.json"), "--out", path("o1")});
    EXPECT_EQ(parse.code, 1);
    const json e = json::parse(parse.err);
    EXPECT_EQ(e["error"]["kind"], "parse_error");
    EXPECT_EQ(e["error"]["command"], "synth");
    EXPECT_NE(e["error"]["message"].get<std::string>().find("bad.json:"), std::string::npos);

    json cfg = cli::config_to_json(cli::RunConfig{});
    cfg["sampler"]["gama"] = 0.3;
    io::write_json(path("typo.json"), cfg);
    const Outcome typo = run_cli({"synth", "--config", path("typo.json"), "--scene", fixture("wall.json"),
                                  "--out", path("o2")});
    EXPECT_EQ(typo.code, 1);
    const json te = json::parse(typo.err);
    EXPECT_EQ(te["error"]["kind"], "parse_error");
    EXPECT_NE(te["error"]["message"].get<std::string>().find("gama"), std::string::npos);

    cfg = cli::config_to_json(cli::RunConfig{});
    cfg["eval"]["tau"] = 1.5;
    io::write_json(path("tau.json"), cfg);
    EXPECT_EQ(run_cli({"eval-occ", "--config", path("tau.json"), "--scene", fixture("box.json"), "--out",
                       path("o3")})
                  .code,
              1);
}

TEST_F(CliTest, UsageErrorsReturnTwo) {
    EXPECT_EQ(run_cli({}).code, 2);
    EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
    EXPECT_EQ(run_cli({"eval-depth", "--pred", path("nope.pfm"), "--gt", path("nope.pfm"), "--out", path("x")}).code,
              2);
    EXPECT_EQ(run_cli({"synth", "--scene", fixture("wall.json")}).code, 2);  // --out is required
    EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST_F(CliTest, ReportsAreSelfDescribing) {
    const std::string config = small_config(20);
    const Outcome o = run_cli({"bench-sampler", "--config", config, "--seed", "99", "--scene",
                               fixture("street.json"), "--out", path("bench")});
    ASSERT_EQ(o.code, 0) << o.err;
    const json r = o.report();
    EXPECT_EQ(r["config"]["seed"], 99);
    EXPECT_EQ(r["config"]["sampler"]["runs"], 20);
    EXPECT_EQ(r["inputs"]["scene"], fixture("street.json"));
    EXPECT_TRUE(r["outputs"].is_array());
}

TEST_F(CliTest, CommandsAreByteDeterministic) {
    const std::string config = small_config(30);
    ASSERT_EQ(run_cli({"synth", "--scene", fixture("street.json"), "--out", path("bundle")}).code, 0);
    const std::vector<std::vector<std::string>> commands{
        {"synth", "--scene", fixture("street.json")},
        {"render", "--scene", fixture("wall.json"), "--view", "1"},
        {"sample", "--scene", fixture("street.json")},
        {"bench-sampler", "--config", config, "--scene", fixture("street.json")},
        {"eval-depth", "--pred", path("bundle/depth_pseudo/000000.pfm"), "--gt", path("bundle/depth_gt/000000.pfm")},
    };
    for (const auto& base : commands) {
        auto a = base, b = base;
        a.insert(a.end(), {"--seed", "5", "--out", path("a_" + base[0])});
        b.insert(b.end(), {"--seed", "5", "--out", path("b_" + base[0])});
        const Outcome oa = run_cli(a), ob = run_cli(b);
        ASSERT_EQ(oa.code, 0) << oa.err;
        ASSERT_EQ(ob.code, 0) << ob.err;
        EXPECT_EQ(oa.out, ob.out) << base[0];
        EXPECT_EQ(read_tree(path("a_" + base[0])), read_tree(path("b_" + base[0]))) << base[0];
    }
}

TEST_F(CliTest, SeedChangesSampledAnchors) {
    ASSERT_EQ(run_cli({"sample", "--scene", fixture("street.json"), "--seed", "1", "--out", path("s1")}).code, 0);
    ASSERT_EQ(run_cli({"sample", "--scene", fixture("street.json"), "--seed", "2", "--out", path("s2")}).code, 0);
    EXPECT_NE(io::read_json(path("s1/anchors.json"))["anchors"], io::read_json(path("s2/anchors.json"))["anchors"]);
}

TEST(SceneParsing, StreetFixture) {
    const auto scene = cli::load_scene(fixture_path("street.json"));
    EXPECT_EQ(scene.intrinsics.width, 640);
    EXPECT_EQ(scene.intrinsics.height, 192);
    EXPECT_EQ(scene.instances.size(), 8u);
    EXPECT_FALSE(scene.aux_poses.empty());
    EXPECT_FALSE(scene.primitives.empty());
}

TEST(SceneParsing, PseudoDepthModes) {
    DepthMap gt(4, 4, 10.0f);
    gt(0, 0) = kInvalidDepth;
    cli::PseudoDepthSpec exact;
    EXPECT_EQ(cli::make_pseudo_depth(gt, exact, 1)(1, 1), 10.0f);
    EXPECT_TRUE(std::isnan(cli::make_pseudo_depth(gt, exact, 1)(0, 0)));
    cli::PseudoDepthSpec scaled;
    scaled.mode = cli::PseudoDepthSpec::Mode::Scaled;
    scaled.scale = 2.0;
    EXPECT_EQ(cli::make_pseudo_depth(gt, scaled, 1)(2, 3), 20.0f);
    cli::PseudoDepthSpec noise;
    noise.mode = cli::PseudoDepthSpec::Mode::Noise;
    noise.relative_std = 0.1;
    const DepthMap a = cli::make_pseudo_depth(gt, noise, 4), b = cli::make_pseudo_depth(gt, noise, 4);
    EXPECT_EQ(a(1, 2), b(1, 2));
    EXPECT_NE(a(1, 2), 10.0f);
    EXPECT_GT(a(1, 2), 0.0f);
}

TEST(ConfigParsing, RoundTripAndValidation) {
    cli::RunConfig c;
    c.seed = 12345;
    c.sampler.gamma = 0.6;
    c.render.num_samples = 128;
    const cli::RunConfig back = cli::config_from_json(cli::config_to_json(c), "test");
    EXPECT_EQ(cli::config_to_json(back), cli::config_to_json(c));
    json bad = cli::config_to_json(c);
    bad["render"]["near"] = 100.0;
    EXPECT_THROW(cli::config_from_json(bad, "test"), ParseError);
    const cli::RunConfig loaded = cli::load_config(fixture_path("config.json"));
    EXPECT_EQ(loaded.seed, 7u);
}

}  // namespace
}  // namespace occ
