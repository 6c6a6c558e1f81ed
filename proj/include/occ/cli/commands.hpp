// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "occ/cli/config.hpp"
#include "occ/cli/scene.hpp"
#include "occ/raster.hpp"

namespace occ::cli {

/// Ground-truth view traced analytically: hit color (background on a miss)
/// and planar depth (NaN on a miss).
struct AnalyticView {
    Image rgb;
    DepthMap depth;
};
AnalyticView trace_view(const AnalyticField& field, const CameraIntrinsics& K, const Pose& pose,
                        unsigned parallelism = 1);

/// Pseudo depth generated from gt per the scene's spec; `seed` drives the noise.
DepthMap make_pseudo_depth(const DepthMap& gt, const PseudoDepthSpec& spec, std::uint64_t seed);

/// Entry point shared by the `occ` binary and the tests. `args` excludes the
/// program name. Returns the process exit code: 0 on success, 1 on a
/// library error (reported as JSON on `err`), 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace occ::cli
