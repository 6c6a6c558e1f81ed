// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "occ/density_field.hpp"
#include "occ/depth_align.hpp"
#include "occ/occupancy_eval.hpp"
#include "occ/raster.hpp"

namespace occ::io {

namespace fs = std::filesystem;

/// Single-channel PFM ("Pf"), little-endian (scale -1.0), rows stored bottom to top.
void write_pfm(const fs::path& path, const Raster<float>& raster);
Raster<float> read_pfm(const fs::path& path);

/// Binary PPM (P6, maxval 255). Values are clamped to [0, 1] and rounded.
void write_ppm(const fs::path& path, const Image& image);
Image read_ppm(const fs::path& path);

nlohmann::json read_json(const fs::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const fs::path& path, const nlohmann::json& value);

void write_bytes(const fs::path& path, const std::string& bytes);
std::string read_bytes(const fs::path& path);

/// GridField as `<stem>.bin` (float32 LE densities, then optional float32 LE
/// RGB triples, x fastest) and `<stem>.json` (resolution, bounds, layout).
void save_grid_field(const fs::path& stem, const GridField& field);
GridField load_grid_field(const fs::path& stem);

/// Residual control grid in the same binary + sidecar layout (float64 LE values).
void save_residual_field(const fs::path& stem, const ResidualField& field);
ResidualField load_residual_field(const fs::path& stem);

/// VoxelGrid as packed bitsets `<stem>.occupancy.bin`, `<stem>.visibility.bin`
/// (bit i of byte i/8 holds voxel i, LSB first) plus `<stem>.json`.
void save_voxel_grid(const fs::path& stem, const VoxelGrid& grid);
VoxelGrid load_voxel_grid(const fs::path& stem);

std::string pack_bits(const std::vector<std::uint8_t>& bits);
std::vector<std::uint8_t> unpack_bits(const std::string& bytes, std::size_t count);

nlohmann::json cuboid_to_json(const EvalCuboid& c);
EvalCuboid cuboid_from_json(const nlohmann::json& j);

}  // namespace occ::io
