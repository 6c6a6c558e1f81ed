// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace occ {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for a named sub-stream of a run seed ("sampler", "stratification", ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) noexcept;

/// Seed for an indexed sub-stream (e.g. one per ray or per run).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace occ
