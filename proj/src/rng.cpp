// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#include "occ/rng.hpp"

#include "occ/error.hpp"

namespace occ {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid_argument";
        case ErrorKind::BehindCamera: return "behind_camera";
        case ErrorKind::EmptySupport: return "empty_support";
        case ErrorKind::NumericFailure: return "numeric_failure";
        case ErrorKind::Parse: return "parse_error";
        case ErrorKind::Io: return "io_error";
    }
    return "unknown";
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) noexcept {
    // FNV-1a over the stream name.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : stream) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return mix64(seed ^ mix64(h));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(mix64(seed) + index);
}

}  // namespace occ
