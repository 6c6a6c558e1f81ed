// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "occ/error.hpp"
#include "occ/geometry.hpp"

namespace occ::cli {

/// Typed, path-tracking view of a JSON object. Errors name the offending
/// field ("scene.json: primitives[2].radius: expected a number"), and
/// finish() rejects keys that were never read.
class JsonReader {
public:
    JsonReader(const nlohmann::json& node, std::string source, std::string path = "");

    const std::string& path() const noexcept { return path_; }
    const nlohmann::json& node() const noexcept { return node_; }
    bool has(const std::string& key) const;

    JsonReader child(const std::string& key);
    JsonReader element(std::size_t index) const;
    std::size_t size() const;
    bool is_array() const { return node_.is_array(); }
    bool is_object() const { return node_.is_object(); }

    double number(const std::string& key);
    double number(const std::string& key, double fallback);
    long long integer(const std::string& key);
    long long integer(const std::string& key, long long fallback);
    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback);
    bool boolean(const std::string& key, bool fallback);
    std::string string(const std::string& key);
    std::string string(const std::string& key, const std::string& fallback);
    Vec3 vec3(const std::string& key);
    Vec3 vec3(const std::string& key, const Vec3& fallback);
    std::vector<double> numbers(const std::string& key, std::size_t expected);

    /// Value of this node itself.
    double as_number() const;
    Vec3 as_vec3() const;

    [[noreturn]] void fail(const std::string& message) const;
    [[noreturn]] void fail(const std::string& key, const std::string& message) const;
    void finish() const;

private:
    const nlohmann::json& lookup(const std::string& key);
    std::string key_path(const std::string& key) const;

    const nlohmann::json& node_;
    std::string source_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace occ::cli
