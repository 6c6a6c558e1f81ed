// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#include "occ/cli/json_reader.hpp"

#include <cmath>

namespace occ::cli {

JsonReader::JsonReader(const nlohmann::json& node, std::string source, std::string path)
    : node_(node), source_(std::move(source)), path_(std::move(path)) {
    if (!node_.is_object() && !node_.is_array()) fail("expected an object");
}

std::string JsonReader::key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

void JsonReader::fail(const std::string& message) const {
    throw ParseError(source_ + ": " + (path_.empty() ? std::string("<root>") : path_) + ": " + message);
}

void JsonReader::fail(const std::string& key, const std::string& message) const {
    throw ParseError(source_ + ": " + key_path(key) + ": " + message);
}

bool JsonReader::has(const std::string& key) const { return node_.is_object() && node_.contains(key); }

const nlohmann::json& JsonReader::lookup(const std::string& key) {
    if (!node_.is_object()) fail("expected an object");
    const auto it = node_.find(key);
    if (it == node_.end()) fail(key, "missing required field");
    seen_.insert(key);
    return *it;
}

JsonReader JsonReader::child(const std::string& key) {
    const auto& j = lookup(key);
    if (!j.is_object() && !j.is_array()) fail(key, "expected an object or array");
    return JsonReader(j, source_, key_path(key));
}

JsonReader JsonReader::element(std::size_t index) const {
    if (!node_.is_array() || index >= node_.size()) fail("index " + std::to_string(index) + " out of range");
    const auto& j = node_[index];
    const std::string p = path_ + "[" + std::to_string(index) + "]";
    if (!j.is_object() && !j.is_array()) throw ParseError(source_ + ": " + p + ": expected an object or array");
    return JsonReader(j, source_, p);
}

std::size_t JsonReader::size() const {
    if (!node_.is_array()) fail("expected an array");
    return node_.size();
}

double JsonReader::number(const std::string& key) {
    const auto& j = lookup(key);
    if (!j.is_number()) fail(key, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(key, "expected a finite number");
    return v;
}

double JsonReader::number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

long long JsonReader::integer(const std::string& key) {
    const auto& j = lookup(key);
    if (!j.is_number_integer()) fail(key, "expected an integer");
    return j.get<long long>();
}

long long JsonReader::integer(const std::string& key, long long fallback) {
    return has(key) ? integer(key) : fallback;
}

std::uint64_t JsonReader::unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const auto& j = lookup(key);
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::uint64_t>(j.get<long long>());
    fail(key, "expected a non-negative integer");
}

bool JsonReader::boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& j = lookup(key);
    if (!j.is_boolean()) fail(key, "expected true or false");
    return j.get<bool>();
}

std::string JsonReader::string(const std::string& key) {
    const auto& j = lookup(key);
    if (!j.is_string()) fail(key, "expected a string");
    return j.get<std::string>();
}

std::string JsonReader::string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
}

std::vector<double> JsonReader::numbers(const std::string& key, std::size_t expected) {
    const auto& j = lookup(key);
    if (!j.is_array() || j.size() != expected)
        fail(key, "expected an array of " + std::to_string(expected) + " numbers");
    std::vector<double> out;
    for (const auto& e : j) {
        if (!e.is_number()) fail(key, "expected an array of " + std::to_string(expected) + " numbers");
        out.push_back(e.get<double>());
        if (!std::isfinite(out.back())) fail(key, "expected finite numbers");
    }
    return out;
}

Vec3 JsonReader::vec3(const std::string& key) {
    const auto v = numbers(key, 3);
    return {v[0], v[1], v[2]};
}

Vec3 JsonReader::vec3(const std::string& key, const Vec3& fallback) { return has(key) ? vec3(key) : fallback; }

double JsonReader::as_number() const {
    if (!node_.is_number()) fail("expected a number");
    return node_.get<double>();
}

Vec3 JsonReader::as_vec3() const {
    if (!node_.is_array() || node_.size() != 3) fail("expected an array of 3 numbers");
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
        if (!node_[i].is_number()) fail("expected an array of 3 numbers");
        v[i] = node_[i].get<double>();
    }
    return v;
}

void JsonReader::finish() const {
    if (!node_.is_object()) return;
    for (auto it = node_.begin(); it != node_.end(); ++it)
        if (!seen_.count(it.key())) fail(it.key(), "unknown field");
}

}  // namespace occ::cli
