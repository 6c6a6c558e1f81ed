// Copyright 2026 The occ Authors
// SPDX-License-Identifier: Apache-2.0

#include "occ/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "occ/error.hpp"

namespace occ::io {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void append_le(std::string& out, T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.append(bytes, sizeof(T));
}

template <typename T>
T read_le(const char* p) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

// Reads one whitespace-delimited header token from a PNM-style stream.
std::string header_token(std::istream& in, const fs::path& path) {
    std::string tok;
    char c;
    while (in.get(c)) {
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(c);
    }
    if (tok.empty()) throw ParseError(path.string() + ": truncated header");
    return tok;
}

int header_int(std::istream& in, const fs::path& path) {
    const std::string tok = header_token(in, path);
    try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(path.string() + ": bad header value '" + tok + "'");
    }
}

template <typename T>
std::vector<T> decode_array(const std::string& bytes, std::size_t offset, std::size_t count, const fs::path& path) {
    if (bytes.size() < offset + count * sizeof(T)) throw ParseError(path.string() + ": payload too short");
    std::vector<T> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = read_le<T>(bytes.data() + offset + i * sizeof(T));
    return out;
}

fs::path with_suffix(const fs::path& stem, const std::string& suffix) { return fs::path(stem.string() + suffix); }

nlohmann::json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 vec_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

void write_bytes(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_pfm(const fs::path& path, const Raster<float>& raster) {
    std::string out = "Pf\n" + std::to_string(raster.width()) + " " + std::to_string(raster.height()) + "\n-1.0\n";
    out.reserve(out.size() + raster.size() * 4);
    for (int v = raster.height() - 1; v >= 0; --v)
        for (int u = 0; u < raster.width(); ++u) append_le<float>(out, raster(u, v));
    write_bytes(path, out);
}

Raster<float> read_pfm(const fs::path& path) {
    const std::string bytes = read_bytes(path);
    std::istringstream in(bytes);
    const std::string magic = header_token(in, path);
    if (magic != "Pf") throw ParseError(path.string() + ": not a single-channel PFM (magic '" + magic + "')");
    const int w = header_int(in, path);
    const int h = header_int(in, path);
    const std::string scale_tok = header_token(in, path);
    double scale = 0.0;
    try {
        scale = std::stod(scale_tok);
    } catch (const std::exception&) {
        throw ParseError(path.string() + ": bad PFM scale '" + scale_tok + "'");
    }
    const auto offset = static_cast<std::size_t>(in.tellg());
    Raster<float> raster(w, h);
    const std::size_t count = raster.size();
    if (bytes.size() < offset + count * 4) throw ParseError(path.string() + ": PFM payload too short");
    const bool little = scale < 0.0;
    for (int v = h - 1, i = 0; v >= 0; --v)
        for (int u = 0; u < w; ++u, ++i) {
            char b[4];
            std::memcpy(b, bytes.data() + offset + std::size_t(i) * 4, 4);
            if (little != (std::endian::native == std::endian::little)) std::reverse(b, b + 4);
            float f;
            std::memcpy(&f, b, 4);
            raster(u, v) = f;
        }
    return raster;
}

void write_ppm(const fs::path& path, const Image& image) {
    std::string out = "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
    out.reserve(out.size() + image.size() * 3);
    for (std::size_t i = 0; i < image.size(); ++i)
        for (int c = 0; c < 3; ++c) {
            const float x = std::isfinite(image[i][c]) ? std::clamp(image[i][c], 0.0f, 1.0f) : 0.0f;
            out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(x * 255.0f))));
        }
    write_bytes(path, out);
}

Image read_ppm(const fs::path& path) {
    const std::string bytes = read_bytes(path);
    std::istringstream in(bytes);
    const std::string magic = header_token(in, path);
    if (magic != "P6") throw ParseError(path.string() + ": not a binary PPM (magic '" + magic + "')");
    const int w = header_int(in, path);
    const int h = header_int(in, path);
    const int maxval = header_int(in, path);
    if (maxval != 255) throw ParseError(path.string() + ": only maxval 255 is supported");
    const auto offset = static_cast<std::size_t>(in.tellg());
    Image image(w, h);
    if (bytes.size() < offset + image.size() * 3) throw ParseError(path.string() + ": PPM payload too short");
    for (std::size_t i = 0; i < image.size(); ++i)
        for (int c = 0; c < 3; ++c)
            image[i][c] = static_cast<float>(static_cast<unsigned char>(bytes[offset + i * 3 + c])) / 255.0f;
    return image;
}

nlohmann::json read_json(const fs::path& path) {
    const std::string text = read_bytes(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // Translate the byte offset into line/column.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
    }
}

void write_json(const fs::path& path, const nlohmann::json& value) { write_bytes(path, value.dump(2) + "\n"); }

void save_grid_field(const fs::path& stem, const GridField& field) {
    std::string bin;
    for (float v : field.values()) append_le<float>(bin, v);
    if (field.colors())
        for (const Rgb& c : *field.colors())
            for (int k = 0; k < 3; ++k) append_le<float>(bin, c[k]);
    write_bytes(with_suffix(stem, ".bin"), bin);
    const auto& r = field.resolution();
    nlohmann::json meta = {
        {"format", "occ-grid-field"},
        {"resolution", {r[0], r[1], r[2]}},
        {"bounds", {{"min", vec_json(field.bounds().min)}, {"max", vec_json(field.bounds().max)}}},
        {"layout", field.colors() ? "density_f32le,rgb_f32le" : "density_f32le"},
        {"order", "x_fastest"},
        {"background", {field.background()[0], field.background()[1], field.background()[2]}},
        {"data", with_suffix(stem, ".bin").filename().string()},
    };
    write_json(with_suffix(stem, ".json"), meta);
}

GridField load_grid_field(const fs::path& stem) {
    const auto jpath = with_suffix(stem, ".json");
    const auto meta = read_json(jpath);
    try {
        const std::array<int, 3> res{meta.at("resolution")[0].get<int>(), meta.at("resolution")[1].get<int>(),
                                     meta.at("resolution")[2].get<int>()};
        const Aabb bounds{vec_from_json(meta.at("bounds").at("min")), vec_from_json(meta.at("bounds").at("max"))};
        const std::string layout = meta.at("layout").get<std::string>();
        Color background = Color::Zero();
        if (meta.contains("background")) background = vec_from_json(meta["background"]).array();
        const auto bpath = jpath.parent_path() / meta.at("data").get<std::string>();
        const std::string bytes = read_bytes(bpath);
        for (int n : res) require(n >= 2, "grid field: resolution must be >= 2 per axis");
        const std::size_t count = static_cast<std::size_t>(res[0]) * res[1] * res[2];
        auto values = decode_array<float>(bytes, 0, count, bpath);
        std::optional<std::vector<Rgb>> colors;
        if (layout == "density_f32le,rgb_f32le") {
            const auto flat = decode_array<float>(bytes, count * 4, count * 3, bpath);
            colors.emplace(count);
            for (std::size_t i = 0; i < count; ++i) (*colors)[i] = Rgb(flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]);
        } else if (layout != "density_f32le") {
            throw ParseError(jpath.string() + ": unknown layout '" + layout + "'");
        }
        return GridField(res, bounds, std::move(values), std::move(colors), background);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(jpath.string() + ": " + e.what());
    }
}

void save_residual_field(const fs::path& stem, const ResidualField& field) {
    std::string bin;
    for (double v : field.values()) append_le<double>(bin, v);
    write_bytes(with_suffix(stem, ".bin"), bin);
    nlohmann::json meta = {
        {"format", "occ-residual-field"},
        {"grid", {field.rows(), field.cols()}},
        {"image_size", {field.width(), field.height()}},
        {"layout", "inverse_depth_f64le"},
        {"order", "col_fastest"},
        {"data", with_suffix(stem, ".bin").filename().string()},
    };
    write_json(with_suffix(stem, ".json"), meta);
}

ResidualField load_residual_field(const fs::path& stem) {
    const auto jpath = with_suffix(stem, ".json");
    const auto meta = read_json(jpath);
    try {
        const int rows = meta.at("grid")[0].get<int>();
        const int cols = meta.at("grid")[1].get<int>();
        const int w = meta.at("image_size")[0].get<int>();
        const int h = meta.at("image_size")[1].get<int>();
        require(rows >= 2 && cols >= 2, "residual field: control grid must be at least 2 x 2");
        const auto bpath = jpath.parent_path() / meta.at("data").get<std::string>();
        auto values = decode_array<double>(read_bytes(bpath), 0, std::size_t(rows) * cols, bpath);
        return ResidualField(rows, cols, w, h, std::move(values));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(jpath.string() + ": " + e.what());
    }
}

std::string pack_bits(const std::vector<std::uint8_t>& bits) {
    std::string out((bits.size() + 7) / 8, '\0');
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) out[i / 8] = static_cast<char>(static_cast<unsigned char>(out[i / 8]) | (1u << (i % 8)));
    return out;
}

std::vector<std::uint8_t> unpack_bits(const std::string& bytes, std::size_t count) {
    if (bytes.size() < (count + 7) / 8) throw ParseError("bitset payload too short");
    std::vector<std::uint8_t> bits(count);
    for (std::size_t i = 0; i < count; ++i) bits[i] = (static_cast<unsigned char>(bytes[i / 8]) >> (i % 8)) & 1u;
    return bits;
}

nlohmann::json cuboid_to_json(const EvalCuboid& c) {
    return {{"min", vec_json(c.min)},
            {"max", vec_json(c.max)},
            {"resolution", {c.resolution[0], c.resolution[1], c.resolution[2]}}};
}

EvalCuboid cuboid_from_json(const nlohmann::json& j) {
    EvalCuboid c;
    if (j.contains("min")) c.min = vec_from_json(j["min"]);
    if (j.contains("max")) c.max = vec_from_json(j["max"]);
    if (j.contains("resolution")) {
        const auto& r = j["resolution"];
        if (!r.is_array() || r.size() != 3) throw ParseError("cuboid resolution must have 3 entries");
        c.resolution = {r[0].get<int>(), r[1].get<int>(), r[2].get<int>()};
    }
    c.validate();
    return c;
}

void save_voxel_grid(const fs::path& stem, const VoxelGrid& grid) {
    write_bytes(with_suffix(stem, ".occupancy.bin"), pack_bits(grid.occupancy));
    write_bytes(with_suffix(stem, ".visibility.bin"), pack_bits(grid.visibility));
    nlohmann::json meta = {
        {"format", "occ-voxel-grid"},
        {"cuboid", cuboid_to_json(grid.cuboid)},
        {"order", "x_fastest"},
        {"bit_order", "lsb_first"},
        {"occupied", grid.occupied_count()},
        {"occupancy", with_suffix(stem, ".occupancy.bin").filename().string()},
        {"visibility", with_suffix(stem, ".visibility.bin").filename().string()},
    };
    write_json(with_suffix(stem, ".json"), meta);
}

VoxelGrid load_voxel_grid(const fs::path& stem) {
    const auto jpath = with_suffix(stem, ".json");
    const auto meta = read_json(jpath);
    try {
        VoxelGrid grid(cuboid_from_json(meta.at("cuboid")));
        const auto dir = jpath.parent_path();
        const std::size_t n = grid.cuboid.voxel_count();
        grid.occupancy = unpack_bits(read_bytes(dir / meta.at("occupancy").get<std::string>()), n);
        grid.visibility = unpack_bits(read_bytes(dir / meta.at("visibility").get<std::string>()), n);
        return grid;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(jpath.string() + ": " + e.what());
    }
}

}  // namespace occ::io
