#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "convflow/grid.hpp"

namespace convflow {

// Middlebury-style flow file: float32 202021.25 magic, int32 width,
// int32 height, then height*width interleaved (u1,u2) float32 pairs,
// row-major, top row first. Little-endian throughout.
inline constexpr float kFlowMagic = 202021.25f;

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f32(std::ostream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(os, bits);
}

inline float get_f32(std::istream& is) {
    std::uint32_t bits = get_u32(is);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace detail

inline void write_flo_frame(const std::string& path, int width, int height,
                            const std::vector<float>& u1, const std::vector<float>& u2) {
    if (u1.size() != static_cast<std::size_t>(width) * height || u1.size() != u2.size())
        throw std::invalid_argument("write_flo_frame: size mismatch");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_flo_frame: cannot open " + path);
    detail::put_f32(os, kFlowMagic);
    detail::put_u32(os, static_cast<std::uint32_t>(width));
    detail::put_u32(os, static_cast<std::uint32_t>(height));
    for (std::size_t n = 0; n < u1.size(); ++n) {
        detail::put_f32(os, u1[n]);
        detail::put_f32(os, u2[n]);
    }
    if (!os) throw std::runtime_error("write_flo_frame: write failed for " + path);
}

struct FloFrame {
    int width = 0, height = 0;
    std::vector<float> u1, u2;
};

inline FloFrame read_flo_frame(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_flo_frame: cannot open " + path);
    float magic = detail::get_f32(is);
    if (magic != kFlowMagic)
        throw std::runtime_error("read_flo_frame: bad magic in " + path);
    FloFrame fr;
    fr.width = static_cast<int>(detail::get_u32(is));
    fr.height = static_cast<int>(detail::get_u32(is));
    if (fr.width <= 0 || fr.height <= 0 || fr.width > 1 << 20 || fr.height > 1 << 20)
        throw std::runtime_error("read_flo_frame: implausible dimensions in " + path);
    std::size_t n = static_cast<std::size_t>(fr.width) * fr.height;
    fr.u1.resize(n);
    fr.u2.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        fr.u1[p] = detail::get_f32(is);
        fr.u2[p] = detail::get_f32(is);
    }
    if (!is) throw std::runtime_error("read_flo_frame: truncated file " + path);
    return fr;
}

/// One .flo file per frame: <dir>/<prefix>NNNN.flo. Returns the file names.
inline std::vector<std::string> write_flow(const VectorField& u, const std::string& dir,
                                           const std::string& prefix = "flow_") {
    const SpaceTimeGrid& g = u.grid;
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    std::vector<float> f1(static_cast<std::size_t>(g.height) * g.width);
    std::vector<float> f2(f1.size());
    for (int k = 0; k < g.frames; ++k) {
        for (int i = 0; i < g.height; ++i)
            for (int j = 0; j < g.width; ++j) {
                f1[i * g.width + j] = static_cast<float>(u.u1[g.index(k, i, j)]);
                f2[i * g.width + j] = static_cast<float>(u.u2[g.index(k, i, j)]);
            }
        char name[32];
        std::snprintf(name, sizeof(name), "%s%04d.flo", prefix.c_str(), k);
        std::string path = dir + "/" + name;
        write_flo_frame(path, g.width, g.height, f1, f2);
        paths.push_back(path);
    }
    return paths;
}

inline VectorField read_flow(const std::vector<std::string>& paths, double dt = 0.125) {
    if (paths.size() < 2) throw std::invalid_argument("read_flow: need at least 2 frames");
    FloFrame first = read_flo_frame(paths[0]);
    SpaceTimeGrid g(static_cast<int>(paths.size()), first.height, first.width, dt);
    VectorField u(g);
    for (std::size_t k = 0; k < paths.size(); ++k) {
        FloFrame fr = k == 0 ? std::move(first) : read_flo_frame(paths[k]);
        if (fr.width != g.width || fr.height != g.height)
            throw std::runtime_error("read_flow: dimension mismatch in " + paths[k]);
        for (int i = 0; i < g.height; ++i)
            for (int j = 0; j < g.width; ++j) {
                u.u1[g.index(static_cast<int>(k), i, j)] = fr.u1[i * g.width + j];
                u.u2[g.index(static_cast<int>(k), i, j)] = fr.u2[i * g.width + j];
            }
    }
    return u;
}

}  // namespace convflow
