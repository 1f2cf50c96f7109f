#pragma once

#include <png.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "convflow/grid.hpp"

namespace convflow {

struct GrayImage {
    int width = 0, height = 0;
    std::vector<std::uint8_t> pixels;  // row-major, top row first
};

// ---------------------------------------------------------------------------
// PGM (binary P5), 8 bit

inline GrayImage read_pgm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_pgm: cannot open " + path);
    std::string magic;
    is >> magic;
    if (magic != "P5") throw std::runtime_error("read_pgm: not a binary PGM: " + path);
    auto next_token = [&is, &path]() {
        // skip whitespace and '#' comment lines
        int c;
        while ((c = is.peek()) != EOF) {
            if (c == '#') {
                std::string line;
                std::getline(is, line);
            } else if (std::isspace(c)) {
                is.get();
            } else {
                break;
            }
        }
        long v;
        if (!(is >> v)) throw std::runtime_error("read_pgm: malformed header: " + path);
        return v;
    };
    long w = next_token(), h = next_token(), maxval = next_token();
    if (maxval != 255) throw std::runtime_error("read_pgm: only 8-bit supported: " + path);
    is.get();  // single whitespace after maxval
    GrayImage img;
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.pixels.resize(static_cast<std::size_t>(w) * h);
    is.read(reinterpret_cast<char*>(img.pixels.data()), img.pixels.size());
    if (is.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw std::runtime_error("read_pgm: truncated file " + path);
    return img;
}

inline void write_pgm(const std::string& path, const GrayImage& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_pgm: cannot open " + path);
    os << "P5\n" << img.width << " " << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
    if (!os) throw std::runtime_error("write_pgm: write failed for " + path);
}

// ---------------------------------------------------------------------------
// PNG via libpng; color input is converted by luminance

namespace detail {

struct PngReadCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReadCloser() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngWriteCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngWriteCloser() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

}  // namespace detail

inline GrayImage read_png_gray(const std::string& path) {
    detail::PngReadCloser c;
    c.fp = std::fopen(path.c_str(), "rb");
    if (!c.fp) throw std::runtime_error("read_png_gray: cannot open " + path);
    c.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    c.info = png_create_info_struct(c.png);
    if (!c.png || !c.info || setjmp(png_jmpbuf(c.png)))
        throw std::runtime_error("read_png_gray: decode failed for " + path);
    png_init_io(c.png, c.fp);
    png_read_info(c.png, c.info);
    png_set_strip_16(c.png);
    png_set_strip_alpha(c.png);
    png_set_palette_to_rgb(c.png);
    png_set_expand_gray_1_2_4_to_8(c.png);
    png_set_rgb_to_gray(c.png, 1, -1, -1);  // ITU luminance coefficients
    png_read_update_info(c.png, c.info);
    GrayImage img;
    img.width = static_cast<int>(png_get_image_width(c.png, c.info));
    img.height = static_cast<int>(png_get_image_height(c.png, c.info));
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y) rows[y] = img.pixels.data() + y * img.width;
    png_read_image(c.png, rows.data());
    return img;
}

inline void write_png_gray(const std::string& path, const GrayImage& img) {
    detail::PngWriteCloser c;
    c.fp = std::fopen(path.c_str(), "wb");
    if (!c.fp) throw std::runtime_error("write_png_gray: cannot open " + path);
    c.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    c.info = png_create_info_struct(c.png);
    if (!c.png || !c.info || setjmp(png_jmpbuf(c.png)))
        throw std::runtime_error("write_png_gray: encode failed for " + path);
    png_init_io(c.png, c.fp);
    png_set_IHDR(c.png, c.info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(c.png, c.info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(c.png, const_cast<png_bytep>(img.pixels.data() + y * img.width));
    png_write_end(c.png, nullptr);
}

inline void write_png_rgb(const std::string& path, int width, int height,
                          const std::vector<std::uint8_t>& rgb) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
        throw std::invalid_argument("write_png_rgb: size mismatch");
    detail::PngWriteCloser c;
    c.fp = std::fopen(path.c_str(), "wb");
    if (!c.fp) throw std::runtime_error("write_png_rgb: cannot open " + path);
    c.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    c.info = png_create_info_struct(c.png);
    if (!c.png || !c.info || setjmp(png_jmpbuf(c.png)))
        throw std::runtime_error("write_png_rgb: encode failed for " + path);
    png_init_io(c.png, c.fp);
    png_set_IHDR(c.png, c.info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(c.png, c.info);
    for (int y = 0; y < height; ++y)
        png_write_row(c.png, const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(y) * width * 3));
    png_write_end(c.png, nullptr);
}

// ---------------------------------------------------------------------------
// Frame directory loading

inline GrayImage read_frame(const std::string& path) {
    auto ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".pgm") return read_pgm(path);
    if (ext == ".png") return read_png_gray(path);
    throw std::runtime_error("read_frame: unsupported format " + path);
}

/// Frame files in a directory (PGM/PNG), lexicographic by filename.
inline std::vector<std::string> list_frames(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        auto ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char ch) { return std::tolower(ch); });
        if (ext == ".pgm" || ext == ".png") files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

/// Load a frame window as a normalized sequence: pixel value k maps to k/255
/// exactly. Window selects [offset, offset + length) of the sorted frame list
/// (length <= 0 means all remaining frames).
inline ImageSequence load_sequence(const std::vector<std::string>& files, double dt,
                                   int offset = 0, int length = -1) {
    if (offset < 0 || offset >= static_cast<int>(files.size()))
        throw std::invalid_argument("load_sequence: window offset out of range");
    int avail = static_cast<int>(files.size()) - offset;
    int count = length <= 0 ? avail : std::min(length, avail);
    if (count < 2) throw std::invalid_argument("load_sequence: need at least 2 frames");

    GrayImage first = read_frame(files[offset]);
    SpaceTimeGrid g(count, first.height, first.width, dt);
    ImageSequence f(g);
    for (int k = 0; k < count; ++k) {
        GrayImage img = k == 0 ? std::move(first) : read_frame(files[offset + k]);
        if (img.width != g.width || img.height != g.height)
            throw std::runtime_error("load_sequence: dimension mismatch in " +
                                     files[offset + k]);
        for (int i = 0; i < g.height; ++i)
            for (int j = 0; j < g.width; ++j)
                f(k, i, j) = img.pixels[i * g.width + j] / 255.0;
    }
    return f;
}

inline ImageSequence load_sequence(const std::string& dir, double dt, int offset = 0,
                                   int length = -1) {
    auto files = list_frames(dir);
    if (files.empty()) throw std::runtime_error("load_sequence: no frames in " + dir);
    return load_sequence(files, dt, offset, length);
}

/// Quantize a [0,1] field frame to an 8-bit image (round to nearest).
inline GrayImage frame_to_image(const ImageSequence& f, int k) {
    const SpaceTimeGrid& g = f.grid;
    GrayImage img;
    img.width = g.width;
    img.height = g.height;
    img.pixels.resize(static_cast<std::size_t>(g.width) * g.height);
    for (int i = 0; i < g.height; ++i)
        for (int j = 0; j < g.width; ++j) {
            double v = std::min(1.0, std::max(0.0, f(k, i, j)));
            img.pixels[i * g.width + j] = static_cast<std::uint8_t>(std::lround(v * 255.0));
        }
    return img;
}

}  // namespace convflow
