#pragma once

// File I/O for the two supported fixture formats: 8-bit RGB PNG (via libpng,
// values divided by 255) and a trivial raw format — one ASCII header line
// "height width", then height*width*3 row-major bytes.

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "poselab/imaging/image.hpp"
#include "poselab/util/error.hpp"

namespace poselab::imaging {

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline std::uint8_t to_byte(float v) {
    const float scaled = v * 255.0f + 0.5f;
    return static_cast<std::uint8_t>(scaled < 0.f ? 0.f
                                     : scaled > 255.f ? 255.f
                                                      : scaled);
}

}  // namespace detail

inline Image read_png(const std::string& path) {
    detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw DataError("read_png: cannot open " + path);

    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("read_png: libpng init failed");
    }
    std::vector<std::uint8_t> bytes;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("read_png: corrupt PNG " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);

    // normalize everything to 8-bit RGB
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_strip_alpha(png);
    png_read_update_info(png, info);

    bytes.resize(static_cast<std::size_t>(h) * w * 3);
    rows.resize(h);
    for (png_uint_32 r = 0; r < h; ++r)
        rows[r] = bytes.data() + static_cast<std::size_t>(r) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(static_cast<int>(h), static_cast<int>(w));
    for (std::size_t i = 0; i < bytes.size(); ++i)
        img.data[i] = static_cast<float>(bytes[i]) / 255.0f;
    return img;
}

inline void write_png(const std::string& path, const Image& img) {
    detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw DataError("write_png: cannot open " + path);

    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw DataError("write_png: libpng init failed");
    }
    std::vector<std::uint8_t> bytes(img.data.size());
    std::vector<png_bytep> rows(img.height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("write_png: write failed for " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    for (std::size_t i = 0; i < bytes.size(); ++i)
        bytes[i] = detail::to_byte(img.data[i]);
    for (int r = 0; r < img.height; ++r)
        rows[r] = bytes.data() + static_cast<std::size_t>(r) * img.width * 3;
    png_set_rows(png, info, rows.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
}

inline Image read_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("read_raw: cannot open " + path);
    int h = 0, w = 0;
    in >> h >> w;
    if (!in || h < 1 || w < 1)
        throw DataError("read_raw: bad header in " + path);
    in.get();  // newline after the header
    std::vector<char> bytes(static_cast<std::size_t>(h) * w * 3);
    in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
        throw DataError("read_raw: truncated payload in " + path);
    Image img(h, w);
    for (std::size_t i = 0; i < bytes.size(); ++i)
        img.data[i] =
            static_cast<float>(static_cast<std::uint8_t>(bytes[i])) / 255.0f;
    return img;
}

inline void write_raw(const std::string& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_raw: cannot open " + path);
    out << img.height << " " << img.width << "\n";
    std::vector<char> bytes(img.data.size());
    for (std::size_t i = 0; i < bytes.size(); ++i)
        bytes[i] = static_cast<char>(detail::to_byte(img.data[i]));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write_raw: write failed for " + path);
}

// Dispatch on extension: ".png" or ".raw".
inline Image read_image(const std::string& path) {
    const auto ext = std::filesystem::path(path).extension().string();
    if (ext == ".png") return read_png(path);
    if (ext == ".raw") return read_raw(path);
    throw DataError("read_image: unsupported extension '" + ext + "' in " + path);
}

}  // namespace poselab::imaging
