#pragma once

// The two network-input pipelines (aspect-preserving 256-resize + centered
// 224 crop vs. direct whole-field-of-view squash to 224x224), plus random
// crops and the in-plane rotation used by augmentation. All sampling is
// bilinear with half-pixel-center coordinate mapping.

#include <cmath>
#include <numbers>

#include "poselab/imaging/image.hpp"
#include "poselab/util/rng.hpp"

namespace poselab::imaging {

inline constexpr int kNetworkInputSize = 224;
inline constexpr int kResizeShortSide = 256;

namespace detail {

// Bilinear sample with edge clamping; coordinates are pixel centers.
inline float sample_clamped(const Image& img, double y, double x, int ch) {
    const int y0 = static_cast<int>(std::floor(y));
    const int x0 = static_cast<int>(std::floor(x));
    const double fy = y - y0;
    const double fx = x - x0;
    const auto cl = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
    const int yc0 = cl(y0, img.height - 1), yc1 = cl(y0 + 1, img.height - 1);
    const int xc0 = cl(x0, img.width - 1), xc1 = cl(x0 + 1, img.width - 1);
    const double top = img.at(yc0, xc0, ch) * (1.0 - fx) + img.at(yc0, xc1, ch) * fx;
    const double bot = img.at(yc1, xc0, ch) * (1.0 - fx) + img.at(yc1, xc1, ch) * fx;
    return static_cast<float>(top * (1.0 - fy) + bot * fy);
}

}  // namespace detail

inline Image resize_bilinear(const Image& img, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1)
        throw std::invalid_argument("resize_bilinear: output dims must be >= 1");
    if (out_h == img.height && out_w == img.width) return img;

    Image out(out_h, out_w);
    const double sy = static_cast<double>(img.height) / out_h;
    const double sx = static_cast<double>(img.width) / out_w;
    for (int r = 0; r < out_h; ++r) {
        const double y = (r + 0.5) * sy - 0.5;
        for (int c = 0; c < out_w; ++c) {
            const double x = (c + 0.5) * sx - 0.5;
            for (int ch = 0; ch < 3; ++ch)
                out.at(r, c, ch) = detail::sample_clamped(img, y, x, ch);
        }
    }
    return out;
}

namespace detail {

// Smallest dimension to 256, the other rounded to nearest (ties away from
// zero).
inline Image resize_short_side(const Image& img) {
    const double scale =
        static_cast<double>(kResizeShortSide) / std::min(img.height, img.width);
    int h, w;
    if (img.height <= img.width) {
        h = kResizeShortSide;
        w = static_cast<int>(std::llround(img.width * scale));
    } else {
        w = kResizeShortSide;
        h = static_cast<int>(std::llround(img.height * scale));
    }
    return resize_bilinear(img, h, w);
}

inline Image crop(const Image& img, int top, int left, int h, int w) {
    Image out(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            for (int ch = 0; ch < 3; ++ch)
                out.at(r, c, ch) = img.at(top + r, left + c, ch);
    return out;
}

}  // namespace detail

// Aspect-preserving resize to short side 256, centered 224x224 crop.
inline Image centered_crop_pipeline(const Image& img) {
    const Image mid = detail::resize_short_side(img);
    const int top = (mid.height - kNetworkInputSize) / 2;
    const int left = (mid.width - kNetworkInputSize) / 2;
    return detail::crop(mid, top, left, kNetworkInputSize, kNetworkInputSize);
}

// Direct squash to 224x224; keeps the entire field of view at the cost of
// aspect ratio.
inline Image whole_fov_resize(const Image& img) {
    return resize_bilinear(img, kNetworkInputSize, kNetworkInputSize);
}

// Aspect-preserving resize to short side 256, then a uniformly random
// 224x224 crop; deterministic given the seed.
inline Image random_crop_pipeline(const Image& img, std::uint64_t seed) {
    const Image mid = detail::resize_short_side(img);
    rng::Generator gen(seed);
    const int top = static_cast<int>(
        gen.below(static_cast<std::uint64_t>(mid.height - kNetworkInputSize) + 1));
    const int left = static_cast<int>(
        gen.below(static_cast<std::uint64_t>(mid.width - kNetworkInputSize) + 1));
    return detail::crop(mid, top, left, kNetworkInputSize, kNetworkInputSize);
}

// Rotation about the image center by theta degrees. Output pixel p samples
// the input at R(theta) * p in centered (x right, y down) coordinates, which
// matches a camera roll of +theta about its optical axis (the renderer
// equivariance test pins this pairing). Out-of-bounds samples are filled
// with the per-channel image mean. theta = 0 returns the input bit-exactly.
inline Image rotate_image(const Image& img, double theta_deg) {
    if (std::abs(theta_deg) > 45.0)
        throw std::invalid_argument("rotate_image: |theta| must be <= 45");
    if (theta_deg == 0.0) return img;

    const auto fill = channel_means(img);
    const double t = theta_deg * std::numbers::pi / 180.0;
    const double ct = std::cos(t), st = std::sin(t);
    const double cy = (img.height - 1) / 2.0;
    const double cx = (img.width - 1) / 2.0;

    Image out(img.height, img.width);
    for (int r = 0; r < img.height; ++r) {
        const double y = r - cy;
        for (int c = 0; c < img.width; ++c) {
            const double x = c - cx;
            const double sx = ct * x - st * y + cx;
            const double sy = st * x + ct * y + cy;
            const bool inside = sx >= 0.0 && sx <= img.width - 1.0 &&
                                sy >= 0.0 && sy <= img.height - 1.0;
            for (int ch = 0; ch < 3; ++ch)
                out.at(r, c, ch) = inside
                                       ? detail::sample_clamped(img, sy, sx, ch)
                                       : fill[static_cast<std::size_t>(ch)];
        }
    }
    return out;
}

}  // namespace poselab::imaging
