#pragma once

// Procedural pinhole renderer: a camera above a textured ground plane at
// z = 0. The texture is smooth multi-scale value noise, so images vary
// smoothly with pose and bilinear resampling artifacts stay well below the
// equivariance tolerances. Camera frame: x right, y down, z forward
// (camera-to-world orientation maps camera directions into the world).

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "poselab/geometry/mat3.hpp"
#include "poselab/geometry/pose.hpp"
#include "poselab/imaging/image.hpp"
#include "poselab/util/rng.hpp"

namespace poselab::synth {

struct SceneConfig {
    std::uint64_t pattern_seed = 1;
    double plane_extent = 6.0;  // usable roaming area, meters
    double focal_px = 160.0;
    int image_h = 160;
    int image_w = 160;
    // Fraction of discriminative texture contrast pushed toward the image
    // periphery: 0 = uniform contrast, 1 = flat center. Radial in image
    // space, so it commutes with in-plane rotation.
    double border_info = 0.0;

    void validate() const {
        if (focal_px <= 0.0)
            throw std::invalid_argument("scene: focal length must be > 0");
        if (image_h < 64 || image_w < 64)
            throw std::invalid_argument("scene: image size must be >= 64x64");
        if (border_info < 0.0 || border_info > 1.0)
            throw std::invalid_argument("scene: border_info must be in [0,1]");
    }
};

namespace detail {

inline double lattice_value(std::uint64_t seed, std::int64_t ix, std::int64_t iy,
                            int octave, int channel) {
    std::uint64_t h = seed;
    h = rng::mix(h, static_cast<std::uint64_t>(ix) * 0x9E3779B97F4A7C15ull);
    h = rng::mix(h, static_cast<std::uint64_t>(iy) * 0xC2B2AE3D27D4EB4Full);
    h = rng::mix(h, static_cast<std::uint64_t>(octave * 4 + channel + 1));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// C1-smooth value noise at plane point (x, y), one octave.
inline double value_noise(std::uint64_t seed, double x, double y, int octave,
                          int channel) {
    const double fx = std::floor(x), fy = std::floor(y);
    const auto ix = static_cast<std::int64_t>(fx);
    const auto iy = static_cast<std::int64_t>(fy);
    const double ux = smoothstep(x - fx), uy = smoothstep(y - fy);
    const double v00 = lattice_value(seed, ix, iy, octave, channel);
    const double v10 = lattice_value(seed, ix + 1, iy, octave, channel);
    const double v01 = lattice_value(seed, ix, iy + 1, octave, channel);
    const double v11 = lattice_value(seed, ix + 1, iy + 1, octave, channel);
    const double top = v00 * (1.0 - ux) + v10 * ux;
    const double bot = v01 * (1.0 - ux) + v11 * ux;
    return top * (1.0 - uy) + bot * uy;
}

// wavelengths in meters; coarse octaves carry the positional signal, the
// finest stays >= ~10 pixels at nominal viewing height
inline constexpr double kWavelengths[4] = {1.6, 0.8, 0.4, 0.2};
inline constexpr double kAmplitudes[4] = {0.45, 0.30, 0.15, 0.10};

inline double plane_texture(std::uint64_t seed, double x, double y, int channel) {
    double v = 0.0;
    for (int o = 0; o < 4; ++o)
        v += kAmplitudes[o] *
             value_noise(seed, x / kWavelengths[o], y / kWavelengths[o], o,
                         channel);
    return v;
}

// contrast gain rising from (1 - b) at the center to 1 at the periphery
inline double border_gain(double rho, double b) {
    const double t = std::clamp((rho - 0.45) / 0.45, 0.0, 1.0);
    return (1.0 - b) + b * smoothstep(t);
}

}  // namespace detail

// Deterministic render of the plane as seen from `pose`. Rolling the camera
// about its optical axis by theta yields the image rotated by theta about
// its center (up to interpolation) — the property that anchors the
// augmentation label rewrite.
inline imaging::Image render(const geometry::Pose& pose, const SceneConfig& scene) {
    scene.validate();
    if (pose.position.z <= 1e-9)
        throw std::invalid_argument(
            "render: camera must be above the plane (z > 0), got z = " +
            std::to_string(pose.position.z));

    const geometry::Mat3 rot = pose.orientation.to_rotation_matrix();
    const double cy = (scene.image_h - 1) / 2.0;
    const double cx = (scene.image_w - 1) / 2.0;

    // central ray must hit the plane in front of the camera
    {
        const geometry::Vec3 center_dir = rot * geometry::Vec3{0.0, 0.0, 1.0};
        if (center_dir.z >= -1e-9)
            throw std::invalid_argument(
                "render: degenerate view, plane is behind the camera");
    }

    const double corner_r = std::hypot(cy + 0.5, cx + 0.5);
    imaging::Image img(scene.image_h, scene.image_w);
    for (int r = 0; r < scene.image_h; ++r)
        for (int c = 0; c < scene.image_w; ++c) {
            const geometry::Vec3 dir_cam{(c - cx) / scene.focal_px,
                                         (r - cy) / scene.focal_px, 1.0};
            const geometry::Vec3 dir = rot * dir_cam;
            double tex[3];
            if (dir.z >= -1e-12) {
                tex[0] = tex[1] = tex[2] = 0.5;  // ray misses the plane
            } else {
                const double t = -pose.position.z / dir.z;
                const double px = pose.position.x + t * dir.x;
                const double py = pose.position.y + t * dir.y;
                for (int ch = 0; ch < 3; ++ch)
                    tex[ch] = detail::plane_texture(scene.pattern_seed, px, py, ch);
            }
            const double rho = std::hypot(r - cy, c - cx) / corner_r;
            const double gain = detail::border_gain(rho, scene.border_info);
            for (int ch = 0; ch < 3; ++ch) {
                const double v = 0.5 + (tex[ch] - 0.5) * gain;
                img.at(r, c, ch) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
        }
    return img;
}

}  // namespace poselab::synth
