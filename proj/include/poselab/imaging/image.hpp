#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace poselab::imaging {

// Row-major HxWx3 image, float values in [0, 1].
struct Image {
    int height = 0;
    int width = 0;
    std::vector<float> data;  // height * width * 3

    Image() = default;
    Image(int h, int w, float fill = 0.0f)
        : height(h), width(w),
          data(static_cast<std::size_t>(h) * w * 3, fill) {
        if (h < 1 || w < 1)
            throw std::invalid_argument("image: dimensions must be >= 1, got " +
                                        std::to_string(h) + "x" +
                                        std::to_string(w));
    }

    float& at(int r, int c, int ch) {
        return data[(static_cast<std::size_t>(r) * width + c) * 3 + ch];
    }
    float at(int r, int c, int ch) const {
        return data[(static_cast<std::size_t>(r) * width + c) * 3 + ch];
    }

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(height) * width;
    }
};

// Per-channel means; also the rotation border fill.
inline std::array<float, 3> channel_means(const Image& img) {
    double acc[3] = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < img.data.size(); i += 3) {
        acc[0] += img.data[i];
        acc[1] += img.data[i + 1];
        acc[2] += img.data[i + 2];
    }
    const double n = static_cast<double>(img.pixel_count());
    return {static_cast<float>(acc[0] / n), static_cast<float>(acc[1] / n),
            static_cast<float>(acc[2] / n)};
}

inline double mean_abs_diff(const Image& a, const Image& b) {
    if (a.height != b.height || a.width != b.width)
        throw std::invalid_argument("mean_abs_diff: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        acc += std::abs(static_cast<double>(a.data[i]) - b.data[i]);
    return acc / static_cast<double>(a.data.size());
}

}  // namespace poselab::imaging
