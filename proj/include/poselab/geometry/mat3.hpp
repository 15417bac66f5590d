#pragma once

#include <array>
#include <cmath>

#include "poselab/geometry/vec3.hpp"

namespace poselab::geometry {

// Row-major 3x3 matrix; just enough for rotation handling.
struct Mat3 {
    std::array<double, 9> m{};

    double& operator()(int r, int c) { return m[static_cast<std::size_t>(r) * 3 + c]; }
    double operator()(int r, int c) const { return m[static_cast<std::size_t>(r) * 3 + c]; }

    static Mat3 identity() {
        Mat3 out;
        out.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        return out;
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 out;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += (*this)(r, k) * o(k, c);
                out(r, c) = s;
            }
        return out;
    }

    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    Mat3 transposed() const {
        Mat3 out;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) out(r, c) = (*this)(c, r);
        return out;
    }

    double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) -
               m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }

    // max |entry| of (this - o)
    double max_abs_diff(const Mat3& o) const {
        double d = 0.0;
        for (int i = 0; i < 9; ++i) d = std::max(d, std::abs(m[i] - o.m[i]));
        return d;
    }
};

}  // namespace poselab::geometry
