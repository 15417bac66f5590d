#pragma once

#include <cmath>

namespace poselab::geometry {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }

    bool operator==(const Vec3& o) const = default;
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

}  // namespace poselab::geometry
